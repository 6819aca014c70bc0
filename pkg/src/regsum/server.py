"""Read-only HTTP service exposing the query engine to the explorer UI.

The protocol is stateless: selections and brushes live client-side and are
sent explicitly with each request, so every endpoint is a pure function of
(loaded stores, request) and concurrent identical requests return identical
bodies.  JSON field names are locked in docs/api.md.

Status codes: 400 malformed request, 404 unknown region/timestep/config,
422 invalid predicate.
"""

from __future__ import annotations

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .errors import (
    EmptySelection,
    IndexOutOfRange,
    RegsumError,
    UnknownConfig,
    UnknownRegion,
    UnknownTimestep,
    UnknownVariable,
)
from .particles import extract, records_to_csv
from .query import (
    QueryEngine,
    Selection,
    export_merged,
    histogram_to_json,
    merged_to_json,
    predicate_from_json,
)
from .store import ParticleStoreReader, read_pdf_store

_NOT_FOUND = (UnknownTimestep, UnknownConfig, UnknownRegion, IndexOutOfRange)


def _thumbnail_json(thumb):
    return {
        "region": thumb.region,
        "nbins": list(thumb.nbins),
        "counts": thumb.counts.tolist(),
        "sample_count": thumb.sample_count,
        "edges": [{"min": e.min, "max": e.max, "nbins": e.nbins} for e in thumb.edges],
    }


def _config_json(engine: QueryEngine, cfg) -> dict:
    return {
        "ndims": cfg.ndims,
        "var_ids": list(cfg.var_ids),
        "vars": [engine.variable_name(v) for v in cfg.var_ids],
        "strategy": cfg.strategy.kind.value,
        "max_bins": cfg.strategy.max_bins,
        "condition": None
        if cfg.condition is None
        else {
            "var_id": cfg.condition[0],
            "var": engine.variable_name(cfg.condition[0]),
            "lo": cfg.condition[1],
            "hi": cfg.condition[2],
        },
    }


def create_app(pdf_path, particle_path=None) -> FastAPI:
    engine = QueryEngine(read_pdf_store(pdf_path))
    particle_reader = None
    if particle_path is not None:
        particle_reader = ParticleStoreReader(particle_path)
        if particle_reader.region_counts != engine.grid.region_counts:
            raise ValueError(
                f"particle store regions {particle_reader.region_counts} do not match "
                f"PDF store regions {engine.grid.region_counts}"
            )

    app = FastAPI(title="regsum", docs_url=None, redoc_url=None)

    @app.exception_handler(RegsumError)
    async def regsum_error(request: Request, exc: RegsumError):
        if isinstance(exc, _NOT_FOUND):
            return JSONResponse({"error": str(exc)}, status_code=404)
        if isinstance(exc, (UnknownVariable, EmptySelection)):
            return JSONResponse({"error": str(exc)}, status_code=422)
        return JSONResponse({"error": str(exc)}, status_code=400)

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse({"error": str(exc)}, status_code=400)

    async def _body(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            return JSONResponse({"error": "body is not valid JSON"}, status_code=400)
        if not isinstance(body, dict):
            return JSONResponse({"error": "body must be a JSON object"}, status_code=400)
        return body

    def _selection_from(body: dict) -> Selection:
        try:
            t = int(body["t"])
            config = int(body.get("config", 0))
            regions = tuple(sorted(int(r) for r in body["regions"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise RequestValidationError([{"msg": f"bad selection body: {exc}"}])
        return Selection(timestep=t, config=config, regions=regions)

    @app.get("/meta")
    def meta():
        store = engine.store
        return {
            "grid": {
                "dims": list(store.grid.dims),
                "region_counts": list(store.grid.region_counts),
                "region_count": store.grid.region_count,
                "extents": [[list(e) for e in axis] for axis in store.grid.region_extents],
            },
            "variables": [{"name": n, "unit": u} for n, u in store.variables],
            "configs": [_config_json(engine, cfg) for cfg in store.configs],
            "timesteps": [s.time for s in store.summaries],
            "has_particles": particle_reader is not None,
        }

    @app.get("/timeline")
    def timeline(var: str):
        return {"var": var, "points": engine.timeline(var)}

    @app.get("/slice")
    def slice_view(t: int, config: int = 0, axis: int = 2, index: int = 0, lod: int = 1):
        view = engine.slice(t, config, axis, index, lod)
        return {
            "axis": view.axis,
            "index": view.index,
            "lod": view.lod,
            "horizontal_axis": view.horizontal_axis,
            "vertical_axis": view.vertical_axis,
            "shape": list(view.shape),
            "thumbnails": [[_thumbnail_json(th) for th in row] for row in view.thumbnails],
        }

    @app.get("/pdf")
    def pdf(t: int, region: int, config: int = 0):
        h = engine.histogram(t, config, region)
        obj = histogram_to_json(h, region=region)
        obj["t"] = t
        obj["config"] = config
        obj["vars"] = [engine.variable_name(v) for v in h.var_ids]
        return obj

    @app.post("/select")
    async def select(request: Request):
        body = await _body(request)
        if isinstance(body, Response):
            return body
        try:
            t = int(body["t"])
            config = int(body.get("config", 0))
            predicate = predicate_from_json(body["predicate"])
        except (KeyError, TypeError) as exc:
            return JSONResponse({"error": f"bad select body: {exc}"}, status_code=400)
        except ValueError as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        sel = engine.evaluate(t, config, predicate)
        return {"t": sel.timestep, "config": sel.config, "regions": list(sel.regions)}

    @app.post("/merge")
    async def merge(request: Request):
        body = await _body(request)
        if isinstance(body, Response):
            return body
        sel = _selection_from(body)
        merged, stats = engine.merge_selection(sel)
        return {"pdf": merged_to_json(merged), "stats": stats}

    @app.post("/extract")
    async def extract_particles(request: Request):
        body = await _body(request)
        if isinstance(body, Response):
            return body
        if particle_reader is None:
            return JSONResponse({"error": "no particle store loaded"}, status_code=404)
        sel = _selection_from(body)
        refine = None
        if body.get("refine"):
            refine = {}
            names = [n for n, _ in particle_reader.variables]
            for name, bounds in body["refine"].items():
                if name not in names:
                    raise UnknownVariable(f"particle variable {name!r}")
                refine[names.index(name)] = (float(bounds[0]), float(bounds[1]))
        records = extract(particle_reader, sel.timestep, set(sel.regions), refine)
        names = [n for n, _ in particle_reader.variables]
        return Response(content=records_to_csv(records, names), media_type="text/csv")

    @app.get("/export")
    def export(t: int, regions: str, config: int = 0, format: str = "csv"):
        if format not in ("csv", "json"):
            return JSONResponse({"error": f"unknown format {format!r}"}, status_code=400)
        try:
            ids = tuple(sorted(int(r) for r in regions.split(",") if r != ""))
        except ValueError:
            return JSONResponse({"error": "regions must be a comma-separated id list"}, status_code=400)
        merged, _ = engine.merge_selection(Selection(timestep=t, config=config, regions=ids))
        payload = export_merged(merged, format)
        media = "text/csv" if format == "csv" else "application/json"
        return Response(
            content=payload,
            media_type=media,
            headers={"Content-Disposition": f"attachment; filename=merged.{format}"},
        )

    return app


def serve(pdf_path, particle_path=None, port: int = 8000, host: str = "127.0.0.1"):
    """Blocking entry point used by the CLI `serve` subcommand."""
    import uvicorn

    app = create_app(pdf_path, particle_path)
    uvicorn.run(app, host=host, port=port, log_level="warning")
