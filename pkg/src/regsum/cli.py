"""Command-line front door composing the pipeline.

Subcommands: synth, summarize, index, query, extract, merge, stats, serve.
Exit codes: 0 success, 1 usage error, 2 data error.  Predicates are passed
as a JSON AST (see docs/api.md), region selections as comma-separated ids
or @file.json, and PDF configurations as compact spec strings, e.g.

    --config "2d:heat_release,ch2o:fd"
    --config "1d:alpha_class:fixed=3:cond=alpha_class,-1,1"

The REGSUM_THREADS environment variable caps the summarizer's worker count
(0 = auto).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .errors import RegsumError, UnknownVariable
from .histogram import BinningKind, BinningStrategy
from .particles import extract, records_to_csv
from .query import (
    QueryEngine,
    Selection,
    export_merged,
    predicate_from_json,
)
from .store import ParticleStoreReader, RawFieldReader, read_pdf_store, write_pdf_store
from .summarizer import PdfConfig
from .synth import SynthSpec

DEFAULT_MAX_BINS = 256

_STRATEGY_NAMES = {
    "sturges": BinningKind.STURGES,
    "scott": BinningKind.SCOTT,
    "fd": BinningKind.FREEDMAN_DIACONIS,
}


class UsageError(Exception):
    pass


@dataclass
class ConfigSpec:
    """Parsed --config string; variable names resolve against the input file."""

    var_names: list[str]
    strategy: BinningStrategy
    condition: tuple[str, float, float] | None

    def resolve(self, variable_id) -> PdfConfig:
        try:
            var_ids = tuple(variable_id(n) for n in self.var_names)
            condition = None
            if self.condition is not None:
                condition = (variable_id(self.condition[0]), self.condition[1], self.condition[2])
        except KeyError as exc:
            raise UnknownVariable(f"input file does not track variable {exc}")
        return PdfConfig(var_ids=var_ids, strategy=self.strategy, condition=condition)


def parse_config_spec(text: str) -> ConfigSpec:
    parts = text.split(":")
    if len(parts) < 3:
        raise UsageError(f"config {text!r}: expected <1d|2d>:<vars>:<strategy>[:...]")
    ndims_tok, vars_tok, strat_tok, *rest = parts
    if ndims_tok not in ("1d", "2d"):
        raise UsageError(f"config {text!r}: dimensionality must be 1d or 2d")
    var_names = [v for v in vars_tok.split(",") if v]
    if len(var_names) != (1 if ndims_tok == "1d" else 2):
        raise UsageError(f"config {text!r}: {ndims_tok} needs {1 if ndims_tok == '1d' else 2} variables")

    max_bins = DEFAULT_MAX_BINS
    condition = None
    for tok in rest:
        if tok.startswith("cond="):
            fields = tok[len("cond=") :].split(",")
            if len(fields) != 3:
                raise UsageError(f"config {text!r}: cond needs var,lo,hi")
            try:
                condition = (fields[0], float(fields[1]), float(fields[2]))
            except ValueError:
                raise UsageError(f"config {text!r}: cond bounds must be numbers")
        elif tok.startswith("maxbins="):
            try:
                max_bins = int(tok[len("maxbins=") :])
            except ValueError:
                raise UsageError(f"config {text!r}: maxbins must be an integer")
        else:
            raise UsageError(f"config {text!r}: unknown option {tok!r}")

    if strat_tok.startswith("fixed="):
        try:
            strategy = BinningStrategy(BinningKind.FIXED, max_bins=int(strat_tok[len("fixed=") :]))
        except ValueError:
            raise UsageError(f"config {text!r}: fixed bin count must be an integer")
    elif strat_tok in _STRATEGY_NAMES:
        strategy = BinningStrategy(_STRATEGY_NAMES[strat_tok], max_bins=max_bins)
    else:
        raise UsageError(f"config {text!r}: unknown strategy {strat_tok!r}")
    return ConfigSpec(var_names=var_names, strategy=strategy, condition=condition)


def _triple(text: str) -> tuple[int, int, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"{text!r}: expected three comma-separated integers")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r}: expected integers")


def _parse_regions(text: str) -> tuple[int, ...]:
    if text.startswith("@"):
        with open(text[1:]) as f:
            ids = json.load(f)
        if not isinstance(ids, list):
            raise UsageError(f"{text[1:]}: expected a JSON array of region ids")
        return tuple(sorted(int(r) for r in ids))
    try:
        return tuple(sorted(int(p) for p in text.split(",") if p != ""))
    except ValueError:
        raise UsageError(f"{text!r}: regions must be comma-separated ids or @file.json")


def _parse_predicate(text: str):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"predicate is not valid JSON: {exc}")
    try:
        return predicate_from_json(obj)
    except ValueError as exc:
        raise UsageError(str(exc))


def _write_output(data: bytes, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(data.decode("utf-8"))
    else:
        with open(path, "wb") as f:
            f.write(data)


# ---------------------------------------------------------------------------
# subcommands

def cmd_synth(args) -> int:
    from .pipeline import synth_to_files

    spec = SynthSpec(
        dims=args.dims,
        timesteps=args.steps,
        seed=args.seed,
        particle_count=args.particles,
    )
    synth_to_files(spec, args.out_field, args.out_particles)
    return 0


def cmd_summarize(args) -> int:
    from .pipeline import summarize_field_file

    specs = [parse_config_spec(s) for s in args.config]
    with RawFieldReader(args.input) as reader:
        configs = [s.resolve(reader.variable_id) for s in specs]
        variables = list(reader.variables)
    rg, _, summaries = summarize_field_file(args.input, args.regions, configs, workers=args.workers)
    write_pdf_store(args.output, rg, variables, configs, summaries)
    return 0


def cmd_index(args) -> int:
    from .pipeline import index_particles

    index_particles(args.particles, args.field, args.regions, args.output)
    return 0


def cmd_query(args) -> int:
    predicate = _parse_predicate(args.predicate)
    engine = QueryEngine(read_pdf_store(args.pdf))
    sel = engine.evaluate(args.timestep, args.config, predicate)
    print(json.dumps(list(sel.regions)))
    return 0


def cmd_extract(args) -> int:
    predicate = _parse_predicate(args.predicate)
    engine = QueryEngine(read_pdf_store(args.pdf))
    sel = engine.evaluate(args.timestep, args.config, predicate)
    with ParticleStoreReader(args.particles) as reader:
        if reader.region_counts != engine.grid.region_counts:
            raise RegsumError(
                f"particle store regions {reader.region_counts} do not match "
                f"PDF store regions {engine.grid.region_counts}"
            )
        names = [n for n, _ in reader.variables]
        refine = {}
        for spec in args.refine or []:
            fields = spec.split(",")
            if len(fields) != 3:
                raise UsageError(f"--refine {spec!r}: expected var,lo,hi")
            if fields[0] not in names:
                raise UnknownVariable(f"particle variable {fields[0]!r}")
            try:
                refine[names.index(fields[0])] = (float(fields[1]), float(fields[2]))
            except ValueError:
                raise UsageError(f"--refine {spec!r}: bounds must be numbers")
        records = extract(reader, args.timestep, set(sel.regions), refine or None)
        _write_output(records_to_csv(records, names).encode(), args.output)
    return 0


def cmd_merge(args) -> int:
    engine = QueryEngine(read_pdf_store(args.pdf))
    regions = _parse_regions(args.regions)
    merged, stats = engine.merge_selection(
        Selection(timestep=args.timestep, config=args.config, regions=regions)
    )
    if args.export == "json":
        payload = json.dumps(
            {"pdf": json.loads(export_merged(merged, "json")), "stats": stats}
        ).encode()
    else:
        payload = export_merged(merged, "csv")
    _write_output(payload, args.output)
    return 0


def cmd_stats(args) -> int:
    engine = QueryEngine(read_pdf_store(args.pdf))
    points = engine.timeline(args.var)
    out = ["timestep,time,mean,count"]
    for p in points:
        mean = "" if p["mean"] is None else repr(p["mean"])
        out.append(f"{p['timestep']},{p['time']!r},{mean},{p['count']}")
    print("\n".join(out))
    return 0


def cmd_serve(args) -> int:
    from .server import serve

    serve(args.pdf, args.particles, port=args.port, host=args.host)
    return 0


# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="regsum", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic fields and particles")
    p.add_argument("--dims", type=_triple, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--particles", type=int, default=0)
    p.add_argument("--out-field", required=True)
    p.add_argument("--out-particles", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("summarize", help="raw fields to per-region PDF store")
    p.add_argument("--input", required=True)
    p.add_argument("--regions", type=_triple, required=True)
    p.add_argument("--config", action="append", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("index", help="sort particles by region and index them")
    p.add_argument("--particles", required=True)
    p.add_argument("--field", required=True)
    p.add_argument("--regions", type=_triple, required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("query", help="evaluate a predicate, print region ids")
    p.add_argument("--pdf", required=True)
    p.add_argument("--predicate", required=True)
    p.add_argument("--timestep", type=int, required=True)
    p.add_argument("--config", type=int, default=0)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("extract", help="extract particles for a predicate selection")
    p.add_argument("--pdf", required=True)
    p.add_argument("--particles", required=True)
    p.add_argument("--predicate", required=True)
    p.add_argument("--timestep", type=int, required=True)
    p.add_argument("--config", type=int, default=0)
    p.add_argument("--refine", action="append", metavar="VAR,LO,HI")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("merge", help="merge selected regional PDFs and export")
    p.add_argument("--pdf", required=True)
    p.add_argument("--regions", required=True, help="comma-separated ids or @file.json")
    p.add_argument("--timestep", type=int, required=True)
    p.add_argument("--config", type=int, default=0)
    p.add_argument("--export", choices=("csv", "json"), default="csv")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("stats", help="per-timestep timeline statistics")
    p.add_argument("--pdf", required=True)
    p.add_argument("--var", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("serve", help="serve the HTTP query API")
    p.add_argument("--pdf", required=True)
    p.add_argument("--particles", default=None)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"regsum: error: {exc}", file=sys.stderr)
        return 1
    except (RegsumError, OSError, ValueError) as exc:
        print(f"regsum: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
