#!/usr/bin/env python3
"""Record real HTTP responses as fixtures for the explorer UI test suite.

Builds the seeded demo dataset, serves it through the in-process test
client, and saves selected response bodies byte-for-byte under
frontend/test/fixtures/.  Rerunning regenerates identical files.
"""

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from regsum.histogram import BinningStrategy, BinningKind
from regsum.pipeline import index_particles, summarize_field_file, synth_to_files
from regsum.server import create_app
from regsum.store import write_pdf_store
from regsum.summarizer import PdfConfig
from regsum.synth import ALPHA_CLASS, CH2O, HEAT_RELEASE, SynthSpec

FIXTURES = Path(__file__).resolve().parent.parent / "frontend" / "test" / "fixtures"

SPEC = SynthSpec(dims=(16, 16, 16), timesteps=2, seed=123, particle_count=2000)
REGIONS = (4, 4, 4)
CONFIGS = [
    PdfConfig((HEAT_RELEASE,), BinningStrategy(BinningKind.STURGES)),
    PdfConfig((HEAT_RELEASE, CH2O), BinningStrategy.fixed(8)),
    PdfConfig((ALPHA_CLASS,), BinningStrategy.fixed(3), condition=(ALPHA_CLASS, -1.0, 1.0)),
]
LASSO_SELECTION = [5, 6, 9, 10]  # 2x2 center block of the z=0 plane


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        field = root / "demo.rfld"
        raw_particles = root / "raw.rprt"
        pdf = root / "demo.rpdf"
        particles = root / "demo.rprt"
        synth_to_files(SPEC, field, raw_particles)
        grid, variables, summaries = summarize_field_file(field, REGIONS, CONFIGS)
        write_pdf_store(pdf, grid, variables, CONFIGS, summaries)
        index_particles(raw_particles, field, REGIONS, particles)

        app = create_app(pdf, particles)
        client = TestClient(app)

        def save(name: str, response):
            assert response.status_code == 200, (name, response.status_code, response.text)
            (FIXTURES / name).write_bytes(response.content)
            print(f"wrote {name} ({len(response.content)} bytes)")

        save("meta.json", client.get("/meta"))
        save("timeline_heat_release.json", client.get("/timeline", params={"var": "heat_release"}))

        for config in (0, 1):
            for lod in (1, 2, 3, 4):
                save(
                    f"slice_t0_c{config}_z0_lod{lod}.json",
                    client.get(
                        "/slice",
                        params={"t": 0, "config": config, "axis": 2, "index": 0, "lod": lod},
                    ),
                )
            pdfs = {}
            for region in range(16):  # all regions of the z=0 plane
                r = client.get("/pdf", params={"t": 0, "config": config, "region": region})
                assert r.status_code == 200
                pdfs[str(region)] = r.json()
            (FIXTURES / f"pdfs_t0_c{config}.json").write_text(json.dumps(pdfs))
            print(f"wrote pdfs_t0_c{config}.json")

        save(
            "merge_t0_c0_sel.json",
            client.post("/merge", json={"t": 0, "config": 0, "regions": LASSO_SELECTION}),
        )
        regions_param = ",".join(str(r) for r in LASSO_SELECTION)
        save(
            "export_t0_c0_sel.csv",
            client.get(
                "/export",
                params={"t": 0, "config": 0, "regions": regions_param, "format": "csv"},
            ),
        )
        save(
            "export_t0_c0_sel.json",
            client.get(
                "/export",
                params={"t": 0, "config": 0, "regions": regions_param, "format": "json"},
            ),
        )


if __name__ == "__main__":
    main()
