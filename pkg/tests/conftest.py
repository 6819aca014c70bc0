import pytest

from regsum.histogram import BinningKind, BinningStrategy
from regsum.pipeline import index_particles, summarize_field_file, synth_to_files
from regsum.store import write_pdf_store
from regsum.summarizer import PdfConfig
from regsum.synth import ALPHA_CLASS, CH2O, HEAT_RELEASE, SynthSpec

DEMO_CONFIGS = [
    PdfConfig((HEAT_RELEASE,), BinningStrategy(BinningKind.STURGES)),
    PdfConfig((HEAT_RELEASE, CH2O), BinningStrategy.fixed(8)),
    PdfConfig((ALPHA_CLASS,), BinningStrategy.fixed(3), condition=(ALPHA_CLASS, -1.0, 1.0)),
]

DEMO_SPEC = SynthSpec(dims=(16, 16, 16), timesteps=2, seed=123, particle_count=2000)
DEMO_REGIONS = (4, 4, 4)


class DemoDataset:
    def __init__(self, root):
        self.root = root
        self.field_path = root / "demo.rfld"
        self.raw_particles = root / "demo_raw.rprt"
        self.particle_path = root / "demo.rprt"
        self.pdf_path = root / "demo.rpdf"
        self.spec = DEMO_SPEC
        self.configs = DEMO_CONFIGS
        self.synth = synth_to_files(DEMO_SPEC, self.field_path, self.raw_particles)
        self.grid, self.variables, self.summaries = summarize_field_file(
            self.field_path, DEMO_REGIONS, DEMO_CONFIGS
        )
        write_pdf_store(self.pdf_path, self.grid, self.variables, DEMO_CONFIGS, self.summaries)
        index_particles(self.raw_particles, self.field_path, DEMO_REGIONS, self.particle_path)


@pytest.fixture(scope="session")
def demo_dataset(tmp_path_factory):
    return DemoDataset(tmp_path_factory.mktemp("demo"))
