"""Regional-PDF summarization and query toolkit.

Reduces multivariate time-varying volumetric data to per-region probability
distribution functions in a streaming pass, stores tracer particles sorted
by the same spatial scheme for scan-free extraction, and supports post hoc
selection, merging, and statistical analysis of the PDFs via a CLI, an HTTP
service, and an explorer UI.
"""

from .grid import RectilinearAxes, RegionGrid, build_decomposition, region_of_cell, region_of_point
from .histogram import (
    BinEdges,
    BinningKind,
    BinningStrategy,
    MergedPdf,
    RegionalHistogram,
    VariableStats,
    add_same_edges,
    edges_from_strategy,
    mass_in_range,
    max_bin,
    merge_general,
    moments,
)
from .particles import ParticleIndexTable, ParticleRecord, extract, sort_and_index
from .query import (
    And,
    MassInRange,
    MaxBinIn,
    NonEmpty,
    Not,
    Or,
    QueryEngine,
    Selection,
    export_merged,
    predicate_from_json,
    predicate_to_json,
)
from .store import (
    ParticleStoreReader,
    ParticleTimestep,
    PdfStoreData,
    RawFieldReader,
    read_pdf_store,
    read_raw_field,
    write_particle_store,
    write_pdf_store,
    write_raw_field,
)
from .summarizer import FieldBlock, PdfConfig, TimestepSummary, merge_partials, summarize_timestep
from .synth import SynthSpec, generate

__version__ = "0.1.0"

__all__ = [
    "RectilinearAxes",
    "RegionGrid",
    "build_decomposition",
    "region_of_cell",
    "region_of_point",
    "BinEdges",
    "BinningKind",
    "BinningStrategy",
    "MergedPdf",
    "RegionalHistogram",
    "VariableStats",
    "add_same_edges",
    "edges_from_strategy",
    "mass_in_range",
    "max_bin",
    "merge_general",
    "moments",
    "ParticleIndexTable",
    "ParticleRecord",
    "extract",
    "sort_and_index",
    "And",
    "MassInRange",
    "MaxBinIn",
    "NonEmpty",
    "Not",
    "Or",
    "QueryEngine",
    "Selection",
    "export_merged",
    "predicate_from_json",
    "predicate_to_json",
    "ParticleStoreReader",
    "ParticleTimestep",
    "PdfStoreData",
    "RawFieldReader",
    "read_pdf_store",
    "read_raw_field",
    "write_particle_store",
    "write_pdf_store",
    "write_raw_field",
    "FieldBlock",
    "PdfConfig",
    "TimestepSummary",
    "merge_partials",
    "summarize_timestep",
    "SynthSpec",
    "generate",
]
