"""Composition helpers wiring the pipeline stages together.

These are the pieces the CLI subcommands are built from: synthetic data to
files, raw-field files to PDF stores, and unsorted particle files to
region-sorted indexed stores.
"""

from __future__ import annotations

import numpy as np

from .grid import RegionGrid, build_decomposition
from .particles import ParticleIndexTable, sort_and_index
from .store import (
    ParticleStoreReader,
    ParticleTimestep,
    RawFieldReader,
    write_particle_store,
    write_raw_field,
)
from .summarizer import FieldBlock, PdfConfig, TimestepSummary, summarize_timestep
from .synth import VARIABLES, SynthData, SynthSpec, generate


def synth_to_files(spec: SynthSpec, field_path, particle_path=None) -> SynthData:
    """Generate synthetic data and write the raw-field file, plus (when a
    particle path is given) an unsorted single-region particle store."""
    data = generate(spec)
    write_raw_field(field_path, data.axes, list(VARIABLES), zip(data.times, data.fields))
    if particle_path is not None:
        n = spec.particle_count
        steps = [
            ParticleTimestep(
                time=t,
                table=ParticleIndexTable(np.array([0]), np.array([n])),
                records=records,
            )
            for t, records in zip(data.times, data.particles)
        ]
        write_particle_store(particle_path, (1, 1, 1), list(VARIABLES), steps)
    return data


def summarize_field_file(
    field_path,
    region_counts: tuple[int, int, int],
    configs: list[PdfConfig],
    workers: int | None = None,
) -> tuple[RegionGrid, list[tuple[str, str]], list[TimestepSummary]]:
    """Summarize every timestep of a raw-field file as one whole-volume block."""
    with RawFieldReader(field_path) as reader:
        rg = build_decomposition(reader.axes.dims, region_counts)
        extents = tuple((0, d) for d in reader.axes.dims)
        summaries = []
        for t in range(reader.timestep_count):
            time, fields = reader.read_timestep(t)
            block = FieldBlock(extents=extents, values=fields)
            summaries.append(summarize_timestep([block], rg, configs, time=time, workers=workers))
        return rg, list(reader.variables), summaries


def index_particles(
    particle_path,
    field_path,
    region_counts: tuple[int, int, int],
    out_path,
) -> RegionGrid:
    """Sort an existing particle store by region and write the indexed store.

    The grid axes come from the raw-field file so particles and PDFs share
    one spatial organization.
    """
    with RawFieldReader(field_path) as field:
        axes = field.axes
    rg = build_decomposition(axes.dims, region_counts)
    with ParticleStoreReader(particle_path) as reader:
        steps = []
        for t in range(reader.timestep_count):
            step = reader.read_timestep(t)
            sorted_records, table, out_of_domain = sort_and_index(step.records, rg, axes)
            if out_of_domain:
                raise ValueError(
                    f"timestep {t}: {len(out_of_domain)} particles outside the domain"
                )
            steps.append(ParticleTimestep(time=step.time, table=table, records=sorted_records))
        write_particle_store(out_path, rg.region_counts, reader.variables, steps)
    return rg
