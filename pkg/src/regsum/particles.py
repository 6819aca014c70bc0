"""Tracer particles: region tagging, sorting, offset index, extraction.

Particles are tagged with the region containing their position, stably
sorted by region id, and indexed with per-region (offset, count) pairs so a
selection of regions can be read back without scanning the whole set.
Particles outside the domain are kept separately rather than dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnknownRegion
from .grid import RectilinearAxes, RegionGrid, regions_of_points


@dataclass(frozen=True)
class ParticleRecord:
    id: int
    pos: tuple[float, float, float]
    values: tuple[float, ...]


@dataclass
class ParticleIndexTable:
    """Dense per-region (offset, count) pairs into a region-sorted record list."""

    offsets: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        self.offsets = np.asarray(self.offsets, dtype=np.int64)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.offsets.shape != self.counts.shape:
            raise ValueError("offsets and counts must have equal length")

    @property
    def region_count(self) -> int:
        return self.offsets.size

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def validate(self, record_count: int) -> None:
        if self.region_count == 0:
            if record_count != 0:
                raise ValueError("empty table with records present")
            return
        if self.offsets[0] != 0:
            raise ValueError("first offset must be 0")
        expect = self.offsets[:-1] + self.counts[:-1]
        if not np.array_equal(self.offsets[1:], expect):
            raise ValueError("offsets must be the exclusive prefix sum of counts")
        if self.offsets[-1] + self.counts[-1] != record_count:
            raise ValueError(
                f"table covers {self.offsets[-1] + self.counts[-1]} records, file has {record_count}"
            )

    def __eq__(self, other):
        if not isinstance(other, ParticleIndexTable):
            return NotImplemented
        return np.array_equal(self.offsets, other.offsets) and np.array_equal(
            self.counts, other.counts
        )


def sort_and_index(
    particles: list[ParticleRecord], rg: RegionGrid, axes: RectilinearAxes
) -> tuple[list[ParticleRecord], ParticleIndexTable, list[ParticleRecord]]:
    """Stable-sort particles by region id and build the offset index.

    Returns (sorted in-domain particles, index table, out-of-domain
    particles); relative order within a region matches the input order.
    """
    n = len(particles)
    if n == 0:
        zero = np.zeros(rg.region_count, dtype=np.int64)
        return [], ParticleIndexTable(zero.copy(), zero), []
    pos = np.array([p.pos for p in particles], dtype=np.float64).reshape(n, 3)
    ids, ok = regions_of_points(rg, axes, pos)
    out_of_domain = [p for p, good in zip(particles, ok) if not good]
    kept = [p for p, good in zip(particles, ok) if good]
    kept_ids = ids[ok]
    order = np.argsort(kept_ids, kind="stable")
    sorted_particles = [kept[i] for i in order]
    counts = np.bincount(kept_ids, minlength=rg.region_count).astype(np.int64)
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)
    return sorted_particles, ParticleIndexTable(offsets, counts), out_of_domain


def _passes_refine(record: ParticleRecord, refine: dict[int, tuple[float, float]]) -> bool:
    for var, (lo, hi) in refine.items():
        if not lo <= record.values[var] <= hi:
            return False
    return True


def records_to_csv(records: list[ParticleRecord], var_names: list[str]) -> str:
    """CSV rendering of particle records: id, position, tracked values."""
    lines = ["id,x,y,z," + ",".join(var_names)]
    for r in records:
        fields = [str(r.id)] + [repr(c) for c in r.pos] + [repr(v) for v in r.values]
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def extract(
    store,
    timestep: int,
    selection,
    refine: dict[int, tuple[float, float]] | None = None,
) -> list[ParticleRecord]:
    """Particles of the selected regions, optionally refined by value ranges.

    `store` is a particle-store reader exposing `region_count` and
    `read_region(timestep, region)`.  Only the byte ranges of the selected
    regions are read.  Refine ranges are closed on both ends, matching the
    condition semantics of the summarizer.
    """
    for region in selection:
        if not 0 <= region < store.region_count:
            raise UnknownRegion(f"region {region} outside [0, {store.region_count})")
    out: list[ParticleRecord] = []
    for region in sorted(selection):
        records = store.read_region(timestep, region)
        if refine:
            records = [r for r in records if _passes_refine(r, refine)]
        out.extend(records)
    return out
