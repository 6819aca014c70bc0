"""Streaming per-region PDF computation over field blocks.

Each timestep is reduced in two passes per region and variable: pass A
computes the admitted samples' statistics (and exact quartiles when the
strategy needs them), pass B derives edges from those statistics and bins
the samples.  Edges therefore always come from the region's own data for
the current timestep; a single global configuration cannot capture
distributions that vary across the volume and across time.

Blocks must align with region boundaries (each region wholly inside one
block) and tile the grid exactly.  That keeps block-parallel execution
exact: partial summaries combine by region-wise union, and a region's
samples are identical no matter which tiling produced them, so results are
independent of the block decomposition and of worker scheduling.  Counts
combine exactly (integers); retained sums of fragments that share a region
are added in fragment order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BlockMisaligned,
    EdgesMismatch,
    IncompleteTiling,
    UnknownVariable,
)
from .grid import RegionGrid
from .histogram import (
    PLACEHOLDER_EDGES,
    BinningKind,
    BinningStrategy,
    RegionalHistogram,
    VariableStats,
    add_same_edges,
    edges_from_strategy,
)


@dataclass(frozen=True)
class PdfConfig:
    """One PDF to compute per region: variables, binning, optional condition.

    The condition admits only cells whose `condition[0]` variable lies in
    the closed interval [condition[1], condition[2]].
    """

    var_ids: tuple[int, ...]
    strategy: BinningStrategy
    condition: tuple[int, float, float] | None = None

    def __post_init__(self):
        if len(self.var_ids) not in (1, 2):
            raise ValueError("PdfConfig needs 1 or 2 variables")
        if len(self.var_ids) == 2 and self.var_ids[0] == self.var_ids[1]:
            raise ValueError("2D PdfConfig variables must be distinct")
        if self.condition is not None and self.condition[1] > self.condition[2]:
            raise ValueError("condition lo must be <= hi")

    @property
    def ndims(self) -> int:
        return len(self.var_ids)


@dataclass
class FieldBlock:
    """A dense chunk of the volume: per-axis extents plus per-variable values.

    Values are flat in x-fastest order over the extent box.
    """

    extents: tuple[tuple[int, int], tuple[int, int], tuple[int, int]]
    values: dict[int, np.ndarray]

    def __post_init__(self):
        vol = 1
        for lo, hi in self.extents:
            if lo < 0 or hi <= lo:
                raise ValueError(f"bad extent {self.extents}")
            vol *= hi - lo
        for var, arr in self.values.items():
            if arr.size != vol:
                raise ValueError(f"variable {var}: {arr.size} values for extent volume {vol}")

    def region_values(self, var: int, box) -> np.ndarray:
        """Samples of one variable inside a region box, x-fastest order."""
        (bx0, bx1), (by0, by1), (bz0, bz1) = self.extents
        (x0, x1), (y0, y1), (z0, z1) = box
        arr = self.values[var].reshape(bz1 - bz0, by1 - by0, bx1 - bx0)
        sub = arr[z0 - bz0 : z1 - bz0, y0 - by0 : y1 - by0, x0 - bx0 : x1 - bx0]
        return sub.reshape(-1)


@dataclass
class TimestepSummary:
    """Per (region, config) histograms for one simulation time."""

    time: float
    histograms: dict[int, list[RegionalHistogram]] = field(default_factory=dict)

    def regions(self) -> list[int]:
        return sorted(self.histograms)

    def histogram(self, region: int, config_index: int) -> RegionalHistogram:
        return self.histograms[region][config_index]

    def __eq__(self, other):
        if not isinstance(other, TimestepSummary):
            return NotImplemented
        return self.time == other.time and self.histograms == other.histograms


def _regions_in_block(rg: RegionGrid, block: FieldBlock) -> list[int]:
    """Region ids wholly covered by a block; BlockMisaligned otherwise."""
    axis_ranges = []
    for a in range(3):
        lo, hi = block.extents[a]
        ext = rg.region_extents[a]
        los = [e[0] for e in ext]
        his = [e[1] for e in ext]
        if lo not in los or hi not in his:
            raise BlockMisaligned(
                f"block extent {block.extents[a]} on axis {a} does not align with regions"
            )
        axis_ranges.append(range(los.index(lo), his.index(hi) + 1))
    ids = []
    for iz in axis_ranges[2]:
        for iy in axis_ranges[1]:
            for ix in axis_ranges[0]:
                ids.append(rg.linearize(ix, iy, iz))
    return ids


def _needed_vars(configs: list[PdfConfig]) -> set[int]:
    need = set()
    for cfg in configs:
        need.update(cfg.var_ids)
        if cfg.condition is not None:
            need.add(cfg.condition[0])
    return need


def _region_histogram(cfg: PdfConfig, axis_values: list[np.ndarray], cond_values) -> RegionalHistogram:
    if cond_values is not None:
        _, lo, hi = cfg.condition
        admit = (cond_values >= lo) & (cond_values <= hi)
        axis_values = [v[admit] for v in axis_values]
    finite = np.isfinite(axis_values[0])
    for v in axis_values[1:]:
        finite &= np.isfinite(v)
    offered = axis_values[0].size
    samples = [v[finite] for v in axis_values]
    n = samples[0].size

    if n == 0:
        h = RegionalHistogram.empty(cfg.var_ids, tuple(PLACEHOLDER_EDGES for _ in cfg.var_ids))
        h.invalid = offered
        return h

    want_q = cfg.strategy.kind is BinningKind.FREEDMAN_DIACONIS
    stats = [VariableStats.from_samples(s, with_quartiles=want_q) for s in samples]
    edges = tuple(edges_from_strategy(st, cfg.strategy) for st in stats)

    idx = edges[0].bins_of(samples[0])
    size = edges[0].nbins
    if cfg.ndims == 2:
        idx = idx + edges[0].nbins * edges[1].bins_of(samples[1])
        size *= edges[1].nbins
    counts = np.bincount(idx, minlength=size).astype(np.int64)
    return RegionalHistogram(
        var_ids=cfg.var_ids,
        edges=edges,
        counts=counts,
        out_of_range=0,
        invalid=offered - n,
        sample_count=n,
        stats=tuple(st.without_quartiles() for st in stats),
    )


def _summarize_block(block: FieldBlock, rg: RegionGrid, configs: list[PdfConfig], time: float) -> TimestepSummary:
    part = TimestepSummary(time=time)
    for region in _regions_in_block(rg, block):
        box = rg.region_box(region)
        per_config = []
        for cfg in configs:
            axis_values = [block.region_values(v, box) for v in cfg.var_ids]
            cond_values = (
                block.region_values(cfg.condition[0], box) if cfg.condition is not None else None
            )
            per_config.append(_region_histogram(cfg, axis_values, cond_values))
        part.histograms[region] = per_config
    return part


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit argument, else REGSUM_THREADS (0 = auto), else 1."""
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("REGSUM_THREADS")
    if env is None:
        return 1
    n = int(env)
    return os.cpu_count() or 1 if n == 0 else max(1, n)


def summarize_timestep(
    blocks,
    rg: RegionGrid,
    configs: list[PdfConfig],
    time: float = 0.0,
    workers: int | None = None,
) -> TimestepSummary:
    """Reduce one timestep of field blocks to per-region histograms.

    Blocks must tile the grid exactly with every region wholly inside one
    block.  Results are bin-for-bin independent of the tiling and of the
    worker count.
    """
    blocks = list(blocks)
    need = _needed_vars(configs)
    for block in blocks:
        missing = need - set(block.values)
        if missing:
            raise UnknownVariable(f"block is missing variables {sorted(missing)}")

    seen: dict[int, int] = {}
    total_vol = 0
    for i, block in enumerate(blocks):
        vol = 1
        for lo, hi in block.extents:
            vol *= hi - lo
        total_vol += vol
        for region in _regions_in_block(rg, block):
            if region in seen:
                raise IncompleteTiling(f"region {region} covered by blocks {seen[region]} and {i}")
            seen[region] = i
    if len(seen) != rg.region_count or total_vol != rg.dims[0] * rg.dims[1] * rg.dims[2]:
        raise IncompleteTiling(
            f"blocks cover {len(seen)}/{rg.region_count} regions, volume {total_vol}"
        )

    n_workers = resolve_workers(workers)
    if n_workers <= 1 or len(blocks) <= 1:
        parts = [_summarize_block(b, rg, configs, time) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(lambda b: _summarize_block(b, rg, configs, time), blocks))
    return merge_partials(parts)


def merge_partials(parts: list[TimestepSummary]) -> TimestepSummary:
    """Region-wise union of partial summaries.

    Fragments covering the same region must have identical edges per config
    and are combined exactly; counts are independent of fragment order.
    """
    if not parts:
        return TimestepSummary(time=0.0)
    out = TimestepSummary(time=parts[0].time)
    for part in parts:
        if part.time != out.time:
            raise ValueError(f"fragment times differ: {part.time} vs {out.time}")
        for region, hists in part.histograms.items():
            if region not in out.histograms:
                out.histograms[region] = list(hists)
            else:
                mine = out.histograms[region]
                if len(mine) != len(hists):
                    raise EdgesMismatch(f"region {region}: fragment config counts differ")
                out.histograms[region] = [add_same_edges(a, b) for a, b in zip(mine, hists)]
    return out
