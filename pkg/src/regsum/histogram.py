"""Histogram mathematics for regional PDFs.

Covers automatic bin selection (Sturges, Scott, Freedman-Diaconis, fixed),
sample accumulation, exact same-edge addition, mass queries, moments from
retained sums, and merging across heterogeneous bin edges.

Conventions that the rest of the toolkit depends on:

* Bins are uniform over [min, max]; bin i covers [min + i*w, min + (i+1)*w)
  with the last bin closed on the right.  The bin of an in-range sample is
  floor((x - min) / w), clamped to the last bin.
* Out-of-range and non-finite samples are counted in dedicated counters,
  never dropped silently.
* 2D counts are stored flat with axis 0 fastest: flat[i0 + nbins0 * i1].
* Variance is population variance (sum_sq/n - mean^2, clamped at 0).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    EdgesMismatch,
    EmptyHistogram,
    EmptyInput,
    EmptySearchWindow,
    EmptyStats,
    Incompatible,
    InvalidRange,
    MissingQuartiles,
)


class BinningKind(enum.Enum):
    STURGES = "sturges"
    SCOTT = "scott"
    FREEDMAN_DIACONIS = "fd"
    FIXED = "fixed"


@dataclass(frozen=True)
class BinningStrategy:
    """How to pick bin count/width from per-region statistics.

    For FIXED the bin count is `max_bins` itself, so one positive integer
    fully describes every strategy.
    """

    kind: BinningKind
    max_bins: int = 256

    def __post_init__(self):
        if self.max_bins < 1:
            raise ValueError("max_bins must be >= 1")

    @classmethod
    def fixed(cls, nbins: int) -> "BinningStrategy":
        return cls(BinningKind.FIXED, max_bins=nbins)


@dataclass(frozen=True)
class BinEdges:
    """Uniform bin layout: nbins bins spanning [min, max]."""

    min: float
    max: float
    nbins: int

    def __post_init__(self):
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise ValueError("edges must be finite")
        if not self.min < self.max:
            raise ValueError(f"need min < max, got [{self.min}, {self.max}]")
        if self.nbins < 1:
            raise ValueError("nbins must be >= 1")
        if not (self.width > 0 and math.isfinite(self.width)):
            raise ValueError("bin width must be positive and finite")

    @property
    def width(self) -> float:
        return (self.max - self.min) / self.nbins

    def boundaries(self) -> np.ndarray:
        """All nbins+1 bin boundaries, endpoints exact."""
        return np.linspace(self.min, self.max, self.nbins + 1)

    def centers(self) -> np.ndarray:
        b = self.boundaries()
        return 0.5 * (b[:-1] + b[1:])

    def bin_of(self, x: float) -> int | None:
        """Bin index of x, or None when x lies outside [min, max]."""
        if not self.min <= x <= self.max:
            return None
        i = int(math.floor((x - self.min) / self.width))
        return min(i, self.nbins - 1)

    def bins_of(self, x: np.ndarray) -> np.ndarray:
        """Vectorized bin_of for values already known to be in range."""
        i = np.floor((x - self.min) / self.width).astype(np.int64)
        return np.minimum(i, self.nbins - 1)


@dataclass
class VariableStats:
    """Count, range, and exact sums of a sample stream; optional quartiles.

    count == 0 means min/max/sum/sum_sq are absent (None).  Retained sums
    make means and variances exact in post processing, independent of the
    binning.
    """

    count: int = 0
    min: float | None = None
    max: float | None = None
    sum: float | None = None
    sum_sq: float | None = None
    q1: float | None = None
    q3: float | None = None

    @classmethod
    def from_samples(cls, samples: np.ndarray, with_quartiles: bool = False) -> "VariableStats":
        """Exact stats over a finite-sample array (caller filters non-finite)."""
        samples = np.asarray(samples, dtype=np.float64)
        if samples.size == 0:
            return cls()
        st = cls(
            count=int(samples.size),
            min=float(samples.min()),
            max=float(samples.max()),
            sum=float(np.sum(samples)),
            sum_sq=float(np.sum(samples * samples)),
        )
        if with_quartiles:
            st.q1 = float(np.quantile(samples, 0.25))
            st.q3 = float(np.quantile(samples, 0.75))
        return st

    def add(self, x: float) -> None:
        if self.count == 0:
            self.min = self.max = x
            self.sum = x
            self.sum_sq = x * x
        else:
            self.min = min(self.min, x)
            self.max = max(self.max, x)
            self.sum += x
            self.sum_sq += x * x
        self.count += 1

    def merged(self, other: "VariableStats") -> "VariableStats":
        """Exact union of two streams; quartiles are not combinable and drop."""
        if self.count == 0:
            return replace(other, q1=None, q3=None)
        if other.count == 0:
            return replace(self, q1=None, q3=None)
        return VariableStats(
            count=self.count + other.count,
            min=min(self.min, other.min),
            max=max(self.max, other.max),
            sum=self.sum + other.sum,
            sum_sq=self.sum_sq + other.sum_sq,
        )

    def mean(self) -> float:
        if self.count == 0:
            raise EmptyStats("no samples")
        return self.sum / self.count

    def variance(self) -> float:
        """Population variance from retained sums, clamped at 0."""
        m = self.mean()
        return max(0.0, self.sum_sq / self.count - m * m)

    def without_quartiles(self) -> "VariableStats":
        return replace(self, q1=None, q3=None)


def sturges_bin_count(n: int) -> int:
    return math.ceil(math.log2(n)) + 1 if n > 1 else 1


def scott_bin_width(std: float, n: int) -> float:
    return 3.49 * std / np.cbrt(float(n))


def freedman_diaconis_bin_width(iqr: float, n: int) -> float:
    return 2.0 * iqr / np.cbrt(float(n))


def edges_from_strategy(stats: VariableStats, strategy: BinningStrategy) -> BinEdges:
    """Derive uniform bin edges for one variable from its statistics.

    The range is always [stats.min, stats.max].  Width-based strategies use
    nbins = ceil(range / h); Sturges uses its count formula; everything is
    clamped to [1, max_bins].  A degenerate range (min == max) yields one
    bin over [min, min + eps].  A degenerate width (zero IQR) falls back to
    the Sturges count so the result stays usable.
    """
    if stats.count == 0:
        raise EmptyStats("cannot derive edges from zero samples")
    mn, mx, n = stats.min, stats.max, stats.count
    cap = strategy.max_bins
    if mn == mx:
        eps = max(abs(mn) * 1e-9, 1e-12)
        return BinEdges(mn, mn + eps, 1)
    if strategy.kind is BinningKind.FIXED:
        nbins = cap
    elif strategy.kind is BinningKind.STURGES:
        nbins = min(max(sturges_bin_count(n), 1), cap)
    else:
        if strategy.kind is BinningKind.SCOTT:
            h = scott_bin_width(math.sqrt(stats.variance()), n)
        else:
            if stats.q1 is None or stats.q3 is None:
                raise MissingQuartiles("Freedman-Diaconis needs retained quartiles")
            h = freedman_diaconis_bin_width(stats.q3 - stats.q1, n)
        if not (h > 0 and math.isfinite(h)):
            nbins = min(max(sturges_bin_count(n), 1), cap)
        else:
            nbins = min(max(math.ceil((mx - mn) / h), 1), cap)
    return BinEdges(mn, mx, nbins)


PLACEHOLDER_EDGES = BinEdges(0.0, 1.0, 1)


@dataclass(eq=False)
class RegionalHistogram:
    """1D or 2D binned counts for one region plus sample accounting.

    counts is a flat int64 array (axis 0 fastest in 2D).  sample_count is
    the number of in-range samples and always equals counts.sum(); adding
    out_of_range and invalid gives the number of samples offered.
    """

    var_ids: tuple[int, ...]
    edges: tuple[BinEdges, ...]
    counts: np.ndarray
    out_of_range: int = 0
    invalid: int = 0
    sample_count: int = 0
    stats: tuple[VariableStats, ...] = ()

    def __post_init__(self):
        if self.stats == ():
            self.stats = tuple(VariableStats() for _ in self.var_ids)

    @property
    def ndims(self) -> int:
        return len(self.var_ids)

    @classmethod
    def empty(cls, var_ids: tuple[int, ...], edges: tuple[BinEdges, ...]) -> "RegionalHistogram":
        if len(var_ids) not in (1, 2) or len(edges) != len(var_ids):
            raise ValueError("need 1 or 2 variables with matching edges")
        size = 1
        for e in edges:
            size *= e.nbins
        return cls(
            var_ids=tuple(var_ids),
            edges=tuple(edges),
            counts=np.zeros(size, dtype=np.int64),
            stats=tuple(VariableStats() for _ in var_ids),
        )

    def counts2d(self) -> np.ndarray:
        """2D view of the flat counts, indexed [i0, i1]."""
        n0 = self.edges[0].nbins
        n1 = self.edges[1].nbins
        return self.counts.reshape(n1, n0).T

    def accumulate(self, sample) -> None:
        """Classify one sample: bin it, or count it as out-of-range/invalid."""
        if isinstance(sample, (tuple, list, np.ndarray)):
            xs = [float(v) for v in sample]
        else:
            xs = [float(sample)]
        if len(xs) != self.ndims:
            raise ValueError(f"sample arity {len(xs)} != histogram ndims {self.ndims}")
        if not all(math.isfinite(x) for x in xs):
            self.invalid += 1
            return
        idx = []
        for x, e in zip(xs, self.edges):
            i = e.bin_of(x)
            if i is None:
                self.out_of_range += 1
                return
            idx.append(i)
        linear = idx[0] if self.ndims == 1 else idx[0] + self.edges[0].nbins * idx[1]
        self.counts[linear] += 1
        self.sample_count += 1
        for x, st in zip(xs, self.stats):
            st.add(x)

    def __eq__(self, other):
        if not isinstance(other, (RegionalHistogram, MergedPdf)):
            return NotImplemented
        return (
            type(self) is type(other)
            and self.var_ids == other.var_ids
            and self.edges == other.edges
            and np.array_equal(self.counts, other.counts)
            and self.out_of_range == other.out_of_range
            and self.invalid == other.invalid
            and self.sample_count == other.sample_count
            and self.stats == other.stats
        )


@dataclass(eq=False)
class MergedPdf(RegionalHistogram):
    """Result of merging histograms: counts become non-negative reals."""

    source_region_count: int = 0

    def __eq__(self, other):
        base = RegionalHistogram.__eq__(self, other)
        if base is NotImplemented or not base:
            return base
        return self.source_region_count == other.source_region_count


def add_same_edges(a: RegionalHistogram, b: RegionalHistogram) -> RegionalHistogram:
    """Exact element-wise sum of two histograms with identical layout."""
    if a.var_ids != b.var_ids or a.edges != b.edges:
        raise EdgesMismatch(f"cannot add {a.var_ids}/{a.edges} to {b.var_ids}/{b.edges}")
    return RegionalHistogram(
        var_ids=a.var_ids,
        edges=a.edges,
        counts=a.counts + b.counts,
        out_of_range=a.out_of_range + b.out_of_range,
        invalid=a.invalid + b.invalid,
        sample_count=a.sample_count + b.sample_count,
        stats=tuple(sa.merged(sb) for sa, sb in zip(a.stats, b.stats)),
    )


def marginal_counts(h: RegionalHistogram, axis: int) -> np.ndarray:
    """Counts collapsed onto one axis (identity for 1D)."""
    if axis >= h.ndims:
        raise ValueError(f"axis {axis} out of range for {h.ndims}D histogram")
    if h.ndims == 1:
        return h.counts
    return h.counts2d().sum(axis=1 - axis)


def mass_in_range(h: RegionalHistogram, axis: int, lo: float, hi: float) -> float:
    """Probability mass of [lo, hi] on one axis, prorating partial bins.

    A bin overlapping the range partially contributes count * overlap/width
    (uniform-within-bin assumption).  2D histograms are marginalized onto
    the axis first.
    """
    if lo > hi:
        raise InvalidRange(f"lo {lo} > hi {hi}")
    if h.sample_count == 0:
        raise EmptyHistogram("no sample mass")
    counts = marginal_counts(h, axis).astype(np.float64)
    b = h.edges[axis].boundaries()
    overlap = np.minimum(hi, b[1:]) - np.maximum(lo, b[:-1])
    np.clip(overlap, 0.0, None, out=overlap)
    frac = overlap / (b[1:] - b[:-1])
    return float(np.dot(counts, frac) / h.sample_count)


def moments(h: RegionalHistogram, axis: int = 0, mode: str = "exact") -> tuple[float, float]:
    """(mean, population variance) on one axis.

    "exact" uses the retained sums; "binned" uses bin midpoints weighted by
    the marginal counts.
    """
    if h.sample_count == 0:
        raise EmptyHistogram("no samples")
    if mode == "exact":
        st = h.stats[axis]
        return st.mean(), st.variance()
    if mode != "binned":
        raise ValueError(f"unknown mode {mode!r}")
    counts = marginal_counts(h, axis).astype(np.float64)
    centers = h.edges[axis].centers()
    n = counts.sum()
    mean = float(np.dot(counts, centers) / n)
    var = float(np.dot(counts, centers * centers) / n - mean * mean)
    return mean, max(0.0, var)


@dataclass(frozen=True)
class MaxBinResult:
    indices: tuple[int, ...]
    linear_index: int
    count: float
    bin_ranges: tuple[tuple[float, float], ...]


def max_bin(h: RegionalHistogram, ranges=None) -> MaxBinResult:
    """Bin with the highest count, optionally restricted per axis.

    `ranges` is an optional sequence with one optional (lo, hi) window per
    axis; only bins whose centers fall inside every given window compete.
    Ties break toward the lowest linear index.
    """
    if h.sample_count == 0:
        raise EmptyHistogram("no samples")
    shape = tuple(e.nbins for e in h.edges)
    mask = np.ones(int(np.prod(shape)), dtype=bool)
    if ranges is not None:
        for a, window in enumerate(ranges):
            if window is None:
                continue
            lo, hi = window
            if lo > hi:
                raise InvalidRange(f"axis {a}: lo {lo} > hi {hi}")
            centers = h.edges[a].centers()
            axis_ok = (centers >= lo) & (centers <= hi)
            if h.ndims == 1:
                mask &= axis_ok
            else:
                # flat layout is axis-0 fastest
                n0 = shape[0]
                flat_idx = np.arange(mask.size)
                axis_idx = flat_idx % n0 if a == 0 else flat_idx // n0
                mask &= axis_ok[axis_idx]
    if not mask.any():
        raise EmptySearchWindow("no bin center inside the requested ranges")
    masked = np.where(mask, h.counts, -1)
    linear = int(np.argmax(masked))
    if h.ndims == 1:
        indices = (linear,)
    else:
        indices = (linear % shape[0], linear // shape[0])
    bounds = [e.boundaries() for e in h.edges]
    bin_ranges = tuple(
        (float(bounds[a][i]), float(bounds[a][i + 1])) for a, i in enumerate(indices)
    )
    return MaxBinResult(indices, linear, float(h.counts[linear]), bin_ranges)


def _overlap_fractions(src: BinEdges, tgt: BinEdges) -> np.ndarray:
    """(src.nbins, tgt.nbins) matrix: fraction of each source bin's length
    overlapping each target bin."""
    sb = src.boundaries()
    tb = tgt.boundaries()
    lo = np.maximum(sb[:-1, None], tb[None, :-1])
    hi = np.minimum(sb[1:, None], tb[None, 1:])
    overlap = np.clip(hi - lo, 0.0, None)
    return overlap / (sb[1:] - sb[:-1])[:, None]


def merge_general(hs: list[RegionalHistogram]) -> MergedPdf:
    """Merge histograms whose bin ranges may differ.

    The target spans the union range per axis with the finest available
    granularity (max nbins over the inputs); each source bin's count is
    redistributed to target bins proportionally to interval overlap
    (product of per-axis overlaps in 2D).  Identical-edge inputs take the
    exact integer fast path.  Retained sums are added exactly, so exact
    moments of the result match the pooled samples.

    Inputs with zero sample mass contribute their counters and stats but
    not their (placeholder) edges to the target range.
    """
    if not hs:
        raise EmptyInput("nothing to merge")
    first = hs[0]
    for h in hs[1:]:
        if h.var_ids != first.var_ids or h.ndims != first.ndims:
            raise Incompatible(f"cannot merge {h.var_ids} with {first.var_ids}")

    live = [h for h in hs if h.sample_count > 0]
    distinct_edges = {h.edges for h in live}

    out_of_range = sum(h.out_of_range for h in hs)
    invalid = sum(h.invalid for h in hs)
    sample_count = sum(h.sample_count for h in hs)
    stats = tuple(VariableStats() for _ in first.var_ids)
    for h in hs:
        stats = tuple(s.merged(hs_) for s, hs_ in zip(stats, h.stats))

    if len(distinct_edges) <= 1:
        edges = next(iter(distinct_edges)) if distinct_edges else first.edges
        size = 1
        for e in edges:
            size *= e.nbins
        counts = np.zeros(size, dtype=np.float64)
        for h in live:
            counts += h.counts
        return MergedPdf(
            var_ids=first.var_ids,
            edges=edges,
            counts=counts,
            out_of_range=out_of_range,
            invalid=invalid,
            sample_count=sample_count,
            stats=stats,
            source_region_count=len(hs),
        )

    tgt_edges = tuple(
        BinEdges(
            min(h.edges[a].min for h in live),
            max(h.edges[a].max for h in live),
            max(h.edges[a].nbins for h in live),
        )
        for a in range(first.ndims)
    )
    if first.ndims == 1:
        counts = np.zeros(tgt_edges[0].nbins, dtype=np.float64)
        for h in live:
            counts += h.counts.astype(np.float64) @ _overlap_fractions(h.edges[0], tgt_edges[0])
    else:
        n0, n1 = tgt_edges[0].nbins, tgt_edges[1].nbins
        acc = np.zeros((n0, n1), dtype=np.float64)
        for h in live:
            o0 = _overlap_fractions(h.edges[0], tgt_edges[0])
            o1 = _overlap_fractions(h.edges[1], tgt_edges[1])
            acc += o0.T @ h.counts2d().astype(np.float64) @ o1
        counts = acc.T.reshape(-1)  # back to axis-0-fastest flat layout
    return MergedPdf(
        var_ids=first.var_ids,
        edges=tgt_edges,
        counts=counts,
        out_of_range=out_of_range,
        invalid=invalid,
        sample_count=sample_count,
        stats=stats,
        source_region_count=len(hs),
    )
