"""Post hoc query engine over a loaded PDF store.

Supports boolean predicate selection over regional PDFs, merging of
selections with exact aggregate statistics, per-timestep timeline
statistics, slice extraction with level-of-detail rebinning, and CSV/JSON
export of merged PDFs.

The engine precomputes timeline aggregates at load time and builds padded
per-(timestep, config) arrays lazily, so predicate evaluation and slice
assembly are vectorized over all regions instead of looping per region.
All query operations are pure reads over the immutable loaded store.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptySelection,
    IndexOutOfRange,
    UnknownConfig,
    UnknownTimestep,
    UnknownVariable,
)
from .histogram import (
    BinEdges,
    MergedPdf,
    RegionalHistogram,
    VariableStats,
    marginal_counts,
    merge_general,
    moments,
)
from .store import PdfStoreData

DEFAULT_MIN_MASS = 0.5


# ---------------------------------------------------------------------------
# Predicate AST

@dataclass(frozen=True)
class MassInRange:
    """Select regions whose probability mass inside [lo, hi] on `var`
    is at least min_mass."""

    var: str
    lo: float
    hi: float
    min_mass: float = DEFAULT_MIN_MASS

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"lo {self.lo} > hi {self.hi}")
        if not 0.0 <= self.min_mass <= 1.0:
            raise ValueError(f"min_mass {self.min_mass} outside [0, 1]")


@dataclass(frozen=True)
class MaxBinIn:
    """Select regions whose overall highest-frequency bin has its `var`
    center inside [lo, hi]."""

    var: str
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"lo {self.lo} > hi {self.hi}")


@dataclass(frozen=True)
class NonEmpty:
    pass


@dataclass(frozen=True)
class And:
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Or:
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Not:
    arg: object


Predicate = MassInRange | MaxBinIn | NonEmpty | And | Or | Not


def predicate_to_json(p: Predicate) -> dict:
    if isinstance(p, MassInRange):
        return {"op": "mass_in_range", "var": p.var, "lo": p.lo, "hi": p.hi, "min_mass": p.min_mass}
    if isinstance(p, MaxBinIn):
        return {"op": "max_bin_in", "var": p.var, "lo": p.lo, "hi": p.hi}
    if isinstance(p, NonEmpty):
        return {"op": "non_empty"}
    if isinstance(p, And):
        return {"op": "and", "args": [predicate_to_json(a) for a in p.args]}
    if isinstance(p, Or):
        return {"op": "or", "args": [predicate_to_json(a) for a in p.args]}
    if isinstance(p, Not):
        return {"op": "not", "arg": predicate_to_json(p.arg)}
    raise TypeError(f"not a predicate: {p!r}")


def predicate_from_json(obj) -> Predicate:
    if not isinstance(obj, dict) or "op" not in obj:
        raise ValueError(f"predicate must be an object with an 'op' field: {obj!r}")
    op = obj["op"]
    try:
        if op == "mass_in_range":
            return MassInRange(
                var=obj["var"],
                lo=float(obj["lo"]),
                hi=float(obj["hi"]),
                min_mass=float(obj.get("min_mass", DEFAULT_MIN_MASS)),
            )
        if op == "max_bin_in":
            return MaxBinIn(var=obj["var"], lo=float(obj["lo"]), hi=float(obj["hi"]))
        if op == "non_empty":
            return NonEmpty()
        if op == "and":
            return And(tuple(predicate_from_json(a) for a in obj["args"]))
        if op == "or":
            return Or(tuple(predicate_from_json(a) for a in obj["args"]))
        if op == "not":
            return Not(predicate_from_json(obj["arg"]))
    except KeyError as exc:
        raise ValueError(f"predicate {op!r} is missing field {exc}") from None
    raise ValueError(f"unknown predicate op {op!r}")


@dataclass(frozen=True)
class Selection:
    """Region ids (ascending) selected at one timestep under one config."""

    timestep: int
    config: int
    regions: tuple[int, ...]


# ---------------------------------------------------------------------------
# Slice views

@dataclass
class Thumbnail:
    region: int
    nbins: tuple[int, ...]
    counts: np.ndarray
    sample_count: int
    edges: tuple[BinEdges, ...]


@dataclass
class SliceView:
    axis: int
    index: int
    lod: int
    horizontal_axis: int
    vertical_axis: int
    shape: tuple[int, int]  # (rows, cols) = (vertical, horizontal)
    thumbnails: list[list[Thumbnail]]


_IN_PLANE = {0: (1, 2), 1: (0, 2), 2: (0, 1)}  # slice axis -> (horizontal, vertical)


def _rebin_1d(counts: np.ndarray, k: int) -> np.ndarray:
    if k <= 1:
        return counts.copy()
    return np.add.reduceat(counts, np.arange(0, counts.size, k))


def rebin_histogram_counts(h: RegionalHistogram, lod: int) -> tuple[np.ndarray, tuple[int, ...]]:
    """Sum groups of `lod` adjacent bins per axis; mass is conserved exactly.

    Returns (flat counts in axis-0-fastest order, rebinned bin counts).
    """
    if h.ndims == 1:
        out = _rebin_1d(h.counts, lod)
        return out, (out.size,)
    c = h.counts2d()
    if lod > 1:
        c = np.add.reduceat(c, np.arange(0, c.shape[0], lod), axis=0)
        c = np.add.reduceat(c, np.arange(0, c.shape[1], lod), axis=1)
    return c.T.reshape(-1), (c.shape[0], c.shape[1])


# ---------------------------------------------------------------------------
# Vectorized per-(timestep, config) arrays

@dataclass
class _AxisArrays:
    edges_lo: np.ndarray  # (R, maxb)
    edges_hi: np.ndarray  # (R, maxb)
    widths: np.ndarray    # (R, maxb), 1.0 in padding
    counts: np.ndarray    # (R, maxb) marginal counts, 0 in padding
    mins: np.ndarray      # (R,)
    bin_widths: np.ndarray  # (R,) uniform width per region
    nbins: np.ndarray     # (R,)


@dataclass
class _ConfigArrays:
    sample_counts: np.ndarray           # (R,)
    axes: list[_AxisArrays]
    flat_counts: np.ndarray             # (R, max total bins), -1 in padding
    n0: np.ndarray                      # (R,) fastest-axis bin count


class QueryEngine:
    """Read-only query interface over one loaded PDF store."""

    def __init__(self, store: PdfStoreData):
        self.store = store
        self.grid = store.grid
        self._config_arrays: dict[tuple[int, int], _ConfigArrays] = {}
        self._timeline: dict[int, list[tuple[float, float | None, int]]] = {}
        self._build_timeline()

    # -- lookups ------------------------------------------------------------

    def _check_timestep(self, t: int):
        if not 0 <= t < len(self.store.summaries):
            raise UnknownTimestep(f"timestep {t} outside [0, {len(self.store.summaries)})")

    def _check_config(self, c: int):
        if not 0 <= c < len(self.store.configs):
            raise UnknownConfig(f"config {c} outside [0, {len(self.store.configs)})")

    def variable_name(self, var_id: int) -> str:
        return self.store.variables[var_id][0]

    def config_axis_of(self, config: int, var: str) -> int:
        """Axis index of a variable name within a config, or UnknownVariable."""
        self._check_config(config)
        for axis, var_id in enumerate(self.store.configs[config].var_ids):
            if self.variable_name(var_id) == var:
                return axis
        raise UnknownVariable(f"variable {var!r} not on the axes of config {config}")

    def histogram(self, t: int, config: int, region: int) -> RegionalHistogram:
        self._check_timestep(t)
        self._check_config(config)
        summary = self.store.summaries[t]
        if region not in summary.histograms:
            raise IndexOutOfRange(f"region {region} outside the decomposition")
        return summary.histograms[region][config]

    # -- caches ---------------------------------------------------------------

    def _arrays(self, t: int, config: int) -> _ConfigArrays:
        key = (t, config)
        cached = self._config_arrays.get(key)
        if cached is not None:
            return cached
        self._check_timestep(t)
        self._check_config(config)
        summary = self.store.summaries[t]
        regions = range(self.grid.region_count)
        hists = [summary.histograms[r][config] for r in regions]
        ndims = self.store.configs[config].ndims
        nreg = len(hists)

        sample_counts = np.array([h.sample_count for h in hists], dtype=np.int64)
        axes = []
        for a in range(ndims):
            nbins = np.array([h.edges[a].nbins for h in hists], dtype=np.int64)
            mins = np.array([h.edges[a].min for h in hists])
            maxs = np.array([h.edges[a].max for h in hists])
            widths = (maxs - mins) / nbins
            maxb = int(nbins.max())
            steps = np.arange(maxb + 1)
            bounds = mins[:, None] + steps[None, :] * widths[:, None]
            # last real boundary is exactly the max, as linspace would give
            bounds[np.arange(nreg), nbins] = maxs
            edges_lo = bounds[:, :-1].copy()
            edges_hi = bounds[:, 1:].copy()
            valid = steps[None, :-1] < nbins[:, None]
            counts = np.zeros((nreg, maxb))
            for i, h in enumerate(hists):
                counts[i, : nbins[i]] = marginal_counts(h, a)
            bin_w = np.where(valid, edges_hi - edges_lo, 1.0)
            axes.append(
                _AxisArrays(
                    edges_lo=edges_lo,
                    edges_hi=edges_hi,
                    widths=bin_w,
                    counts=counts,
                    mins=mins,
                    bin_widths=widths,
                    nbins=nbins,
                )
            )

        sizes = np.array([h.counts.size for h in hists], dtype=np.int64)
        flat = np.full((nreg, int(sizes.max())), -1.0)
        for i, h in enumerate(hists):
            flat[i, : sizes[i]] = h.counts
        n0 = np.array([h.edges[0].nbins for h in hists], dtype=np.int64)
        arrays = _ConfigArrays(sample_counts=sample_counts, axes=axes, flat_counts=flat, n0=n0)
        self._config_arrays[key] = arrays
        return arrays

    def _build_timeline(self):
        """Per (config, axis): per-timestep pooled count and sum."""
        self._timeline = {}
        for c, cfg in enumerate(self.store.configs):
            for a, var_id in enumerate(cfg.var_ids):
                if var_id in self._timeline:
                    continue
                points = []
                for summary in self.store.summaries:
                    count = 0
                    total = 0.0
                    for hists in summary.histograms.values():
                        st = hists[c].stats[a]
                        if st.count:
                            count += st.count
                            total += st.sum
                    points.append((summary.time, total / count if count else None, count))
                self._timeline[var_id] = points

    # -- operations ---------------------------------------------------------

    def evaluate(self, timestep: int, config: int, predicate: Predicate) -> Selection:
        self._check_timestep(timestep)
        self._check_config(config)
        mask = self._eval(predicate, timestep, config)
        return Selection(
            timestep=timestep,
            config=config,
            regions=tuple(int(r) for r in np.flatnonzero(mask)),
        )

    def _eval(self, p: Predicate, t: int, c: int) -> np.ndarray:
        if isinstance(p, NonEmpty):
            return self._arrays(t, c).sample_counts > 0
        if isinstance(p, And):
            mask = np.ones(self.grid.region_count, dtype=bool)
            for a in p.args:
                mask &= self._eval(a, t, c)
            return mask
        if isinstance(p, Or):
            mask = np.zeros(self.grid.region_count, dtype=bool)
            for a in p.args:
                mask |= self._eval(a, t, c)
            return mask
        if isinstance(p, Not):
            return ~self._eval(p.arg, t, c)
        if isinstance(p, MassInRange):
            axis = self.config_axis_of(c, p.var)
            arrays = self._arrays(t, c)
            ax = arrays.axes[axis]
            overlap = np.minimum(p.hi, ax.edges_hi) - np.maximum(p.lo, ax.edges_lo)
            np.clip(overlap, 0.0, None, out=overlap)
            mass = (ax.counts * (overlap / ax.widths)).sum(axis=1)
            live = arrays.sample_counts > 0
            out = np.zeros(self.grid.region_count, dtype=bool)
            out[live] = mass[live] / arrays.sample_counts[live] >= p.min_mass
            return out
        if isinstance(p, MaxBinIn):
            axis = self.config_axis_of(c, p.var)
            arrays = self._arrays(t, c)
            flat = np.argmax(arrays.flat_counts, axis=1)
            axis_idx = flat % arrays.n0 if axis == 0 else flat // arrays.n0
            ax = arrays.axes[axis]
            centers = ax.mins + (axis_idx + 0.5) * ax.bin_widths
            return (arrays.sample_counts > 0) & (centers >= p.lo) & (centers <= p.hi)
        raise TypeError(f"not a predicate: {p!r}")

    def merge_selection(self, sel: Selection) -> tuple[MergedPdf, dict]:
        """Merge the selected histograms; aggregate stats come from the
        exactly-summed retained sums."""
        if not sel.regions:
            raise EmptySelection("no regions selected")
        self._check_timestep(sel.timestep)
        self._check_config(sel.config)
        summary = self.store.summaries[sel.timestep]
        for r in sel.regions:
            if r not in summary.histograms:
                raise IndexOutOfRange(f"region {r} outside the decomposition")
        hists = [summary.histograms[r][sel.config] for r in sorted(sel.regions)]
        merged = merge_general(hists)
        stats = {
            "sample_count": merged.sample_count,
            "source_region_count": merged.source_region_count,
            "axes": [],
        }
        for a, var_id in enumerate(self.store.configs[sel.config].var_ids):
            entry = {"var": self.variable_name(var_id)}
            if merged.sample_count > 0:
                mean, variance = moments(merged, a, "exact")
                entry["mean"] = mean
                entry["variance"] = variance
            else:
                entry["mean"] = None
                entry["variance"] = None
            stats["axes"].append(entry)
        return merged, stats

    def timeline(self, var: str) -> list[dict]:
        """Per-timestep pooled mean and sample count of a variable."""
        for var_id, (name, _) in enumerate(self.store.variables):
            if name == var:
                if var_id not in self._timeline:
                    raise UnknownVariable(f"variable {var!r} is not tracked by any config axis")
                return [
                    {"timestep": t, "time": time, "mean": mean, "count": count}
                    for t, (time, mean, count) in enumerate(self._timeline[var_id])
                ]
        raise UnknownVariable(f"unknown variable {var!r}")

    def slice(self, timestep: int, config: int, axis: int, index: int, lod: int = 1) -> SliceView:
        """Thumbnails of one region plane, rebinned by the LOD factor."""
        self._check_timestep(timestep)
        self._check_config(config)
        if axis not in (0, 1, 2):
            raise IndexOutOfRange(f"axis {axis} must be 0, 1, or 2")
        if not 0 <= index < self.grid.region_counts[axis]:
            raise IndexOutOfRange(
                f"slice index {index} outside [0, {self.grid.region_counts[axis]})"
            )
        if lod < 1:
            raise ValueError("lod must be >= 1")
        h_axis, v_axis = _IN_PLANE[axis]
        summary = self.store.summaries[timestep]
        rows = []
        for v in range(self.grid.region_counts[v_axis]):
            row = []
            for hpos in range(self.grid.region_counts[h_axis]):
                region_idx = [0, 0, 0]
                region_idx[axis] = index
                region_idx[h_axis] = hpos
                region_idx[v_axis] = v
                region = self.grid.linearize(*region_idx)
                hist = summary.histograms[region][config]
                counts, nbins = rebin_histogram_counts(hist, lod)
                row.append(
                    Thumbnail(
                        region=region,
                        nbins=nbins,
                        counts=counts,
                        sample_count=hist.sample_count,
                        edges=hist.edges,
                    )
                )
            rows.append(row)
        return SliceView(
            axis=axis,
            index=index,
            lod=lod,
            horizontal_axis=h_axis,
            vertical_axis=v_axis,
            shape=(self.grid.region_counts[v_axis], self.grid.region_counts[h_axis]),
            thumbnails=rows,
        )


# ---------------------------------------------------------------------------
# Export

def _fmt(x) -> str:
    return repr(float(x))


def export_merged_csv(m: MergedPdf) -> str:
    """CSV rows of the merged PDF; probabilities sum to 1 (float sum)."""
    total = float(m.counts.sum())
    out = io.StringIO()
    if m.ndims == 1:
        out.write("bin_lo,bin_hi,count,probability\n")
        b = m.edges[0].boundaries()
        for i, count in enumerate(m.counts):
            prob = count / total if total else 0.0
            out.write(f"{_fmt(b[i])},{_fmt(b[i + 1])},{_fmt(count)},{_fmt(prob)}\n")
    else:
        out.write("bin0_lo,bin0_hi,bin1_lo,bin1_hi,count,probability\n")
        b0 = m.edges[0].boundaries()
        b1 = m.edges[1].boundaries()
        n0 = m.edges[0].nbins
        for flat, count in enumerate(m.counts):
            i0, i1 = flat % n0, flat // n0
            prob = count / total if total else 0.0
            out.write(
                f"{_fmt(b0[i0])},{_fmt(b0[i0 + 1])},{_fmt(b1[i1])},{_fmt(b1[i1 + 1])},"
                f"{_fmt(count)},{_fmt(prob)}\n"
            )
    return out.getvalue()


def _stats_to_json(st: VariableStats) -> dict:
    return {
        "count": st.count,
        "min": st.min,
        "max": st.max,
        "sum": st.sum,
        "sum_sq": st.sum_sq,
    }


def _stats_from_json(obj: dict) -> VariableStats:
    if obj["count"] == 0:
        return VariableStats()
    return VariableStats(
        count=int(obj["count"]),
        min=obj["min"],
        max=obj["max"],
        sum=obj["sum"],
        sum_sq=obj["sum_sq"],
    )


def merged_to_json(m: MergedPdf) -> dict:
    return {
        "ndims": m.ndims,
        "var_ids": list(m.var_ids),
        "edges": [{"min": e.min, "max": e.max, "nbins": e.nbins} for e in m.edges],
        "counts": m.counts.tolist(),
        "out_of_range": m.out_of_range,
        "invalid": m.invalid,
        "sample_count": m.sample_count,
        "source_region_count": m.source_region_count,
        "stats": [_stats_to_json(st) for st in m.stats],
    }


def merged_from_json(obj: dict) -> MergedPdf:
    return MergedPdf(
        var_ids=tuple(obj["var_ids"]),
        edges=tuple(BinEdges(e["min"], e["max"], e["nbins"]) for e in obj["edges"]),
        counts=np.array(obj["counts"], dtype=np.float64),
        out_of_range=int(obj["out_of_range"]),
        invalid=int(obj["invalid"]),
        sample_count=int(obj["sample_count"]),
        stats=tuple(_stats_from_json(s) for s in obj["stats"]),
        source_region_count=int(obj["source_region_count"]),
    )


def export_merged(m: MergedPdf, format: str = "csv") -> bytes:
    if format == "csv":
        return export_merged_csv(m).encode("utf-8")
    if format == "json":
        return json.dumps(merged_to_json(m)).encode("utf-8")
    raise ValueError(f"unknown export format {format!r}")


def histogram_to_json(h: RegionalHistogram, region: int | None = None) -> dict:
    obj = {
        "ndims": h.ndims,
        "var_ids": list(h.var_ids),
        "edges": [{"min": e.min, "max": e.max, "nbins": e.nbins} for e in h.edges],
        "counts": h.counts.tolist(),
        "out_of_range": h.out_of_range,
        "invalid": h.invalid,
        "sample_count": h.sample_count,
        "stats": [_stats_to_json(st) for st in h.stats],
    }
    if region is not None:
        obj["region"] = region
    return obj
