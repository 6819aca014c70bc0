"""Rectilinear grid, region decomposition, and region addressing.

A grid of `dims` points per axis is split into `region_counts` contiguous
index ranges per axis (balanced ragged split: when the point count does not
divide evenly, the first `dims % counts` extents are one point longer).
Region ids linearize x-fastest:

    id = ix + Rx * (iy + Ry * iz)

Both the PDF store and the particle index depend on this linearization, so
it is part of the on-disk contract.  Points exactly on an interior region
boundary belong to the higher-index region; the domain max corner belongs
to the last region.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDecomposition, OutOfBounds

# A region id is a plain non-negative int in [0, Rx*Ry*Rz).
RegionId = int

AXIS_NAMES = ("x", "y", "z")


@dataclass(frozen=True)
class RectilinearAxes:
    """Per-axis grid-point coordinates (strictly increasing, length >= 2)."""

    coords_x: np.ndarray
    coords_y: np.ndarray
    coords_z: np.ndarray

    def __post_init__(self):
        for name, c in zip(AXIS_NAMES, self.coords):
            arr = np.asarray(c, dtype=np.float64)
            if arr.ndim != 1 or arr.size < 2:
                raise ValueError(f"axis {name}: need >= 2 coordinates")
            if not np.all(np.diff(arr) > 0):
                raise ValueError(f"axis {name}: coordinates must be strictly increasing")
            object.__setattr__(self, f"coords_{name}", arr)

    @property
    def coords(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.coords_x, self.coords_y, self.coords_z)

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.coords_x.size, self.coords_y.size, self.coords_z.size)

    def __eq__(self, other):
        if not isinstance(other, RectilinearAxes):
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in zip(self.coords, other.coords))


@dataclass(frozen=True)
class RegionGrid:
    """Grid dimensions plus the per-axis partition into region extents.

    `region_extents[a]` is a tuple of half-open point-index ranges (lo, hi)
    that are contiguous, disjoint, and cover [0, dims[a]) exactly.
    """

    dims: tuple[int, int, int]
    region_counts: tuple[int, int, int]
    region_extents: tuple[tuple[tuple[int, int], ...], ...]
    # per axis, the lo bound of every extent, for binary search
    _extent_los: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self,
            "_extent_los",
            tuple(tuple(lo for lo, _ in ext) for ext in self.region_extents),
        )

    @property
    def region_count(self) -> int:
        rx, ry, rz = self.region_counts
        return rx * ry * rz

    def linearize(self, ix: int, iy: int, iz: int) -> RegionId:
        rx, ry, _ = self.region_counts
        return ix + rx * (iy + ry * iz)

    def delinearize(self, region: RegionId) -> tuple[int, int, int]:
        rx, ry, rz = self.region_counts
        if not 0 <= region < rx * ry * rz:
            raise OutOfBounds(f"region id {region} outside [0, {rx * ry * rz})")
        ix = region % rx
        iy = (region // rx) % ry
        iz = region // (rx * ry)
        return (ix, iy, iz)

    def region_box(self, region: RegionId) -> tuple[tuple[int, int], ...]:
        """Half-open (lo, hi) point-index range per axis for a region."""
        idx = self.delinearize(region)
        return tuple(self.region_extents[a][idx[a]] for a in range(3))


def build_decomposition(
    dims: tuple[int, int, int], region_counts: tuple[int, int, int]
) -> RegionGrid:
    """Split `dims` grid points into `region_counts` regions per axis.

    Balanced ragged split: extents on one axis differ in length by at most
    one, with the longer extents first.

    Raises InvalidDecomposition if any count exceeds the axis dims or any
    input is zero.
    """
    dims = tuple(int(d) for d in dims)
    region_counts = tuple(int(r) for r in region_counts)
    if len(dims) != 3 or len(region_counts) != 3:
        raise InvalidDecomposition("dims and region_counts must have 3 axes")
    extents = []
    for a in range(3):
        d, r = dims[a], region_counts[a]
        if d <= 0 or r <= 0:
            raise InvalidDecomposition(f"axis {AXIS_NAMES[a]}: dims and counts must be positive")
        if r > d:
            raise InvalidDecomposition(
                f"axis {AXIS_NAMES[a]}: {r} regions cannot cover {d} points"
            )
        base, rem = divmod(d, r)
        axis_extents = []
        lo = 0
        for i in range(r):
            hi = lo + base + (1 if i < rem else 0)
            axis_extents.append((lo, hi))
            lo = hi
        extents.append(tuple(axis_extents))
    return RegionGrid(dims, region_counts, tuple(extents))


def region_index_of_cell_axis(rg: RegionGrid, axis: int, cell: int) -> int:
    """Region index along one axis for a point index (no bounds check)."""
    return bisect.bisect_right(rg._extent_los[axis], cell) - 1


def region_of_cell(rg: RegionGrid, cell: tuple[int, int, int]) -> RegionId:
    """Region containing a grid-point index triple."""
    idx = []
    for a in range(3):
        c = int(cell[a])
        if not 0 <= c < rg.dims[a]:
            raise OutOfBounds(f"cell {cell} outside dims {rg.dims}")
        idx.append(region_index_of_cell_axis(rg, a, c))
    return rg.linearize(*idx)


def _cell_of_coord(coords: np.ndarray, x: float) -> int | None:
    """Point index whose interval [coords[i], coords[i+1]) contains x.

    The last interval is closed on the right; returns None outside the
    domain.
    """
    if not (coords[0] <= x <= coords[-1]):
        return None
    i = bisect.bisect_right(coords, x) - 1
    # x == coords[-1] lands one past the last interval; fold it back
    return min(i, coords.size - 2)


def region_of_point(
    rg: RegionGrid, axes: RectilinearAxes, p: tuple[float, float, float]
) -> RegionId | None:
    """Region containing a free point, or None when outside the domain.

    Each axis is binary-searched for the containing coordinate interval;
    the interval's lower point index is mapped through the cell lookup, so
    points on interior boundaries go to the higher-index region.
    """
    if axes.dims != rg.dims:
        raise ValueError(f"axes dims {axes.dims} inconsistent with grid dims {rg.dims}")
    cell = []
    for a in range(3):
        c = _cell_of_coord(axes.coords[a], float(p[a]))
        if c is None:
            return None
        cell.append(c)
    return region_of_cell(rg, tuple(cell))


def regions_of_points(
    rg: RegionGrid, axes: RectilinearAxes, pts: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized region_of_point over an (N, 3) position array.

    Returns (region_ids int64 array, in_domain bool array); region ids of
    out-of-domain points are undefined.
    """
    if axes.dims != rg.dims:
        raise ValueError(f"axes dims {axes.dims} inconsistent with grid dims {rg.dims}")
    pts = np.asarray(pts, dtype=np.float64)
    n = pts.shape[0]
    in_domain = np.ones(n, dtype=bool)
    axis_region = np.zeros((3, n), dtype=np.int64)
    for a in range(3):
        coords = axes.coords[a]
        x = pts[:, a]
        in_domain &= (x >= coords[0]) & (x <= coords[-1])
        cell = np.searchsorted(coords, x, side="right") - 1
        np.clip(cell, 0, coords.size - 2, out=cell)
        los = np.asarray(rg._extent_los[a], dtype=np.int64)
        axis_region[a] = np.searchsorted(los, cell, side="right") - 1
    rx, ry, _ = rg.region_counts
    ids = axis_region[0] + rx * (axis_region[1] + ry * axis_region[2])
    return ids, in_domain
