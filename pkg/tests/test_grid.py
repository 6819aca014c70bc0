import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regsum.errors import InvalidDecomposition, OutOfBounds
from regsum.grid import (
    RectilinearAxes,
    build_decomposition,
    region_of_cell,
    region_of_point,
    regions_of_points,
)


def unit_axes(dims):
    return RectilinearAxes(*(np.arange(d, dtype=float) for d in dims))


class TestBuildDecomposition:
    def test_even_split(self):
        rg = build_decomposition((4, 4, 4), (2, 2, 2))
        assert rg.region_count == 8
        for ext in rg.region_extents:
            assert ext == ((0, 2), (2, 4))

    def test_balanced_ragged_split(self):
        rg = build_decomposition((5, 4, 4), (2, 2, 2))
        assert rg.region_extents[0] == ((0, 3), (3, 5))

    def test_too_many_regions(self):
        with pytest.raises(InvalidDecomposition):
            build_decomposition((4, 4, 4), (5, 1, 1))

    def test_zero_inputs(self):
        with pytest.raises(InvalidDecomposition):
            build_decomposition((0, 4, 4), (1, 1, 1))
        with pytest.raises(InvalidDecomposition):
            build_decomposition((4, 4, 4), (0, 1, 1))

    @given(
        dims=st.tuples(*[st.integers(1, 24)] * 3),
        counts=st.tuples(*[st.integers(1, 24)] * 3),
    )
    def test_partition_property(self, dims, counts):
        counts = tuple(min(c, d) for c, d in zip(counts, dims))
        rg = build_decomposition(dims, counts)
        total = 0
        for r in range(rg.region_count):
            box = rg.region_box(r)
            vol = 1
            for lo, hi in box:
                assert 0 <= lo < hi
                vol *= hi - lo
            total += vol
        assert total == dims[0] * dims[1] * dims[2]
        for a in range(3):
            ext = rg.region_extents[a]
            lengths = [hi - lo for lo, hi in ext]
            assert max(lengths) - min(lengths) <= 1
            assert ext[0][0] == 0 and ext[-1][1] == dims[a]
            for (_, h1), (l2, _) in zip(ext, ext[1:]):
                assert h1 == l2


class TestRegionOfCell:
    def test_corners(self):
        rg = build_decomposition((4, 4, 4), (2, 2, 2))
        assert region_of_cell(rg, (0, 0, 0)) == 0
        assert region_of_cell(rg, (3, 3, 3)) == 7

    def test_out_of_bounds(self):
        rg = build_decomposition((4, 4, 4), (2, 2, 2))
        with pytest.raises(OutOfBounds):
            region_of_cell(rg, (4, 0, 0))
        with pytest.raises(OutOfBounds):
            region_of_cell(rg, (0, -1, 0))

    @given(
        dims=st.tuples(*[st.integers(1, 12)] * 3),
        counts=st.tuples(*[st.integers(1, 12)] * 3),
    )
    @settings(max_examples=30)
    def test_round_trip(self, dims, counts):
        counts = tuple(min(c, d) for c, d in zip(counts, dims))
        rg = build_decomposition(dims, counts)
        for r in range(rg.region_count):
            (x0, x1), (y0, y1), (z0, z1) = rg.region_box(r)
            for cell in [(x0, y0, z0), (x1 - 1, y1 - 1, z1 - 1)]:
                assert region_of_cell(rg, cell) == r


class TestRegionOfPoint:
    def setup_method(self):
        self.rg = build_decomposition((4, 4, 4), (2, 2, 2))
        self.axes = unit_axes((4, 4, 4))

    def test_interior(self):
        assert region_of_point(self.rg, self.axes, (0.5, 0.5, 0.5)) == 0

    def test_max_corner_closed(self):
        assert region_of_point(self.rg, self.axes, (3.0, 3.0, 3.0)) == 7

    def test_outside_domain(self):
        assert region_of_point(self.rg, self.axes, (-0.1, 0.0, 0.0)) is None
        assert region_of_point(self.rg, self.axes, (0.0, 3.1, 0.0)) is None

    def test_interior_boundary_goes_high(self):
        # x = 2.0 is the start of region-index 1 on the x axis
        assert region_of_point(self.rg, self.axes, (2.0, 0.0, 0.0)) == 1

    def test_agrees_with_cell_at_grid_points(self):
        for ix in range(3):
            for iy in range(3):
                for iz in range(3):
                    p = (float(ix), float(iy), float(iz))
                    assert region_of_point(self.rg, self.axes, p) == region_of_cell(
                        self.rg, (ix, iy, iz)
                    )

    def test_mismatched_axes(self):
        with pytest.raises(ValueError):
            region_of_point(self.rg, unit_axes((5, 4, 4)), (0, 0, 0))


class TestVectorizedRegions:
    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=20)
    def test_matches_scalar(self, seed):
        rng = np.random.default_rng(seed)
        dims = tuple(int(d) for d in rng.integers(2, 9, size=3))
        counts = tuple(int(rng.integers(1, d + 1)) for d in dims)
        coords = [np.sort(rng.uniform(0, 10, size=d)) for d in dims]
        for c in coords:  # enforce strict monotonicity
            c += np.arange(c.size) * 1e-6
        axes = RectilinearAxes(*coords)
        rg = build_decomposition(dims, counts)
        # mix uniform points with exact boundary coordinates
        pts = rng.uniform(-1, 11, size=(64, 3))
        boundary = np.stack(
            [rng.choice(coords[a], size=32) for a in range(3)], axis=1
        )
        pts = np.vstack([pts, boundary])
        ids, ok = regions_of_points(rg, axes, pts)
        for p, rid, in_dom in zip(pts, ids, ok):
            expected = region_of_point(rg, axes, tuple(p))
            if expected is None:
                assert not in_dom
            else:
                assert in_dom and rid == expected


def test_delinearize_linearize_round_trip():
    rg = build_decomposition((6, 5, 4), (3, 2, 2))
    for r in range(rg.region_count):
        assert rg.linearize(*rg.delinearize(r)) == r
