import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regsum.errors import (
    EdgesMismatch,
    EmptyHistogram,
    EmptyInput,
    EmptySearchWindow,
    EmptyStats,
    Incompatible,
    InvalidRange,
    MissingQuartiles,
)
from regsum.histogram import (
    BinEdges,
    BinningKind,
    BinningStrategy,
    MergedPdf,
    RegionalHistogram,
    VariableStats,
    _overlap_fractions,
    add_same_edges,
    edges_from_strategy,
    freedman_diaconis_bin_width,
    mass_in_range,
    max_bin,
    merge_general,
    moments,
    scott_bin_width,
    sturges_bin_count,
)


def hist_1d(counts, lo=0.0, hi=None, var=0):
    counts = np.asarray(counts, dtype=np.int64)
    hi = float(len(counts)) if hi is None else hi
    h = RegionalHistogram(
        var_ids=(var,),
        edges=(BinEdges(lo, hi, len(counts)),),
        counts=counts,
        sample_count=int(counts.sum()),
    )
    return h


def accumulate_all(h, samples):
    for s in samples:
        h.accumulate(s)
    return h


class TestBinningFormulas:
    def test_sturges_power_of_two(self):
        assert sturges_bin_count(1024) == 11

    def test_fd_cube_root_exact(self):
        assert freedman_diaconis_bin_width(1.0, 8) == 1.0

    def test_scott(self):
        assert scott_bin_width(2.0, 1000) == 3.49 * 2.0 / 10.0

    def test_sturges_edges(self):
        st_ = VariableStats.from_samples(np.linspace(0.0, 1.0, 1024))
        e = edges_from_strategy(st_, BinningStrategy(BinningKind.STURGES))
        assert e == BinEdges(0.0, 1.0, 11)

    def test_fd_edges(self):
        samples = np.array([0.0, 1.0, 1.0, 1.5, 2.5, 3.0, 3.0, 4.0])
        stats = VariableStats.from_samples(samples, with_quartiles=True)
        assert stats.q3 - stats.q1 == pytest.approx(2.0)
        e = edges_from_strategy(stats, BinningStrategy(BinningKind.FREEDMAN_DIACONIS))
        # h = 2 * 2 * 8^(-1/3) = 2.0 over range [0, 4] -> 2 bins
        assert e == BinEdges(0.0, 4.0, 2)

    def test_fixed(self):
        stats = VariableStats.from_samples(np.array([0.0, 4.0]))
        e = edges_from_strategy(stats, BinningStrategy.fixed(3))
        assert e == BinEdges(0.0, 4.0, 3)

    def test_degenerate_range(self):
        stats = VariableStats.from_samples(np.full(10, 7.0))
        e = edges_from_strategy(stats, BinningStrategy(BinningKind.SCOTT))
        assert e.nbins == 1
        assert e.min == 7.0
        assert e.max == 7.0 + 7.0 * 1e-9

    def test_zero_iqr_falls_back_to_sturges(self):
        samples = np.array([0.0] + [1.0] * 14 + [2.0])
        stats = VariableStats.from_samples(samples, with_quartiles=True)
        assert stats.q3 == stats.q1
        e = edges_from_strategy(stats, BinningStrategy(BinningKind.FREEDMAN_DIACONIS))
        assert e.nbins == sturges_bin_count(16)

    def test_max_bins_cap(self):
        # tight interquartile cluster with far outliers -> tiny h -> capped
        samples = np.concatenate([[0.0, 1000.0], np.linspace(499.0, 501.0, 100)])
        stats = VariableStats.from_samples(samples, with_quartiles=True)
        e = edges_from_strategy(stats, BinningStrategy(BinningKind.FREEDMAN_DIACONIS, max_bins=4))
        assert e.nbins == 4

    def test_empty_stats(self):
        with pytest.raises(EmptyStats):
            edges_from_strategy(VariableStats(), BinningStrategy(BinningKind.STURGES))

    def test_missing_quartiles(self):
        stats = VariableStats.from_samples(np.array([0.0, 1.0]))
        with pytest.raises(MissingQuartiles):
            edges_from_strategy(stats, BinningStrategy(BinningKind.FREEDMAN_DIACONIS))


class TestAccumulate:
    def test_interior_sample(self):
        h = RegionalHistogram.empty((0,), (BinEdges(0.0, 3.0, 3),))
        h.accumulate(1.5)
        assert h.counts.tolist() == [0, 1, 0]

    def test_max_lands_in_last_bin(self):
        h = RegionalHistogram.empty((0,), (BinEdges(0.0, 3.0, 3),))
        h.accumulate(3.0)
        assert h.counts.tolist() == [0, 0, 1]

    def test_out_of_range(self):
        h = RegionalHistogram.empty((0,), (BinEdges(0.0, 3.0, 3),))
        h.accumulate(3.5)
        assert h.counts.tolist() == [0, 0, 0]
        assert h.out_of_range == 1

    def test_non_finite(self):
        h = RegionalHistogram.empty((0,), (BinEdges(0.0, 3.0, 3),))
        h.accumulate(float("nan"))
        h.accumulate(float("inf"))
        assert h.invalid == 2
        assert h.sample_count == 0

    def test_2d_linearization_axis0_fastest(self):
        h = RegionalHistogram.empty((0, 1), (BinEdges(0.0, 2.0, 2), BinEdges(0.0, 3.0, 3)))
        h.accumulate((1.5, 0.5))  # i0=1, i1=0 -> flat 1
        h.accumulate((0.5, 2.5))  # i0=0, i1=2 -> flat 4
        assert h.counts.tolist() == [0, 1, 0, 0, 1, 0]
        assert h.counts2d()[1, 0] == 1
        assert h.counts2d()[0, 2] == 1

    def test_2d_one_axis_out(self):
        h = RegionalHistogram.empty((0, 1), (BinEdges(0.0, 2.0, 2), BinEdges(0.0, 3.0, 3)))
        h.accumulate((1.0, 5.0))
        assert h.out_of_range == 1
        assert h.sample_count == 0

    @given(st.lists(st.floats(allow_nan=True, allow_infinity=True, width=32), max_size=200))
    @settings(max_examples=50)
    def test_count_conservation(self, xs):
        h = RegionalHistogram.empty((0,), (BinEdges(-1.0, 1.0, 4),))
        accumulate_all(h, xs)
        assert int(h.counts.sum()) == h.sample_count
        assert h.sample_count + h.out_of_range + h.invalid == len(xs)


class TestAddSameEdges:
    def test_elementwise(self):
        a, b = hist_1d([1, 2]), hist_1d([3, 4])
        assert add_same_edges(a, b).counts.tolist() == [4, 6]

    def test_identity(self):
        h = RegionalHistogram.empty((0,), (BinEdges(0.0, 2.0, 2),))
        accumulate_all(h, [0.3, 1.7, 1.9])
        empty = RegionalHistogram.empty((0,), (BinEdges(0.0, 2.0, 2),))
        assert add_same_edges(h, empty) == h

    def test_mismatch(self):
        a = hist_1d([1, 2, 3], 0.0, 3.0)
        b = RegionalHistogram.empty((0,), (BinEdges(0.0, 3.0, 4),))
        with pytest.raises(EdgesMismatch):
            add_same_edges(a, b)

    def test_commutative_associative(self):
        hs = []
        for seed in range(3):
            rng = np.random.default_rng(seed)
            h = RegionalHistogram.empty((0,), (BinEdges(0.0, 1.0, 5),))
            accumulate_all(h, rng.uniform(0, 1, 50))
            hs.append(h)
        a, b, c = hs
        assert add_same_edges(a, b) == add_same_edges(b, a)
        assert add_same_edges(add_same_edges(a, b), c) == add_same_edges(a, add_same_edges(b, c))


class TestMassInRange:
    def test_half(self):
        h = hist_1d([2, 2], 0.0, 2.0)
        assert mass_in_range(h, 0, 0.0, 1.0) == 0.5

    def test_proration(self):
        h = hist_1d([2, 2], 0.0, 2.0)
        assert mass_in_range(h, 0, 0.5, 1.5) == 0.5

    def test_disjoint(self):
        h = hist_1d([2, 2], 0.0, 2.0)
        assert mass_in_range(h, 0, 5.0, 6.0) == 0.0

    def test_full_range_is_one(self):
        rng = np.random.default_rng(7)
        h = RegionalHistogram.empty((0,), (BinEdges(-3.0, 3.0, 7),))
        accumulate_all(h, rng.normal(0, 1, 500))
        assert mass_in_range(h, 0, -3.0, 3.0) == pytest.approx(1.0, abs=1e-12)

    def test_2d_marginalizes(self):
        h = RegionalHistogram.empty((0, 1), (BinEdges(0.0, 2.0, 2), BinEdges(0.0, 2.0, 2)))
        accumulate_all(h, [(0.5, 0.5), (0.5, 1.5), (1.5, 1.5), (1.5, 1.5)])
        assert mass_in_range(h, 0, 0.0, 1.0) == pytest.approx(0.5)
        assert mass_in_range(h, 1, 1.0, 2.0) == pytest.approx(0.75)

    def test_errors(self):
        h = hist_1d([2, 2], 0.0, 2.0)
        with pytest.raises(InvalidRange):
            mass_in_range(h, 0, 1.0, 0.0)
        empty = RegionalHistogram.empty((0,), (BinEdges(0.0, 1.0, 1),))
        with pytest.raises(EmptyHistogram):
            mass_in_range(empty, 0, 0.0, 1.0)


class TestMoments:
    def test_exact_from_sums(self):
        h = hist_1d([4], 0.0, 4.0)
        h.stats = (VariableStats(count=4, min=0.0, max=4.0, sum=8.0, sum_sq=20.0),)
        assert moments(h, 0, "exact") == (2.0, 1.0)

    def test_binned_single_bin(self):
        h = hist_1d([4], 0.0, 2.0)
        assert moments(h, 0, "binned") == (1.0, 0.0)

    def test_exact_equals_brute_force(self):
        samples = [1.0, 2.0, 3.0, 4.0]
        h = RegionalHistogram.empty((0,), (BinEdges(0.0, 5.0, 2),))
        accumulate_all(h, samples)
        # independent oracle: direct mean/population variance over the list
        mean_oracle = math.fsum(samples) / len(samples)
        var_oracle = math.fsum((x - mean_oracle) ** 2 for x in samples) / len(samples)
        mean, var = moments(h, 0, "exact")
        assert mean == pytest.approx(mean_oracle, rel=1e-15)
        assert var == pytest.approx(var_oracle, rel=1e-12)
        assert (mean, var) == (2.5, 1.25)

    def test_binned_mean_converges_to_exact(self):
        rng = np.random.default_rng(42)
        samples = rng.normal(5.0, 2.0, 4000)
        stats = VariableStats.from_samples(samples)
        errors = []
        for nbins in (4, 16, 64):
            h = RegionalHistogram.empty((0,), (BinEdges(stats.min, stats.max, nbins),))
            for x in samples:
                h.accumulate(x)
            binned_mean, _ = moments(h, 0, "binned")
            errors.append(abs(binned_mean - stats.mean()))
        assert errors[0] >= errors[1] >= errors[2]

    def test_empty(self):
        empty = RegionalHistogram.empty((0,), (BinEdges(0.0, 1.0, 1),))
        with pytest.raises(EmptyHistogram):
            moments(empty, 0, "exact")


class TestMaxBin:
    def test_simple(self):
        r = max_bin(hist_1d([1, 5, 3]))
        assert (r.linear_index, r.count) == (1, 5)
        assert r.bin_ranges == ((1.0, 2.0),)

    def test_tie_goes_low(self):
        assert max_bin(hist_1d([5, 5])).linear_index == 0

    def test_window(self):
        r = max_bin(hist_1d([9, 1, 1]), ranges=[(1.0, 3.0)])
        assert r.linear_index == 1

    def test_empty_window(self):
        with pytest.raises(EmptySearchWindow):
            max_bin(hist_1d([1, 2]), ranges=[(5.0, 6.0)])

    def test_empty_histogram(self):
        empty = RegionalHistogram.empty((0,), (BinEdges(0.0, 1.0, 1),))
        with pytest.raises(EmptyHistogram):
            max_bin(empty)

    def test_2d_window(self):
        h = RegionalHistogram.empty((0, 1), (BinEdges(0.0, 2.0, 2), BinEdges(0.0, 2.0, 2)))
        accumulate_all(h, [(0.5, 0.5)] * 5 + [(1.5, 1.5)] * 3)
        r = max_bin(h)
        assert r.indices == (0, 0) and r.count == 5
        r = max_bin(h, ranges=[(1.0, 2.0), None])
        assert r.indices == (1, 1) and r.count == 3


class TestMergeGeneral:
    def test_identical_edges_fast_path(self):
        a, b = hist_1d([1, 2], 0.0, 2.0), hist_1d([3, 4], 0.0, 2.0)
        m = merge_general([a, b])
        assert isinstance(m, MergedPdf)
        assert m.counts.tolist() == [4.0, 6.0]
        assert m.source_region_count == 2
        # fast path result equals repeated add_same_edges bin-for-bin
        assert np.array_equal(m.counts, add_same_edges(a, b).counts.astype(float))

    def test_uniform_split_redistribution(self):
        # one source bin of 4 split uniformly across two finer target bins
        o = _overlap_fractions(BinEdges(0.0, 2.0, 1), BinEdges(0.0, 2.0, 2))
        assert (np.asarray([4.0]) @ o).tolist() == [2.0, 2.0]

    def test_overlap_rule_by_hand(self):
        a = hist_1d([4], 0.0, 1.0)
        b = hist_1d([4], 0.0, 2.0)
        m = merge_general([a, b])
        assert m.edges == (BinEdges(0.0, 2.0, 1),)
        assert m.counts.tolist() == [8.0]

    def test_mixed_resolution(self):
        a = hist_1d([4], 0.0, 2.0)  # 1 bin
        b = hist_1d([1, 1], 0.0, 2.0)  # 2 bins
        m = merge_general([a, b])
        assert m.edges == (BinEdges(0.0, 2.0, 2),)
        assert m.counts.tolist() == [3.0, 3.0]

    def test_2d_redistribution_by_hand(self):
        a = RegionalHistogram.empty((0, 1), (BinEdges(0.0, 2.0, 1), BinEdges(0.0, 2.0, 1)))
        accumulate_all(a, [(0.5, 0.5)] * 4)
        b = RegionalHistogram.empty((0, 1), (BinEdges(0.0, 2.0, 2), BinEdges(0.0, 2.0, 2)))
        accumulate_all(b, [(0.5, 0.5), (1.5, 1.5)])
        m = merge_general([a, b])
        assert m.counts.tolist() == [2.0, 1.0, 1.0, 2.0]

    def test_incompatible(self):
        a = hist_1d([1], var=0)
        b = hist_1d([1], var=1)
        with pytest.raises(Incompatible):
            merge_general([a, b])

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            merge_general([])

    def test_empty_histograms_do_not_pollute_range(self):
        a = hist_1d([2, 2], 10.0, 12.0)
        empty = RegionalHistogram.empty((0,), (BinEdges(0.0, 1.0, 1),))
        m = merge_general([a, empty])
        assert m.edges == (BinEdges(10.0, 12.0, 2),)
        assert m.counts.tolist() == [2.0, 2.0]
        assert m.source_region_count == 2

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_mass_conservation(self, seed):
        rng = np.random.default_rng(seed)
        hs = []
        for _ in range(rng.integers(1, 6)):
            lo = rng.uniform(-10, 10)
            hi = lo + rng.uniform(0.1, 20)
            nbins = int(rng.integers(1, 12))
            h = RegionalHistogram.empty((0,), (BinEdges(lo, hi, nbins),))
            accumulate_all(h, rng.uniform(lo, hi, size=rng.integers(0, 80)))
            hs.append(h)
        m = merge_general(hs)
        total = sum(h.sample_count for h in hs)
        if total:
            assert m.counts.sum() == pytest.approx(total, rel=1e-9)

    def test_merged_exact_moments_match_pooled_samples(self):
        rng = np.random.default_rng(3)
        pools, hs = [], []
        for i in range(4):
            samples = rng.normal(i, 1 + i, 200)
            stats = VariableStats.from_samples(samples)
            h = RegionalHistogram.empty((0,), (BinEdges(stats.min, stats.max, 8),))
            accumulate_all(h, samples)
            pools.append(samples)
            hs.append(h)
        m = merge_general(hs)
        pooled = np.concatenate(pools)
        mean_oracle = math.fsum(pooled) / pooled.size
        var_oracle = math.fsum((x - mean_oracle) ** 2 for x in pooled) / pooled.size
        mean, var = moments(m, 0, "exact")
        assert mean == pytest.approx(mean_oracle, rel=1e-12)
        assert var == pytest.approx(var_oracle, rel=1e-12)
