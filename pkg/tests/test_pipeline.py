"""Tests for the grid, window expansion, shrinkage, and the fitted model."""

import json

import numpy as np
import pytest

from labavs.data import SimSpec, simulate
from labavs.errors import (
    ConfigurationError,
    DegenerateGridError,
    DegenerateNeighborhoodError,
    ParseError,
)
from labavs.kernel import Bandwidth
from labavs.localreg import Dataset, fit_local_linear
from labavs.pipeline import (
    FULL,
    GLOBAL,
    REDUCED,
    BandwidthSpec,
    Grid,
    build_grid,
    expand_rectangle,
    fit,
    load_model,
    predict,
    relevant_set_label,
    save_model,
    shrink_halfwidth,
    variance_factor,
)
from labavs.selection import SelectionConfig


def line_grid(n=11, lo=0.0, hi=10.0):
    return Grid((np.linspace(lo, hi, n),), (hi - lo) / (n - 1))


class TestBuildGrid:

    def test_axes_span_data_exactly(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(-3, 5, size=(100, 2))
        grid = build_grid(Dataset(x, np.zeros(100)), spacing=0.7)
        for j in range(2):
            assert grid.axes[j][0] == x[:, j].min()
            assert grid.axes[j][-1] == x[:, j].max()
            assert np.max(np.diff(grid.axes[j])) <= 0.7 + 1e-12

    def test_segment_count(self):
        x = np.column_stack([np.array([0.0, 4.0]), np.array([0.0, 1.0])])
        grid = build_grid(Dataset(x, np.zeros(2)), spacing=0.5)
        # range 4 at pitch 0.5 -> 8 segments -> 9 axis points
        assert grid.shape == (9, 3)

    def test_zero_range_dimension_rejected(self):
        x = np.column_stack([np.arange(5.0), np.full(5, 2.0)])
        with pytest.raises(DegenerateGridError):
            build_grid(Dataset(x, np.zeros(5)), spacing=0.5)

    def test_absurd_size_rejected(self):
        x = np.random.default_rng(1).uniform(0, 1, size=(50, 4))
        with pytest.raises(DegenerateGridError):
            build_grid(Dataset(x, np.zeros(50)), spacing=1e-4)

    def test_bad_spacing_rejected(self):
        data = Dataset(np.random.default_rng(2).uniform(0, 1, (10, 1)),
                       np.zeros(10))
        with pytest.raises(ConfigurationError):
            build_grid(data, spacing=0.0)


class TestNearestIndex:

    def test_matches_per_dimension_brute_force(self):
        rng = np.random.default_rng(3)
        axes = (np.linspace(0, 1, 7), np.linspace(-2, 2, 9))
        grid = Grid(axes, 0.5)
        for _ in range(300):
            q = rng.uniform(-2.5, 2.5, size=2)
            gi = grid.nearest_index(q)
            point = grid.points[gi]
            for j in range(2):
                dist = np.abs(axes[j] - q[j])
                best = dist.min()
                # ties break toward the lower coordinate
                want = axes[j][np.flatnonzero(np.isclose(dist, best,
                                                         rtol=0, atol=0))[0]]
                assert point[j] == want

    def test_tie_goes_to_lower_coordinate(self):
        grid = Grid((np.array([0.0, 1.0]),), 1.0)
        gi = grid.nearest_index(np.array([0.5]))
        assert grid.points[gi][0] == 0.0


class TestVarianceFactor:

    def test_equal_weights_give_one_over_n(self):
        rng = np.random.default_rng(4)
        x = rng.uniform(-1, 1, size=(40, 2))
        data = Dataset(x, np.zeros(40))
        bw = Bandwidth([np.inf, np.inf], [np.inf, np.inf])
        v = variance_factor(data, np.zeros(2), bw)
        assert v == 1.0 / 40.0

    def test_matches_direct_formula(self):
        from labavs.kernel import kernel_weights

        rng = np.random.default_rng(5)
        for _ in range(30):
            n = int(rng.integers(10, 50))
            d = int(rng.integers(1, 4))
            x = rng.uniform(-2, 2, size=(n, d))
            data = Dataset(x, np.zeros(n))
            q = rng.uniform(-1, 1, d)
            bw = Bandwidth(rng.uniform(0.8, 3.0, d), rng.uniform(0.8, 3.0, d))
            w = kernel_weights(q, x, bw)
            if w.sum() == 0.0:
                continue
            v = variance_factor(data, q, bw)
            np.testing.assert_allclose(v, np.sum(w**2) / np.sum(w)**2,
                                       rtol=1e-13)
            assert 0.0 < v <= 1.0

    def test_empty_window_raises(self):
        data = Dataset(np.zeros((3, 1)) + 5.0, np.zeros(3))
        with pytest.raises(DegenerateNeighborhoodError):
            variance_factor(data, np.zeros(1), Bandwidth.symmetric(0.5, 1))


class TestShrinkHalfwidth:

    def test_formula_frozen_example(self):
        # ratio (0.05/0.1) * 1/2 = 0.25, exponent 1/(1+4)
        got = shrink_halfwidth(1.0, d=2, d_prime=1, v_initial=0.1,
                               v_expanded=0.05)
        np.testing.assert_allclose(got, 0.25 ** 0.2, rtol=1e-14)

    def test_never_exceeds_initial(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            h = rng.uniform(0.1, 2.0)
            d = int(rng.integers(1, 5))
            dp = int(rng.integers(1, d + 1))
            vi = rng.uniform(0.01, 1.0)
            ve = rng.uniform(0.01, 1.0)
            assert shrink_halfwidth(h, d, dp, vi, ve) <= h

    def test_no_expansion_means_no_shrink(self):
        # identical variance factors and every dimension relevant
        assert shrink_halfwidth(0.8, 3, 3, 0.2, 0.2) == 0.8

    def test_zero_relevant_rejected(self):
        with pytest.raises(ConfigurationError):
            shrink_halfwidth(1.0, 2, 0, 0.1, 0.1)


class TestExpansion:

    def test_uniform_sets_expand_to_infinity(self):
        # Same relevant set everywhere: nothing is ever bad, so every
        # redundant dimension grows without bound on both sides.
        axes = (np.linspace(0, 4, 5), np.linspace(0, 4, 5))
        grid = Grid(axes, 1.0)
        mask = np.tile([True, False], (grid.n_points, 1))
        bw = expand_rectangle(grid, mask, flat_index=12, h=0.8)
        assert bw.lower[1] == np.inf and bw.upper[1] == np.inf
        assert bw.lower[0] == 0.8 and bw.upper[0] == 0.8  # untouched

    def test_bad_point_above_freezes_upper_only(self):
        grid = line_grid()
        mask = np.zeros((11, 1), dtype=bool)
        mask[6, 0] = True  # x=6 considers the dimension relevant
        bw = expand_rectangle(grid, mask, flat_index=5, h=0.6)
        assert bw.upper[0] == 0.6
        assert bw.lower[0] == np.inf  # nothing bad below, hits the edge

    def test_preexisting_bad_point_does_not_freeze(self):
        # The bad point at x=4 is already inside the starting window, so
        # no growth step newly admits it; both sides still reach the edge.
        grid = line_grid()
        mask = np.zeros((11, 1), dtype=bool)
        mask[4, 0] = True
        bw = expand_rectangle(grid, mask, flat_index=5, h=1.5)
        assert bw.lower[0] == np.inf and bw.upper[0] == np.inf

    def test_growth_stops_before_distant_bad_point(self):
        grid = line_grid()
        mask = np.zeros((11, 1), dtype=bool)
        mask[8, 0] = True
        bw = expand_rectangle(grid, mask, flat_index=5, h=0.6)
        # upper can widen by whole pitches while staying short of x=8
        assert bw.upper[0] == pytest.approx(2.6)
        assert bw.lower[0] == np.inf

    def test_relevant_dimensions_never_grow(self):
        rng = np.random.default_rng(7)
        axes = (np.linspace(0, 3, 4), np.linspace(0, 3, 4))
        grid = Grid(axes, 1.0)
        for _ in range(20):
            mask = rng.uniform(size=(grid.n_points, 2)) < 0.5
            i = int(rng.integers(grid.n_points))
            bw = expand_rectangle(grid, mask, flat_index=i, h=0.7)
            for j in range(2):
                if mask[i, j]:
                    assert bw.lower[j] == 0.7 and bw.upper[j] == 0.7
                else:
                    assert bw.lower[j] >= 0.7 and bw.upper[j] >= 0.7

    def test_redundant_everywhere_dimension_goes_infinite(self):
        # Mixed sets in the genuine dimension, but the second dimension is
        # redundant at every grid point and never blocks.
        axes = (np.linspace(0, 4, 5), np.linspace(0, 4, 5))
        grid = Grid(axes, 1.0)
        mask = np.zeros((grid.n_points, 2), dtype=bool)
        x0 = grid.points[:, 0]
        mask[x0 >= 2.0, 0] = True  # right half treats dim 0 as relevant
        for i in range(grid.n_points):
            if not mask[i, 0]:
                bw = expand_rectangle(grid, mask, flat_index=i, h=0.9)
                assert bw.lower[1] == np.inf and bw.upper[1] == np.inf


class TestFitBasics:

    def setup_method(self):
        self.data = simulate(SimSpec(n=400, seed=1))

    def test_lambda_zero_is_plain_local_linear(self):
        model = fit(self.data, SelectionConfig(lam=0.0),
                    BandwidthSpec.fixed(1.0))
        rng = np.random.default_rng(8)
        bw = Bandwidth.symmetric(1.0, 2)
        for _ in range(50):
            q = rng.uniform(-1.8, 1.8, size=2)
            direct = fit_local_linear(self.data, q, bw).estimate
            assert predict(model, q) == direct

    def test_lambda_zero_reports_everything_relevant(self):
        model = fit(self.data, SelectionConfig(lam=0.0),
                    BandwidthSpec.fixed(1.0))
        np.testing.assert_array_equal(model.relevance_fractions(), 1.0)
        assert model.pattern_counts() == [("{1,2}", model.sig.grid.n_points)]
        assert model.globally_removed_dimensions() == frozenset()

    def test_expansion_monotone_and_shrink_clamped(self):
        model = fit(self.data, SelectionConfig(lam=0.55),
                    BandwidthSpec.nearest_neighbor(0.2))
        sig = model.sig
        h = sig.initial_halfwidths[:, None]
        red = ~sig.relevant_mask
        assert np.all(sig.adjusted_lower[red] >= h.repeat(2, 1)[red])
        assert np.all(sig.adjusted_upper[red] >= h.repeat(2, 1)[red])
        rel = sig.relevant_mask
        assert np.all(sig.adjusted_lower[rel] <= h.repeat(2, 1)[rel])
        assert np.all(sig.adjusted_upper[rel] <= h.repeat(2, 1)[rel])

    def test_relevant_sets_partition(self):
        model = fit(self.data, SelectionConfig(lam=0.55),
                    BandwidthSpec.nearest_neighbor(0.2))
        # the mask is boolean per dimension, so relevant/redundant are
        # disjoint and cover everything by construction; check the
        # labelled view agrees
        total = sum(count for _, count in model.pattern_counts())
        assert total == model.sig.grid.n_points

    def test_spacing_above_halfwidth_rejected(self):
        with pytest.raises(ConfigurationError):
            fit(self.data, SelectionConfig(lam=0.5), BandwidthSpec.fixed(0.4),
                spacing=0.5)

    def test_reduced_empty_set_is_local_constant(self):
        model = fit(self.data, SelectionConfig(lam=0.55),
                    BandwidthSpec.nearest_neighbor(0.25))
        sig = model.sig
        empties = [i for i in range(sig.grid.n_points)
                   if not sig.relevant_mask[i].any()]
        assert empties, "expected some all-redundant grid points"
        i = empties[len(empties) // 2]
        q = sig.grid.points[i]
        from labavs.localreg import fit_local_constant

        bw = Bandwidth(sig.adjusted_lower[i], sig.adjusted_upper[i])
        want = fit_local_constant(self.data, q, bw).estimate
        assert predict(model, q) == want

    def test_global_shrink_mode_runs_and_clamps(self):
        model = fit(self.data, SelectionConfig(lam=0.55),
                    BandwidthSpec.nearest_neighbor(0.2), shrink_mode=GLOBAL)
        sig = model.sig
        rel = sig.relevant_mask
        h = sig.initial_halfwidths[:, None].repeat(2, 1)
        assert np.all(sig.adjusted_lower[rel] <= h[rel] + 1e-15)
        # one common factor: the shrunken-to-initial ratio is constant
        ratios = (sig.adjusted_lower[rel] / h[rel])
        assert np.ptp(ratios) < 1e-12

    def test_full_mode_keeps_all_dimensions(self):
        model = fit(self.data, SelectionConfig(lam=0.55),
                    BandwidthSpec.nearest_neighbor(0.2), final_fit_mode=FULL)
        rng = np.random.default_rng(9)
        for _ in range(10):
            q = rng.uniform(-1.5, 1.5, 2)
            gi = model.sig.grid.nearest_index(q)
            bw = Bandwidth(model.sig.adjusted_lower[gi],
                           model.sig.adjusted_upper[gi])
            want = fit_local_linear(self.data, q, bw).estimate
            assert predict(model, q) == want


class TestDegenerateHandling:

    def test_isolated_cluster_uses_fallbacks(self):
        rng = np.random.default_rng(10)
        x = np.vstack([rng.uniform(0, 1, size=(60, 2)),
                       np.array([[5.0, 5.0], [5.1, 5.0], [5.0, 5.1],
                                 [5.1, 5.1], [5.05, 5.05]])])
        y = rng.normal(size=65)
        data = Dataset(x, y)
        model = fit(data, SelectionConfig(lam=0.5), BandwidthSpec.fixed(0.4),
                    spacing=0.35)
        assert model.sig.degenerate_fallbacks > 0
        # classification still covers every grid point
        assert model.sig.relevant_mask.shape[0] == model.sig.grid.n_points

    def test_predict_widens_window_when_needed(self):
        rng = np.random.default_rng(11)
        x = np.vstack([rng.uniform(0, 1, size=(60, 2)),
                       np.array([[5.0, 5.0], [5.1, 5.0], [5.0, 5.1],
                                 [5.1, 5.1], [5.05, 5.05]])])
        data = Dataset(x, rng.normal(size=65))
        model = fit(data, SelectionConfig(lam=0.5), BandwidthSpec.fixed(0.4),
                    spacing=0.35)
        # far from every observation, the stored window is empty at first
        val = predict(model, np.array([3.0, 3.0]))
        assert np.isfinite(val)


class TestModelFile:

    def make_model(self):
        data = simulate(SimSpec(n=200, seed=14))
        return fit(data, SelectionConfig(lam=0.55),
                   BandwidthSpec.nearest_neighbor(0.25))

    def test_round_trip_predicts_identically(self, tmp_path):
        model = self.make_model()
        path = tmp_path / "m.json"
        save_model(model, path)
        back = load_model(path)
        rng = np.random.default_rng(15)
        q = rng.uniform(-2, 2, size=(100, 2))
        np.testing.assert_array_equal(back.predict_many(q),
                                      model.predict_many(q))

    def test_round_trip_preserves_infinities(self, tmp_path):
        model = self.make_model()
        path = tmp_path / "m.json"
        save_model(model, path)
        back = load_model(path)
        np.testing.assert_array_equal(back.sig.adjusted_lower,
                                      model.sig.adjusted_lower)
        assert np.isinf(back.sig.adjusted_lower).any()

    def test_tampered_dataset_rejected(self, tmp_path):
        model = self.make_model()
        path = tmp_path / "m.json"
        save_model(model, path)
        doc = json.loads(path.read_text())
        doc["dataset"]["y"][0] += 1.0
        path.write_text(json.dumps(doc))
        with pytest.raises(ParseError):
            load_model(path)

    def test_wrong_schema_and_version_rejected(self, tmp_path):
        model = self.make_model()
        for field, value in (("schema", "something-else"),
                             ("schema_version", 999)):
            path = tmp_path / f"{field}.json"
            save_model(model, path)
            doc = json.loads(path.read_text())
            doc[field] = value
            path.write_text(json.dumps(doc))
            with pytest.raises(ParseError):
                load_model(path)

    def test_missing_field_rejected(self, tmp_path):
        model = self.make_model()
        path = tmp_path / "m.json"
        save_model(model, path)
        doc = json.loads(path.read_text())
        del doc["relevant_mask"]
        path.write_text(json.dumps(doc))
        with pytest.raises(ParseError):
            load_model(path)

    def test_unparseable_json_rejected(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("{nope")
        with pytest.raises(ParseError):
            load_model(path)


class TestRemoval:

    def test_noise_dimension_removed_at_high_threshold(self):
        data = simulate(SimSpec(n=500, d_extra=1, seed=11))
        model = fit(data, SelectionConfig(lam=0.95),
                    BandwidthSpec.nearest_neighbor(0.3))
        assert model.globally_removed_dimensions() == frozenset({2})
        frac = model.relevance_fractions()
        assert frac[2] == 0.0
        assert frac[0] > 0.0 and frac[1] > 0.0

    def test_label_format(self):
        assert relevant_set_label(frozenset()) == "{}"
        assert relevant_set_label([1, 0]) == "{1,2}"
        assert relevant_set_label((2,)) == "{3}"
