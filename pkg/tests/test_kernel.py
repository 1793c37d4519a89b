"""Tests for the tricube kernel, asymmetric bandwidths, and kernel constants."""

import numpy as np
import pytest

from labavs.errors import ConfigurationError, DimensionMismatchError
from labavs.kernel import (
    Bandwidth,
    kernel_constants,
    kernel_weight,
    kernel_weights,
    tricube,
)

# Frozen reference values, computed by hand from (35/32)(1 - u^2)^3:
#   u = 0    -> 35/32
#   u = 0.5  -> (35/32) * 0.75^3
#   u = 0.9  -> (35/32) * 0.19^3
TRICUBE_AT_0 = 1.09375
TRICUBE_AT_HALF = 0.46142578125
TRICUBE_AT_09 = 0.00750203125


class TestTricube:

    def test_frozen_values(self):
        np.testing.assert_allclose(tricube(0.0), TRICUBE_AT_0, rtol=0, atol=0)
        np.testing.assert_allclose(tricube(0.5), TRICUBE_AT_HALF, rtol=0, atol=0)
        np.testing.assert_allclose(tricube(0.9), TRICUBE_AT_09, rtol=1e-12)

    def test_compact_support(self):
        u = np.array([-2.0, -1.0, 1.0, 1.0000001, 5.0])
        np.testing.assert_array_equal(tricube(u), 0.0)

    def test_symmetry(self):
        u = np.linspace(0.0, 1.0, 23)
        np.testing.assert_array_equal(tricube(u), tricube(-u))

    def test_scalar_input_gives_float(self):
        out = tricube(0.25)
        assert isinstance(out, float)

    def test_monotone_decay_on_positive_axis(self):
        u = np.linspace(0.0, 1.0, 50)
        v = tricube(u)
        assert np.all(np.diff(v) <= 0)

    def test_integrates_to_one(self):
        # Simpson on a fine grid is plenty for a degree-6 polynomial piece.
        from scipy.integrate import simpson

        u = np.linspace(-1.0, 1.0, 2001)
        total = simpson(tricube(u), x=u)
        np.testing.assert_allclose(total, 1.0, atol=1e-10)


class TestBandwidth:

    def test_symmetric_constructor(self):
        bw = Bandwidth.symmetric(0.7, 3)
        np.testing.assert_array_equal(bw.lower, [0.7, 0.7, 0.7])
        np.testing.assert_array_equal(bw.upper, [0.7, 0.7, 0.7])
        assert bw.d == 3
        assert bw.is_symmetric()

    def test_asymmetric_is_detected(self):
        bw = Bandwidth([1.0, 2.0], [1.0, 3.0])
        assert not bw.is_symmetric()

    def test_infinite_is_first_class(self):
        bw = Bandwidth([np.inf, 1.0], [1.0, np.inf])
        assert np.isinf(bw.lower[0])
        assert np.isinf(bw.upper[1])

    @pytest.mark.parametrize("bad", [0.0, -1.0, np.nan])
    def test_rejects_nonpositive_and_nan(self, bad):
        with pytest.raises(ConfigurationError):
            Bandwidth([bad, 1.0], [1.0, 1.0])

    def test_rejects_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            Bandwidth([1.0, 1.0], [1.0])


class TestKernelWeights:

    def test_matches_manual_product(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            d = rng.integers(1, 5)
            n = rng.integers(1, 30)
            x = rng.normal(size=(n, d))
            q = rng.normal(size=d)
            lo = rng.uniform(0.5, 2.0, size=d)
            hi = rng.uniform(0.5, 2.0, size=d)
            bw = Bandwidth(lo, hi)
            got = kernel_weights(q, x, bw)
            want = np.ones(n)
            for i in range(n):
                for j in range(d):
                    h = lo[j] if x[i, j] < q[j] else hi[j]
                    want[i] *= tricube((x[i, j] - q[j]) / h) / h
            np.testing.assert_allclose(got, want, rtol=1e-13)

    def test_lower_vs_upper_selection(self):
        bw = Bandwidth([1.0], [2.0])
        below = kernel_weight(np.array([0.0]), np.array([-0.5]), bw)
        above = kernel_weight(np.array([0.0]), np.array([0.5]), bw)
        # Same offset, but the upper side uses the wider window, so its
        # scaled argument is smaller and the 1/h factor differs.
        np.testing.assert_allclose(below, tricube(0.5) / 1.0)
        np.testing.assert_allclose(above, tricube(0.25) / 2.0)

    def test_boundary_uses_upper(self):
        # An observation exactly at the query point sits on the "upper" side.
        bw = Bandwidth([0.1], [3.0])
        w = kernel_weight(np.array([1.0]), np.array([1.0]), bw)
        np.testing.assert_allclose(w, tricube(0.0) / 3.0)

    def test_infinite_dim_contributes_factor_one(self):
        bw_fin = Bandwidth([1.0], [1.0])
        bw_mix = Bandwidth([1.0, np.inf], [1.0, np.inf])
        x1 = np.array([[0.3]])
        x2 = np.array([[0.3, 123.4]])
        w1 = kernel_weights(np.array([0.0]), x1, bw_fin)
        w2 = kernel_weights(np.array([0.0, 0.0]), x2, bw_mix)
        np.testing.assert_array_equal(w1, w2)

    def test_all_infinite_returns_exactly_one(self):
        bw = Bandwidth([np.inf, np.inf], [np.inf, np.inf])
        x = np.array([[1e12, -4.0], [0.0, 0.0]])
        w = kernel_weights(np.zeros(2), x, bw)
        assert w[0] == 1.0 and w[1] == 1.0

    def test_unnormalized_drops_h_factors(self):
        bw = Bandwidth([2.0], [2.0])
        x = np.array([[0.5], [-1.0]])
        raw = kernel_weights(np.zeros(1), x, bw, normalized=False)
        nrm = kernel_weights(np.zeros(1), x, bw, normalized=True)
        np.testing.assert_allclose(raw, nrm * 2.0)

    def test_out_of_window_weight_is_zero(self):
        bw = Bandwidth([0.5], [0.5])
        w = kernel_weight(np.zeros(1), np.array([0.6]), bw)
        assert w == 0.0

    def test_weights_nonnegative_property(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            d = rng.integers(1, 4)
            x = rng.normal(size=(40, d)) * 3
            bw = Bandwidth(rng.uniform(0.1, 1.0, d), rng.uniform(0.1, 1.0, d))
            w = kernel_weights(rng.normal(size=d), x, bw)
            assert np.all(w >= 0.0)
            outside = np.any(np.abs(x - 0.0) > 10.0, axis=1)
            assert np.all(w[outside] == 0.0)

    def test_dimension_mismatch_raises(self):
        bw = Bandwidth([1.0, 1.0], [1.0, 1.0])
        with pytest.raises(DimensionMismatchError):
            kernel_weights(np.zeros(3), np.zeros((4, 3)), bw)


class TestKernelConstants:

    # Analytic values:
    #   mu2 = int u^2 K*(u) du  = 1/9
    #   RK  = int K*(u)^2 du    = 350/429
    MU2_EXACT = 1.0 / 9.0
    RK_EXACT = 350.0 / 429.0

    def test_quadrature_matches_analytic(self):
        mu2, rk = kernel_constants()
        np.testing.assert_allclose(mu2, self.MU2_EXACT, atol=1e-12)
        np.testing.assert_allclose(rk, self.RK_EXACT, atol=1e-12)

    def test_second_rule_gauss_legendre(self):
        # Independent of scipy.integrate: both integrands are polynomials
        # on [-1, 1] of degree at most 12, so 20 Gauss-Legendre nodes are
        # exact to roundoff.
        nodes, wts = np.polynomial.legendre.leggauss(20)
        mu2_gl = float(np.sum(wts * nodes ** 2 * tricube(nodes)))
        rk_gl = float(np.sum(wts * tricube(nodes) ** 2))
        mu2, rk = kernel_constants()
        np.testing.assert_allclose(mu2, mu2_gl, atol=1e-14)
        np.testing.assert_allclose(rk, rk_gl, atol=1e-14)

    def test_decimal_expansion(self):
        # 350/429 = 0.815850815850... (period 815850).
        _, rk = kernel_constants()
        np.testing.assert_allclose(rk, 0.815850815850816, atol=1e-12)
