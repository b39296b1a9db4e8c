"""Tests for Dawson's integral, the KL integral, and adaptive Simpson."""

import math

import numpy as np
import pytest

from etatrick.specialfn import (
    DepthExceededError,
    QuadratureOptions,
    dawson,
    kl_integrand,
    kl_loguniform,
    quad_adaptive,
)

from oracles import dawson_by_quadrature, kl_by_gauss, kl_by_simpson

# Frozen from the t-space adaptive Simpson oracle (abs_tol 1e-13), confirmed
# by a 200-node Gauss-Legendre rule to the same digits.
KL_AT_ONE = 0.42668560429604474


class TestQuadAdaptive:
    def test_constant(self):
        assert quad_adaptive(lambda t: 1.0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-14)

    def test_cubic_exact(self):
        # Simpson integrates cubics exactly; the adaptive wrapper keeps that.
        assert quad_adaptive(lambda t: t * t, 0.0, 1.0) == pytest.approx(1 / 3, abs=1e-15)

    def test_endpoint_singularity(self):
        val = quad_adaptive(
            lambda t: 0.5 / math.sqrt(t) if t > 0 else math.inf, 0.0, 4.0
        )
        assert val == pytest.approx(2.0, abs=1e-8)

    def test_reversed_interval(self):
        assert quad_adaptive(lambda t: t, 1.0, 0.0) == pytest.approx(-0.5, abs=1e-12)

    def test_depth_exceeded(self):
        opts = QuadratureOptions(abs_tol=1e-14, max_depth=2)
        with pytest.raises(DepthExceededError):
            quad_adaptive(lambda t: math.sin(100.0 * t) ** 2, 0.0, 10.0, opts)

    def test_options_validation(self):
        with pytest.raises(ValueError):
            QuadratureOptions(abs_tol=0.0)
        with pytest.raises(ValueError):
            QuadratureOptions(max_depth=0)


class TestDawson:
    def test_zero(self):
        assert dawson(0.0) == 0.0

    def test_odd_exact(self):
        for u in np.linspace(0.1, 20.0, 57):
            assert dawson(-u) == -dawson(u)

    def test_known_values(self):
        assert dawson(1.0) == pytest.approx(0.5380795069, abs=1e-9)
        assert dawson(10.0) == pytest.approx(0.0502538, abs=1e-6)
        # consistent with the leading asymptote 1/(2u)
        assert dawson(10.0) == pytest.approx(1.0 / 20.0, rel=6e-3)

    def test_matches_defining_integral(self):
        for u in np.linspace(0.05, 12.0, 25):
            assert abs(dawson(float(u)) - dawson_by_quadrature(float(u))) < 1e-10

    def test_ode_residual(self):
        # F'(u) + 2 u F(u) = 1, checked with central differences.
        h = 1e-5
        for u in np.linspace(0.0, 5.0, 101):
            u = float(u)
            fprime = (dawson(u + h) - dawson(u - h)) / (2.0 * h)
            assert abs(fprime + 2.0 * u * dawson(u) - 1.0) < 1e-6

    def test_large_argument_accuracy(self):
        assert abs(dawson(50.0) - dawson_by_quadrature(50.0)) < 1e-10


class TestKlIntegrand:
    def test_removable_singularity(self):
        assert kl_integrand(0.0) == 0.5

    def test_approaches_half(self):
        assert kl_integrand(1e-12) == pytest.approx(0.5, abs=1e-6)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            kl_integrand(-1.0)


class TestKlLoguniform:
    def test_empty_integral(self):
        assert kl_loguniform(0.0) == 0.0

    def test_small_argument_linearization(self):
        # integrand -> 1/2 at t = 0, so KL(b) ~ b/2 for small b
        b = 1e-6
        assert kl_loguniform(b) == pytest.approx(0.5 * b, rel=1e-5)

    def test_golden_value(self):
        assert kl_loguniform(1.0) == pytest.approx(KL_AT_ONE, abs=1e-10)

    def test_two_independent_rules_agree(self):
        assert kl_by_simpson(1.0) == pytest.approx(KL_AT_ONE, abs=1e-12)
        assert kl_by_gauss(1.0) == pytest.approx(KL_AT_ONE, abs=1e-12)

    @pytest.mark.parametrize("eta_bar", [0.3, 2.0, 50.0, 127.5, 130.0, 4096.0])
    def test_matches_t_space_oracle(self, eta_bar):
        # covers both sides of the asymptotic-tail switch
        assert kl_loguniform(eta_bar) == pytest.approx(kl_by_simpson(eta_bar), abs=1e-10)

    def test_monotone_and_nonnegative(self):
        grid = np.geomspace(1e-4, 1e6, 41)
        vals = [kl_loguniform(float(b)) for b in grid]
        assert all(v >= 0 for v in vals)
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_infinite_argument(self):
        assert kl_loguniform(math.inf) == math.inf

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            kl_loguniform(-0.5)
