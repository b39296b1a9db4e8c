"""Closed-form penalty zoo: values, dual identities, domains, grammar."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from etatrick.penalties import (
    L0,
    L1,
    ElasticNet,
    HardThresh,
    Huber,
    LogSum,
    LpNorm,
    LpPow,
    Mcp,
    Penalty,
    Scad,
    eta_hat,
    eta_in_domain,
    f_dual,
    omega,
    parse_penalty,
    quad_over_eta,
    top_k_indices,
)

INF = math.inf

SEPARABLE_ZOO = [
    L1(),
    LpPow(p=0.5),
    L0(),
    ElasticNet(theta=0.5),
    Huber(eps=1.0),
    LogSum(eps=2.0),
    Scad(a=3.0, lam=1.0),
    Mcp(a=1.0, lam=1.0),
]


class TestParameterValidation:
    @pytest.mark.parametrize(
        "build",
        [
            lambda: LpNorm(p=0.0),
            lambda: LpNorm(p=2.0),
            lambda: LpPow(p=-0.5),
            lambda: ElasticNet(theta=0.0),
            lambda: ElasticNet(theta=1.0),
            lambda: Huber(eps=0.0),
            lambda: LogSum(eps=-1.0),
            lambda: Scad(a=1.0, lam=1.0),
            lambda: Scad(a=3.0, lam=0.0),
            lambda: Mcp(a=0.0, lam=1.0),
            lambda: HardThresh(k=-1),
        ],
    )
    def test_invalid_parameters_rejected(self, build):
        with pytest.raises(ValueError):
            build()


class TestWorkedValues:
    def test_mcp_omega(self):
        assert Mcp(a=1, lam=1).omega_scalar(0.5) == 0.375

    def test_logsum_omega_at_zero(self):
        assert LogSum(eps=2).omega_scalar(0.0) == pytest.approx(math.log(2), abs=1e-15)

    def test_scad_omega_middle_piece(self):
        assert Scad(a=3, lam=1).omega_scalar(2.0) == 1.75

    def test_logsum_f(self):
        # plug eta = 3 into the closed form; consistent with omega at w = 1
        val = LogSum(eps=2).f_scalar(3.0)
        assert val == pytest.approx(2 * math.log(3) - 1 / 3, abs=1e-14)
        assert 0.5 * (1.0 / 3.0 + val) == pytest.approx(math.log(3), abs=1e-14)

    def test_huber_f_outside_domain(self):
        assert Huber(eps=1).f_scalar(0.5) == INF

    def test_mcp_f(self):
        assert Mcp(a=1, lam=1).f_scalar(1.0) == 0.5

    def test_logsum_eta_hat(self):
        assert LogSum(eps=2).eta_hat_scalar(1.0) == 3.0

    def test_hardthresh_eta_hat(self):
        out = HardThresh(k=2).eta_hat([3.0, -1.0, 2.0])
        assert np.array_equal(out, [INF, 0.0, INF])

    def test_lppow_eta_hat_and_duality(self):
        pen = LpPow(p=0.5)
        assert pen.eta_hat_scalar(4.0) == 8.0
        assert 0.5 * (16.0 / 8.0 + pen.f_scalar(8.0)) == pen.omega_scalar(4.0) == 4.0

    def test_logsum_f_zero_limit(self):
        assert LogSum(eps=2).f_scalar(0.0) == pytest.approx(2 * math.log(2), abs=1e-15)


class TestDomains:
    def test_hardthresh_domain(self):
        assert HardThresh(k=2).eta_in_domain([INF, 0.0, INF])
        assert not HardThresh(k=1).eta_in_domain([INF, 0.0, INF])

    def test_elasticnet_domain(self):
        pen = ElasticNet(theta=0.5)
        assert not pen.eta_in_domain([3.0])  # 3 > 1/theta = 2
        assert pen.eta_in_domain([2.0])
        assert pen.f_scalar(3.0) == INF

    def test_huber_domain(self):
        pen = Huber(eps=1.5)
        assert pen.eta_domain() == (1.5, INF)
        assert not pen.eta_in_domain([1.0])

    def test_operation_wrappers(self):
        pen = Mcp(a=1, lam=1)
        assert omega(pen, [0.5]) == 0.375
        assert f_dual(pen, [1.0]) == 0.5
        assert np.array_equal(eta_hat(pen, [0.5]), [1.0])
        assert eta_in_domain(pen, [1.0])


class TestSentinelArithmetic:
    def test_quad_over_eta_conventions(self):
        assert quad_over_eta(2.0, INF) == 0.0
        assert quad_over_eta(0.0, 0.0) == 0.0
        assert quad_over_eta(2.0, 0.0) == INF
        assert quad_over_eta(2.0, 2.0) == 2.0

    def test_vectorized(self):
        out = quad_over_eta([1.0, 0.0, 3.0], [INF, 0.0, 3.0])
        assert np.array_equal(out, [0.0, 0.0, 3.0])

    def test_l0_sentinels(self):
        pen = L0()
        assert pen.eta_hat_scalar(0.3) == INF
        assert pen.eta_hat_scalar(0.0) == 0.0
        assert pen.f_scalar(0.0) == 0.0
        assert pen.f_scalar(1e-300) == 2.0


class TestTopK:
    def test_ties_break_to_lowest_index(self):
        assert np.array_equal(top_k_indices([1.0, -1.0, 1.0], 2), [0, 1])

    def test_magnitude_order(self):
        assert np.array_equal(top_k_indices([0.1, -5.0, 3.0], 2), [1, 2])

    def test_bounds(self):
        with pytest.raises(ValueError):
            top_k_indices([1.0], 2)


class TestSeparability:
    @pytest.mark.parametrize("pen", SEPARABLE_ZOO, ids=lambda p: type(p).__name__)
    def test_vector_omega_is_sum(self, pen: Penalty):
        w = np.array([0.3, -1.2, 0.0, 2.5])
        total = sum(pen.omega_scalar(float(x)) for x in w)
        assert pen.omega(w) == pytest.approx(total, rel=1e-15)

    def test_flags(self):
        assert not LpNorm(p=1.5).separable
        assert not HardThresh(k=1).separable
        assert all(p.separable for p in SEPARABLE_ZOO)


@settings(max_examples=200, deadline=None)
@given(
    w=st.floats(min_value=-50.0, max_value=50.0, allow_nan=False),
    theta=st.floats(min_value=0.05, max_value=0.95),
)
def test_elasticnet_consistency(w, theta):
    pen = ElasticNet(theta=theta)
    eh = pen.eta_hat_scalar(w)
    total = pen.f_scalar(eh) + quad_over_eta(w, eh)
    assert total == pytest.approx(2.0 * pen.omega_scalar(w), rel=1e-12, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    w=st.floats(min_value=-50.0, max_value=50.0, allow_nan=False),
    eps=st.floats(min_value=0.01, max_value=10.0),
)
def test_huber_consistency(w, eps):
    pen = Huber(eps=eps)
    eh = pen.eta_hat_scalar(w)
    total = pen.f_scalar(eh) + quad_over_eta(w, eh)
    assert total == pytest.approx(2.0 * pen.omega_scalar(w), rel=1e-12, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    w=st.floats(min_value=-20.0, max_value=20.0, allow_nan=False),
    a=st.floats(min_value=1.1, max_value=10.0),
    lam=st.floats(min_value=0.1, max_value=5.0),
)
def test_scad_consistency(w, a, lam):
    pen = Scad(a=a, lam=lam)
    eh = pen.eta_hat_scalar(w)
    total = pen.f_scalar(eh) + quad_over_eta(w, eh) if math.isfinite(eh) else (
        pen.f_scalar(eh) + quad_over_eta(w, eh)
    )
    assert total == pytest.approx(2.0 * pen.omega_scalar(w), rel=1e-11, abs=1e-11)


@settings(max_examples=200, deadline=None)
@given(
    w=st.floats(min_value=-20.0, max_value=20.0, allow_nan=False),
    a=st.floats(min_value=0.2, max_value=10.0),
    lam=st.floats(min_value=0.1, max_value=5.0),
)
def test_mcp_consistency(w, a, lam):
    pen = Mcp(a=a, lam=lam)
    eh = pen.eta_hat_scalar(w)
    total = pen.f_scalar(eh) + quad_over_eta(w, eh)
    assert total == pytest.approx(2.0 * pen.omega_scalar(w), rel=1e-11, abs=1e-11)


@settings(max_examples=100, deadline=None)
@given(
    w=st.lists(st.floats(min_value=-10.0, max_value=10.0), min_size=1, max_size=8),
    p=st.floats(min_value=0.3, max_value=1.9),
)
def test_lp_norm_vector_identity(w, p):
    # w^T diag(eta_hat)^-1 w + f(eta_hat) = 2 ||w||_p by the closed forms.
    # Magnitudes below 1e-6 are snapped to zero: |w|^(2-p) underflows for
    # subnormal w, which is outside the intended working range.
    pen = LpNorm(p=p)
    w = np.asarray([0.0 if abs(x) < 1e-6 else x for x in w])
    eh = pen.eta_hat(w)
    total = float(np.sum(quad_over_eta(w, eh))) + pen.f(eh)
    assert total == pytest.approx(2.0 * pen.omega(w), rel=1e-9, abs=1e-9)


def test_lp_norm_zero_vector():
    pen = LpNorm(p=0.5)
    assert np.array_equal(pen.eta_hat(np.zeros(3)), np.zeros(3))
    assert pen.omega(np.zeros(3)) == 0.0


class TestGradients:
    @pytest.mark.parametrize(
        "pen",
        [L1(), ElasticNet(theta=0.3), Huber(eps=0.7), LogSum(eps=2.0),
         Scad(a=3, lam=1.0), Mcp(a=2, lam=0.5), LpPow(p=1.5)],
        ids=lambda p: type(p).__name__,
    )
    def test_matches_finite_differences(self, pen):
        h = 1e-7
        for w in (-2.3, -0.4, 0.2, 0.9, 1.7, 4.0):
            fd = (pen.omega_scalar(w + h) - pen.omega_scalar(w - h)) / (2 * h)
            assert pen.omega_grad_scalar(w) == pytest.approx(fd, abs=1e-6)

    def test_subgradient_zero_at_origin(self):
        for pen in SEPARABLE_ZOO:
            assert pen.omega_grad_scalar(0.0) == 0.0


class TestGrammar:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("l1", L1()),
            ("lp:p=1.5", LpNorm(p=1.5)),
            ("lppow:p=0.5", LpPow(p=0.5)),
            ("l0", L0()),
            ("elasticnet:theta=0.5", ElasticNet(theta=0.5)),
            ("huber:eps=1", Huber(eps=1.0)),
            ("logsum:eps=2", LogSum(eps=2.0)),
            ("scad:a=3,lambda=1", Scad(a=3.0, lam=1.0)),
            ("mcp:a=1;lambda=1", Mcp(a=1.0, lam=1.0)),
            ("hardthresh:k=5", HardThresh(k=5)),
        ],
    )
    def test_round_trip(self, text, expected):
        assert parse_penalty(text) == expected

    @pytest.mark.parametrize("bad", ["foo", "mcp:a=1", "l1:junk", "huber:eps=zero"])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            parse_penalty(bad)
