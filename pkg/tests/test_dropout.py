"""Mask models, moment identities, and method effective penalties."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from etatrick.dropout import (
    BiasedBernoulliMask,
    DegenerateMaskError,
    GaussianMask,
    HardConcreteL0,
    HardConcreteMask,
    InversionFailedError,
    MagnitudePruning,
    NotStandardizedError,
    ScalarUnsupportedError,
    Standout,
    UnbiasedBinaryMask,
    VariationalDropout,
    alpha_from_eta,
    biased_reparam,
    effective_penalty,
    effective_penalty_vector,
    eta_from_alpha,
    expected_linear_loss,
    hardconcrete_a_from_eta,
    hardconcrete_active_prob,
    hardconcrete_eta_tilde,
    hardconcrete_penalty_raw,
    magnitude_pruning_eta_hat,
    mask_moments,
    mc_linear_loss,
    parse_method,
    pruning_schedule,
    sample_mask,
    scaled_effective_penalty,
    standout_eta_hat,
    standout_omega,
    standout_scaled_omega,
    vardrop_f,
)
from etatrick.duality import omega_from_eta_hat
from etatrick.penalties import Mcp
from etatrick.solvers import Problem, standardize

from oracles import hardconcrete_moment_by_quadrature

INF = math.inf

# Frozen pipeline outputs for the hard-concrete gate at the default shape
# parameters; each is re-derived against the u-space quadrature oracle below.
HC_GOLDEN = {
    0.1: {"m1": 0.11133182053407731, "m2": 0.07080986026827268, "eta": 0.21218447341505034},
    1.0: {"m1": 0.5, "m2": 0.39801788877589567, "eta": 1.6889850413858345},
    10.0: {"m1": 0.8886681794659228, "m2": 0.8481462192001182, "eta": 13.519301043737824},
}

# Frozen effective-penalty samples (engine at default search options).
VD_EFF_GOLDEN = {0.25: 0.24474720253574195, 0.5: 0.4788020010751421,
                 1.0: 0.9135946374879935, 2.0: 1.6393470191882917}
HC_EFF_GOLDEN = {0.25: 0.4637597236725127, 0.5: 0.8045499203088766,
                 1.0: 1.000000002440069, 2.0: 1.0000000174400692}

VARDROP_F_AT_LAM = 0.8533712085920722  # 2 * KL(1), see test_specialfn goldens


def _standardized_problem(n, d, seed):
    rng = np.random.default_rng(seed)
    X, _ = standardize(rng.standard_normal((n, d)))
    y = rng.standard_normal(n)
    return X, y


class TestSampling:
    def test_degenerate_binary(self):
        assert np.array_equal(sample_mask(UnbiasedBinaryMask(1.0), 4, 0), np.ones(4))

    def test_bernoulli_law_of_large_numbers(self):
        s = sample_mask(BiasedBernoulliMask(0.5), 100_000, 1)
        se = math.sqrt(0.25 / s.size)
        assert abs(s.mean() - 0.5) < 3 * se

    def test_hardconcrete_active_probability(self):
        model = HardConcreteMask(a=1.0)
        p_theory = hardconcrete_active_prob(model)
        assert p_theory == pytest.approx(0.8318, abs=2e-4)
        s = sample_mask(model, 100_000, 2)
        emp = (s > 0).mean()
        se = math.sqrt(p_theory * (1 - p_theory) / s.size)
        assert abs(emp - p_theory) < 3 * se

    def test_seed_determinism(self):
        a = sample_mask(GaussianMask(0.4), 64, 7)
        b = sample_mask(GaussianMask(0.4), 64, 7)
        assert np.array_equal(a, b)

    def test_unbiasedness_3se(self):
        for model in (UnbiasedBinaryMask(0.4), GaussianMask(0.4)):
            s = sample_mask(model, 100_000, 3)
            assert abs(s.mean() - 1.0) < 3 * s.std() / math.sqrt(s.size)
            sq = s * s
            assert abs(sq.mean() - 2.5) < 3 * sq.std() / math.sqrt(s.size)

    def test_dim_validation(self):
        with pytest.raises(ValueError):
            sample_mask(GaussianMask(0.5), 0, 0)


class TestMoments:
    def test_gaussian(self):
        assert mask_moments(GaussianMask(0.25)) == (1.0, 4.0)

    def test_bernoulli(self):
        assert mask_moments(BiasedBernoulliMask(0.3)) == (0.3, 0.3)

    @pytest.mark.parametrize("a", [0.1, 1.0, 10.0])
    def test_hardconcrete_vs_quadrature_oracle(self, a):
        model = HardConcreteMask(a=a)
        m1, m2 = mask_moments(model)
        assert m1 == pytest.approx(HC_GOLDEN[a]["m1"], abs=1e-12)
        assert m2 == pytest.approx(HC_GOLDEN[a]["m2"], abs=1e-12)
        assert m1 == pytest.approx(hardconcrete_moment_by_quadrature(model, 1), abs=1e-10)
        assert m2 == pytest.approx(hardconcrete_moment_by_quadrature(model, 2), abs=1e-10)

    def test_hardconcrete_vs_monte_carlo(self):
        model = HardConcreteMask(a=1.0)
        m1, m2 = mask_moments(model)
        s = sample_mask(model, 1_000_000, 11)
        assert abs(m1 - s.mean()) < 3 * s.std() / math.sqrt(s.size)
        sq = s * s
        assert abs(m2 - sq.mean()) < 3 * sq.std() / math.sqrt(s.size)


class TestAlphaEtaMap:
    def test_basic(self):
        assert alpha_from_eta(1.0, 1.0) == 0.5
        assert alpha_from_eta(INF, 1.0) == 1.0
        assert eta_from_alpha(0.9, 2.0) == pytest.approx(18.0, rel=1e-12)
        assert eta_from_alpha(1.0, 2.0) == INF

    @settings(max_examples=200, deadline=None)
    @given(
        eta=st.floats(min_value=0.0, max_value=1e8),
        lam=st.floats(min_value=1e-3, max_value=1e3),
    )
    def test_mutually_inverse(self, eta, lam):
        # recovering eta from alpha cancels in (1 - alpha), so the round trip
        # is conditioned like eta / lam
        rel = 64 * 2**-52 * (1.0 + eta / lam)
        assert eta_from_alpha(alpha_from_eta(eta, lam), lam) == pytest.approx(
            eta, rel=max(rel, 1e-12), abs=1e-12
        )

    def test_validation(self):
        with pytest.raises(ValueError):
            alpha_from_eta(1.0, 0.0)
        with pytest.raises(ValueError):
            eta_from_alpha(1.5, 1.0)


class TestBiasedReparam:
    def test_bernoulli(self):
        assert biased_reparam(BiasedBernoulliMask(0.5), 1.0) == (0.5, 1.0, 0.5)

    def test_already_unbiased(self):
        alpha_t, eta_t, mu = biased_reparam(UnbiasedBinaryMask(0.5), 1.0)
        assert (alpha_t, eta_t, mu) == (0.5, 1.0, 1.0)

    def test_hardconcrete_consistent_with_eta_map(self):
        model = HardConcreteMask(a=1.0)
        alpha_t, eta_t, mu = biased_reparam(model, 1.0)
        assert eta_t == pytest.approx(hardconcrete_eta_tilde(1.0, 1.0), rel=1e-12)
        assert mu == pytest.approx(0.5, abs=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateMaskError):
            biased_reparam(UnbiasedBinaryMask(1.0), 1.0)


class TestExpectedLoss:
    def test_orthogonal_design_penalty_term(self):
        X = np.eye(2) * math.sqrt(2.0)
        y = np.zeros(2)
        w = np.ones(2)
        total = expected_linear_loss(X, y, w, [0.5, 0.5])
        risk = 0.5 * float((X @ w) @ (X @ w)) / 2
        assert total - risk == pytest.approx(1.0, abs=1e-12)

    def test_alpha_one_is_exact_risk(self):
        X, y = _standardized_problem(50, 6, 0)
        w = np.random.default_rng(1).standard_normal(6)
        risk = Problem(X, y).risk(w)
        assert expected_linear_loss(X, y, w, np.ones(6)) == risk

    def test_rejects_unstandardized(self):
        X = np.random.default_rng(0).standard_normal((20, 3)) * 7.0
        with pytest.raises(NotStandardizedError):
            expected_linear_loss(X, np.zeros(20), np.ones(3), np.ones(3))

    @pytest.mark.parametrize("kind", ["binary", "gaussian"])
    def test_monte_carlo_agrees(self, kind):
        X, y = _standardized_problem(200, 10, 3)
        rng = np.random.default_rng(4)
        w = rng.standard_normal(10)
        alpha = rng.uniform(0.3, 1.0, 10)
        closed = expected_linear_loss(X, y, w, alpha)
        mc, se = mc_linear_loss(X, y, w, alpha, 100_000, seed=5, mask_kind=kind)
        assert abs(mc - closed) < 3 * se

    def test_mc_flag_returns_estimate(self):
        X, y = _standardized_problem(50, 4, 6)
        w = np.ones(4)
        alpha = np.full(4, 0.5)
        est = expected_linear_loss(X, y, w, alpha, mc=True, n_samples=20_000, seed=7)
        assert est == pytest.approx(expected_linear_loss(X, y, w, alpha), rel=0.05)


class TestStandout:
    def test_eta_hat_values(self):
        assert standout_eta_hat([0.0], [1.0], 1.0)[0] == 1.0
        assert standout_eta_hat([1.0], [2.0], 1.0)[0] == pytest.approx(math.e / 4, rel=1e-15)
        assert standout_eta_hat([0.0], [0.0], 1.0)[0] == INF

    def test_omega_values(self):
        assert standout_omega([0.0], [1.0], 1.0) == 0.0
        assert standout_omega([1.0], [1.0], 1.0) == pytest.approx(1 - 2 / math.e, rel=1e-15)
        assert standout_omega([50.0], [1.0], 1.0) == pytest.approx(1.0, abs=1e-15)

    def test_negative_preactivations_no_contribution(self):
        assert standout_omega([-3.0], [1.0], 1.0) == 0.0

    def test_closed_form_matches_quadrature(self):
        lam, w2 = 1.0, 1.0
        for z in np.linspace(0.0, 8.0, 33):
            z = float(z)
            quad = omega_from_eta_hat(
                lambda s: float(standout_eta_hat([s], [w2], lam)[0]), z
            )
            assert abs(quad - standout_omega([z], [w2], lam)) < 1e-8

    def test_lambda_invariance_exact(self):
        z = np.linspace(0.0, 8.0, 81)
        base = np.array([scaled_effective_penalty(Standout(lam=1.0), float(t)) for t in z])
        for lam in (0.1, 10.0):
            got = np.array(
                [scaled_effective_penalty(Standout(lam=lam), float(t)) for t in z]
            )
            assert np.array_equal(got, base)

    def test_factored_route_within_rounding(self):
        # lam * (base / lam) costs at most one ulp against the lam-free path
        z = np.linspace(0.0, 8.0, 81)
        for lam in (0.1, 10.0):
            got = np.array([lam * standout_omega([t], [1.0], lam) for t in z])
            base = np.array([standout_scaled_omega([t], [1.0]) for t in z])
            assert np.max(np.abs(got - base)) <= 2 ** -52


class TestVardropDual:
    def test_zero(self):
        assert vardrop_f(0.0, 1.0) == 0.0

    def test_golden_at_eta_equals_lam(self):
        assert vardrop_f(1.0, 1.0) == pytest.approx(VARDROP_F_AT_LAM, abs=1e-10)
        assert vardrop_f(2.0, 2.0) == pytest.approx(VARDROP_F_AT_LAM, abs=1e-10)

    def test_monotone(self):
        assert vardrop_f(2.0, 1.0) > vardrop_f(1.0, 1.0)


class TestHardConcreteEtaMap:
    @pytest.mark.parametrize("a", [0.1, 1.0, 10.0])
    def test_golden_values(self, a):
        assert hardconcrete_eta_tilde(a, 1.0) == pytest.approx(HC_GOLDEN[a]["eta"], rel=1e-10)

    def test_lambda_scaling(self):
        assert hardconcrete_eta_tilde(1.0, 3.0) == pytest.approx(
            3.0 * hardconcrete_eta_tilde(1.0, 1.0), rel=1e-14
        )

    @pytest.mark.parametrize("a", [0.05, 0.7, 1.0, 4.0, 50.0])
    def test_round_trip(self, a):
        eta = hardconcrete_eta_tilde(a, 1.0)
        assert hardconcrete_a_from_eta(eta, 1.0) == pytest.approx(a, rel=1e-6)

    def test_inversion_outside_bracket(self):
        with pytest.raises(InversionFailedError):
            hardconcrete_a_from_eta(1e300, 1.0)

    def test_active_prob_closed_form(self):
        # Pr(s > 0) = sigmoid(log a + beta log 11) at the default shape
        model = HardConcreteMask(a=1.0)
        expected = 1.0 / (1.0 + math.exp(-(2.0 / 3.0) * math.log(11.0)))
        assert hardconcrete_active_prob(model) == pytest.approx(expected, rel=1e-14)


class TestEffectivePenalties:
    def test_vardrop_at_zero(self):
        assert effective_penalty(VariationalDropout(1.0), 0.0) == 0.0

    @pytest.mark.parametrize("w", sorted(VD_EFF_GOLDEN))
    def test_vardrop_golden(self, w):
        assert effective_penalty(VariationalDropout(1.0), w) == pytest.approx(
            VD_EFF_GOLDEN[w], abs=1e-9
        )

    @pytest.mark.parametrize("w", sorted(HC_EFF_GOLDEN))
    def test_hardconcrete_golden(self, w):
        assert effective_penalty(HardConcreteL0(1.0), w) == pytest.approx(
            HC_EFF_GOLDEN[w], abs=1e-9
        )

    def test_standout_scalar(self):
        assert effective_penalty(Standout(1.0, 1.0), 1.0) == pytest.approx(
            1 - 2 / math.e, rel=1e-15
        )

    def test_monotone_nondecreasing(self):
        grid = np.linspace(0.0, 4.0, 33)
        for method in (VariationalDropout(1.0), HardConcreteL0(1.0)):
            vals = [effective_penalty(method, float(w)) for w in grid]
            assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_magnitude_pruning_scalar_rejected(self):
        with pytest.raises(ScalarUnsupportedError):
            effective_penalty(MagnitudePruning(5), 1.0)
        with pytest.raises(ScalarUnsupportedError):
            scaled_effective_penalty(MagnitudePruning(5), 1.0)

    def test_magnitude_pruning_vector_indicator(self):
        assert effective_penalty_vector(MagnitudePruning(2), [1.0, 0.0, 2.0]) == 0.0
        assert effective_penalty_vector(MagnitudePruning(1), [1.0, 0.0, 2.0]) == INF

    def test_vector_sums_scalars(self):
        method = VariationalDropout(1.0)
        total = effective_penalty_vector(method, [0.5, -1.0])
        parts = effective_penalty(method, 0.5) + effective_penalty(method, 1.0)
        assert total == pytest.approx(parts, rel=1e-12)

    def test_raw_convention_parametric_point(self):
        method = HardConcreteL0(1.0)
        raw, val = hardconcrete_penalty_raw(method, 0.5)
        assert val == pytest.approx(HC_EFF_GOLDEN[0.5], abs=1e-9)
        assert raw > 0.5  # gate mean < 1 stretches the raw weight
        raw0, val0 = hardconcrete_penalty_raw(method, 0.0)
        assert raw0 == 0.0 and val0 < 1e-6


class TestMcpBernoulliIdentity:
    def test_dual_matches_keep_probability(self):
        # the expected-support dual of a Bernoulli gate at unit weight is the
        # MCP(1,1) dual: both are eta / (eta + 1)
        pen = Mcp(a=1.0, lam=1.0)
        for eta in np.geomspace(1e-6, 1e6, 1000):
            eta = float(eta)
            assert abs(pen.f_scalar(eta) - alpha_from_eta(eta, 1.0)) <= 1e-12


class TestMagnitudePruning:
    def test_eta_hat(self):
        out = magnitude_pruning_eta_hat([3.0, -1.0, 2.0], 2)
        assert np.array_equal(out, [INF, 0.0, INF])

    def test_schedule_endpoints(self):
        assert pruning_schedule(0, 10, 7, 100) == 100
        assert pruning_schedule(10, 10, 7, 100) == 7

    def test_schedule_cubic_midpoint(self):
        assert pruning_schedule(5, 10, 10, 100) == 21  # 10 + 90 * 0.5^3 = 21.25

    def test_schedule_validation(self):
        with pytest.raises(ValueError):
            pruning_schedule(3, 2, 1, 10)
        with pytest.raises(ValueError):
            pruning_schedule(0, 5, 20, 10)


class TestMethodGrammar:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("standout:lambda=1,w2=1", Standout(lam=1.0, w2=1.0)),
            ("vardrop:lambda=1", VariationalDropout(lam=1.0)),
            ("hardconcrete:lambda=1", HardConcreteL0(lam=1.0)),
            ("hardconcrete:lambda=2,beta=0.5", HardConcreteL0(lam=2.0, beta=0.5)),
            ("magprune:k=5", MagnitudePruning(k=5)),
            ("vardrop", VariationalDropout(lam=1.0)),
        ],
    )
    def test_round_trip(self, text, expected):
        assert parse_method(text) == expected

    @pytest.mark.parametrize("bad", ["nope", "vardrop:lambda=x", "magprune:lambda=1"])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            parse_method(bad)
