"""Mask distributions, the alpha <-> eta map, and effective penalties.

Covers the four mask families (unbiased binary, Gaussian, biased Bernoulli,
stretched-and-clamped hard-concrete), the reduction of biased masks to
unbiased ones by the mean-rescaling change of variables, the expected
linear-regression loss under masking, and the per-coordinate effective
penalties of four adaptive sparsification methods.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from .duality import Minimize1DOptions, omega_from_f
from .penalties import HardThresh, top_k_indices
from .specialfn import kl_loguniform

__all__ = [
    "UnbiasedBinaryMask",
    "GaussianMask",
    "BiasedBernoulliMask",
    "HardConcreteMask",
    "MaskModel",
    "Standout",
    "VariationalDropout",
    "HardConcreteL0",
    "MagnitudePruning",
    "MethodSpec",
    "DegenerateMaskError",
    "NotStandardizedError",
    "ScalarUnsupportedError",
    "InversionFailedError",
    "sample_mask",
    "mask_moments",
    "alpha_from_eta",
    "eta_from_alpha",
    "biased_reparam",
    "expected_linear_loss",
    "mc_linear_loss",
    "standout_eta_hat",
    "standout_omega",
    "standout_scaled_omega",
    "vardrop_f",
    "hardconcrete_eta_tilde",
    "hardconcrete_a_from_eta",
    "hardconcrete_active_prob",
    "effective_penalty",
    "scaled_effective_penalty",
    "effective_penalty_vector",
    "hardconcrete_penalty_raw",
    "magnitude_pruning_eta_hat",
    "pruning_schedule",
    "parse_method",
    "METHOD_GRAMMAR",
]

INF = math.inf


class DegenerateMaskError(ValueError):
    """Mask has zero variance; the bias reduction degenerates (eta = inf)."""


class NotStandardizedError(ValueError):
    """Design matrix does not satisfy diag(X^T X) / n = I."""


class ScalarUnsupportedError(ValueError):
    """Method only defines a vector-level penalty."""


class InversionFailedError(RuntimeError):
    """Numeric inversion fell outside its bracket or lost monotonicity."""


# -- mask models --------------------------------------------------------------


@dataclass(frozen=True)
class UnbiasedBinaryMask:
    """Mask taking value 1/alpha w.p. alpha, else 0; E[s] = 1, E[s^2] = 1/alpha."""

    alpha: float

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")


@dataclass(frozen=True)
class GaussianMask:
    """Normal(1, 1/alpha - 1) mask; E[s] = 1, E[s^2] = 1/alpha."""

    alpha: float

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")


@dataclass(frozen=True)
class BiasedBernoulliMask:
    """Plain Bernoulli(alpha) mask; biased with E[s] = E[s^2] = alpha."""

    alpha: float

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")


@dataclass(frozen=True)
class HardConcreteMask:
    """Stretched-and-clamped concrete (relaxed Bernoulli) mask.

    s = clamp((zeta - gamma) z + gamma, 0, 1) where
    z = sigmoid((logit(u) + log a) / beta), u ~ Uniform(0, 1).
    Defaults follow the customary beta = 2/3, gamma = -0.1, zeta = 1.1.
    """

    a: float
    beta: float = 2.0 / 3.0
    gamma: float = -0.1
    zeta: float = 1.1

    def __post_init__(self) -> None:
        if self.a <= 0:
            raise ValueError(f"a must be positive, got {self.a}")
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not self.gamma < 0 < self.zeta:
            raise ValueError(f"need gamma < 0 < zeta, got {self.gamma}, {self.zeta}")


MaskModel = Union[UnbiasedBinaryMask, GaussianMask, BiasedBernoulliMask, HardConcreteMask]


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_mask(model: MaskModel, dim: int, seed=0) -> np.ndarray:
    """Draw ``dim`` i.i.d. mask values; deterministic for a given seed."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    rng = _rng(seed)
    if isinstance(model, UnbiasedBinaryMask):
        return (rng.random(dim) < model.alpha) / model.alpha
    if isinstance(model, GaussianMask):
        sd = math.sqrt(1.0 / model.alpha - 1.0)
        return 1.0 + sd * rng.standard_normal(dim)
    if isinstance(model, BiasedBernoulliMask):
        return (rng.random(dim) < model.alpha).astype(float)
    if isinstance(model, HardConcreteMask):
        u = rng.random(dim)
        z = expit((np.log(u) - np.log1p(-u) + math.log(model.a)) / model.beta)
        return np.clip((model.zeta - model.gamma) * z + model.gamma, 0.0, 1.0)
    raise TypeError(f"unknown mask model {model!r}")


# Gauss-Legendre panels for the smooth middle piece of the hard-concrete
# moment integrals, taken in the logit-of-u variable where the integration
# range is a fixed interval independent of a.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)
_GL_PANELS = 8


def _hc_kinks(model: HardConcreteMask) -> tuple[float, float]:
    # q-values of the pre-clamp variable at which s leaves 0 / reaches 1
    z0 = -model.gamma / (model.zeta - model.gamma)
    z1 = (1.0 - model.gamma) / (model.zeta - model.gamma)
    return math.log(z0 / (1.0 - z0)), math.log(z1 / (1.0 - z1))


def _hc_moments(model: HardConcreteMask) -> tuple[float, float]:
    q0, q1 = _hc_kinks(model)
    log_a = math.log(model.a)
    # u = sigmoid(beta q - log a) maps the middle region to q in [q0, q1]
    edges = np.linspace(q0, q1, _GL_PANELS + 1)
    mids = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    q = (mids[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    wts = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    s = (model.zeta - model.gamma) * expit(q) + model.gamma
    jac = model.beta * expit(model.beta * q - log_a) * expit(log_a - model.beta * q)
    m1 = float(np.sum(wts * s * jac))
    m2 = float(np.sum(wts * s * s * jac))
    p_one = float(expit(log_a - model.beta * q1))  # Pr(s = 1) = 1 - u1
    return m1 + p_one, m2 + p_one


def hardconcrete_active_prob(model: HardConcreteMask) -> float:
    """Pr(s > 0) = sigmoid(log a - beta * log(-gamma / zeta))."""
    return float(expit(math.log(model.a) - model.beta * math.log(-model.gamma / model.zeta)))


def mask_moments(model: MaskModel) -> tuple[float, float]:
    """First and second moments (E[s], E[s^2]) of a mask distribution."""
    if isinstance(model, (UnbiasedBinaryMask, GaussianMask)):
        return 1.0, 1.0 / model.alpha
    if isinstance(model, BiasedBernoulliMask):
        return model.alpha, model.alpha
    if isinstance(model, HardConcreteMask):
        return _hc_moments(model)
    raise TypeError(f"unknown mask model {model!r}")


# -- alpha <-> eta -------------------------------------------------------------


def alpha_from_eta(eta: float, lam: float) -> float:
    """Keep-probability parameter alpha = eta / (eta + lam); alpha(inf) = 1."""
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    if eta < 0:
        raise ValueError(f"eta must be non-negative, got {eta}")
    if math.isinf(eta):
        return 1.0
    return eta / (eta + lam)


def eta_from_alpha(alpha: float, lam: float) -> float:
    """Inverse map eta = lam * alpha / (1 - alpha); eta(1) = inf."""
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if alpha == 1.0:
        return INF
    return lam * alpha / (1.0 - alpha)


def biased_reparam(model: MaskModel, lam: float) -> tuple[float, float, float]:
    """Reduce a (possibly biased) mask to unbiased form.

    With mu = E[s], the rescaled mask s/mu is unbiased with effective
    keep parameter alpha_tilde = mu^2 / E[s^2], acting on the rescaled
    weights mu * w.

    Returns:
        (alpha_tilde, eta_tilde, mu).

    Raises:
        DegenerateMaskError: the mask has zero variance.
    """
    mean, second = mask_moments(model)
    if mean <= 0:
        raise DegenerateMaskError(f"mask mean must be positive, got {mean}")
    var = second - mean * mean
    if var <= 0:
        raise DegenerateMaskError("mask variance is zero; eta_tilde would be infinite")
    alpha_t = mean * mean / second
    eta_t = lam * mean * mean / var
    return alpha_t, eta_t, mean


# -- expected loss under masking ----------------------------------------------


def _check_standardized(X: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    n = X.shape[0]
    diag = np.einsum("ij,ij->j", X, X) / n
    if np.max(np.abs(diag - 1.0)) > tol:
        raise NotStandardizedError(
            f"diag(X^T X)/n deviates from 1 by {np.max(np.abs(diag - 1.0)):.3g}"
        )
    return diag


def _linear_risk(X: np.ndarray, y: np.ndarray, w: np.ndarray) -> float:
    r = y - X @ w
    return 0.5 * float(r @ r) / X.shape[0]


def expected_linear_loss(
    X,
    y,
    w,
    alpha,
    mc: bool = False,
    n_samples: int = 10_000,
    seed=0,
    mask_kind: str = "binary",
) -> float:
    """Expected squared loss E[L(s .* w)] under unbiased masking.

    With standardized data the closed form is
    ``L(w) + (1/2) sum_j (1/alpha_j - 1) [X^T X / n]_jj w_j^2``.  With
    ``mc=True`` the expectation is instead estimated by Monte Carlo over
    ``n_samples`` mask draws (``mask_kind`` is "binary" or "gaussian").
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0) or np.any(alpha > 1):
        raise ValueError("alpha entries must be in (0, 1]")
    diag = _check_standardized(X)
    if not mc:
        return _linear_risk(X, y, w) + 0.5 * float(
            np.sum((1.0 / alpha - 1.0) * diag * w * w)
        )
    mean, _ = mc_linear_loss(X, y, w, alpha, n_samples, seed, mask_kind)
    return mean


def mc_linear_loss(
    X, y, w, alpha, n_samples: int, seed=0, mask_kind: str = "binary"
) -> tuple[float, float]:
    """Monte Carlo estimate of E[L(s .* w)] with its standard error."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    rng = _rng(seed)
    n = X.shape[0]
    total = 0.0
    total_sq = 0.0
    chunk = 4096
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        if mask_kind == "binary":
            s = (rng.random((m, alpha.size)) < alpha) / alpha
        elif mask_kind == "gaussian":
            sd = np.sqrt(1.0 / alpha - 1.0)
            s = 1.0 + sd * rng.standard_normal((m, alpha.size))
        elif mask_kind == "bernoulli":
            s = (rng.random((m, alpha.size)) < alpha).astype(float)
        else:
            raise ValueError(f"unknown mask_kind {mask_kind!r}")
        resid = (s * w) @ X.T - y
        losses = 0.5 * np.einsum("ij,ij->i", resid, resid) / n
        total += float(np.sum(losses))
        total_sq += float(np.sum(losses * losses))
        done += m
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    return mean, math.sqrt(var / n_samples)


# -- method characterizations --------------------------------------------------


@dataclass(frozen=True)
class Standout:
    """Activation-level adaptive masking with keep prob sigmoid(z_+)."""

    lam: float = 1.0
    w2: float = 1.0

    def __post_init__(self) -> None:
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")


@dataclass(frozen=True)
class VariationalDropout:
    """Gaussian-mask variational method; dual f is the log-uniform KL."""

    lam: float = 1.0

    def __post_init__(self) -> None:
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")


@dataclass(frozen=True)
class HardConcreteL0:
    """Expected-support penalty with hard-concrete gates."""

    lam: float = 1.0
    beta: float = 2.0 / 3.0
    gamma: float = -0.1
    zeta: float = 1.1

    def __post_init__(self) -> None:
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        HardConcreteMask(a=1.0, beta=self.beta, gamma=self.gamma, zeta=self.zeta)


@dataclass(frozen=True)
class MagnitudePruning:
    """Keep-top-k masking; vector-level hard-threshold penalty."""

    k: int = 0

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ValueError(f"k must be non-negative, got {self.k}")


MethodSpec = Union[Standout, VariationalDropout, HardConcreteL0, MagnitudePruning]


def standout_eta_hat(z_plus, w2, lam: float = 1.0) -> np.ndarray:
    """Update eta_j = lam * exp((z_j)_+) / w2_j^2; inf where w2_j = 0."""
    z = np.maximum(np.atleast_1d(np.asarray(z_plus, dtype=float)), 0.0)
    w2 = np.atleast_1d(np.asarray(w2, dtype=float))
    out = np.full(np.broadcast_shapes(z.shape, w2.shape), INF)
    z, w2 = np.broadcast_arrays(z, w2)
    nz = w2 != 0
    out[nz] = lam * np.exp(z[nz]) / (w2[nz] * w2[nz])
    return out


def standout_scaled_omega(z_plus, w2) -> float:
    """The lam-free product lam * omega: sum_j w2_j^2 (1 - (z_+ + 1) e^{-z_+})."""
    z = np.maximum(np.atleast_1d(np.asarray(z_plus, dtype=float)), 0.0)
    w2 = np.atleast_1d(np.asarray(w2, dtype=float))
    return float(np.sum(w2 * w2 * (1.0 - (z + 1.0) * np.exp(-z))))


def standout_omega(z_plus, w2, lam: float = 1.0) -> float:
    """Effective activation penalty; lam * standout_omega is lam-free."""
    return standout_scaled_omega(z_plus, w2) / lam


def vardrop_f(eta: float, lam: float) -> float:
    """Dual function 2 * KL divergence, as a function of eta at weight lam."""
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    if eta < 0:
        return INF
    if math.isinf(eta):
        return INF
    return 2.0 * kl_loguniform(eta / lam)


# -- hard-concrete eta map and inversion ---------------------------------------

_HC_SCAN_LO = -20.0
_HC_SCAN_HI = 20.0
_HC_SCAN_POINTS = 64


def _hc_ratio(log_a: float, beta: float, gamma: float, zeta: float) -> float:
    # mu^2 / var as a function of log a; eta_tilde = lam * ratio
    mean, second = _hc_moments(HardConcreteMask(a=math.exp(log_a), beta=beta, gamma=gamma, zeta=zeta))
    var = second - mean * mean
    if var <= 0:
        return INF
    return mean * mean / var


@functools.lru_cache(maxsize=None)
def _hc_scan(beta: float, gamma: float, zeta: float) -> tuple[np.ndarray, np.ndarray]:
    log_a = np.linspace(_HC_SCAN_LO, _HC_SCAN_HI, _HC_SCAN_POINTS)
    ratio = np.array([_hc_ratio(float(x), beta, gamma, zeta) for x in log_a])
    if np.any(np.diff(ratio) <= 0):
        raise InversionFailedError(
            "hard-concrete eta map is not monotone over the scanned bracket"
        )
    return log_a, ratio


def hardconcrete_eta_tilde(
    a: float, lam: float, beta: float = 2.0 / 3.0, gamma: float = -0.1, zeta: float = 1.1
) -> float:
    """Effective unbiased eta of a hard-concrete gate: lam * E[s]^2 / Var(s)."""
    if a <= 0:
        raise ValueError(f"a must be positive, got {a}")
    return lam * _hc_ratio(math.log(a), beta, gamma, zeta)


@functools.lru_cache(maxsize=65536)
def _hc_log_a_from_ratio(target: float, beta: float, gamma: float, zeta: float) -> float:
    log_a, ratio = _hc_scan(beta, gamma, zeta)
    if not ratio[0] <= target <= ratio[-1]:
        raise InversionFailedError(
            f"eta_tilde/lam = {target:.6g} outside the invertible range "
            f"[{ratio[0]:.6g}, {ratio[-1]:.6g}]"
        )
    i = int(np.searchsorted(ratio, target))
    lo = float(log_a[max(i - 1, 0)])
    hi = float(log_a[min(i, log_a.size - 1)])
    if lo == hi:
        return lo
    return float(
        brentq(lambda x: _hc_ratio(x, beta, gamma, zeta) - target, lo, hi, xtol=1e-13)
    )


def hardconcrete_a_from_eta(
    eta_tilde: float,
    lam: float,
    beta: float = 2.0 / 3.0,
    gamma: float = -0.1,
    zeta: float = 1.1,
) -> float:
    """Invert the gate parameter a from eta_tilde by bracketed root finding.

    A 64-point scan of log a over [-20, 20] asserts monotonicity of the eta
    map before inverting; targets outside the scanned range raise.

    Raises:
        InversionFailedError: target outside the bracket, or the scan found
            a non-monotone map.
    """
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    return math.exp(_hc_log_a_from_ratio(eta_tilde / lam, beta, gamma, zeta))


@functools.lru_cache(maxsize=262144)
def _hc_f_of_ratio(ratio: float, beta: float, gamma: float, zeta: float) -> float:
    # f(eta_tilde) = 2 Pr(s > 0) at the gate parameter realizing eta_tilde
    try:
        log_a = _hc_log_a_from_ratio(ratio, beta, gamma, zeta)
    except InversionFailedError:
        return INF
    return 2.0 * float(expit(log_a - beta * math.log(-gamma / zeta)))


@functools.lru_cache(maxsize=262144)
def _vardrop_f_of_ratio(ratio: float) -> float:
    return 2.0 * kl_loguniform(ratio)


def effective_penalty(
    method: MethodSpec, w_magnitude: float, opts: Minimize1DOptions | None = None
) -> float:
    """Effective regularization penalty of a sparsification method at |w|.

    For the hard-concrete method the argument is the magnitude of the
    rescaled weight mu .* w produced by the biased-mask reduction (see
    ``hardconcrete_penalty_raw`` for the raw-weight convention).  Magnitude
    pruning has no scalar penalty (its vector penalty is the k-sparse
    indicator) and is rejected.
    """
    if w_magnitude < 0:
        raise ValueError(f"w_magnitude must be non-negative, got {w_magnitude}")
    if isinstance(method, Standout):
        return standout_omega(w_magnitude, method.w2, method.lam)
    if isinstance(method, VariationalDropout):
        lam = method.lam
        value, _ = omega_from_f(
            lambda eta: _vardrop_f_of_ratio(eta / lam), (0.0, INF), w_magnitude, opts
        )
        return value
    if isinstance(method, HardConcreteL0):
        lam, beta, gamma, zeta = method.lam, method.beta, method.gamma, method.zeta
        _, ratio = _hc_scan(beta, gamma, zeta)
        domain = (lam * float(ratio[0]), lam * float(ratio[-1]))
        value, _ = omega_from_f(
            lambda eta: _hc_f_of_ratio(eta / lam, beta, gamma, zeta),
            domain,
            w_magnitude,
            opts,
        )
        return value
    if isinstance(method, MagnitudePruning):
        raise ScalarUnsupportedError(
            "magnitude pruning defines only a vector-level (k-sparse indicator) penalty"
        )
    raise TypeError(f"unknown method {method!r}")


def scaled_effective_penalty(
    method: MethodSpec, w_magnitude: float, opts: Minimize1DOptions | None = None
) -> float:
    """Objective-scale penalty contribution lam * omega_eff(|w|).

    For the standout method the lam-dependence cancels algebraically, so the
    product is computed from the lam-free closed form and is bit-identical
    across lam by construction.
    """
    if isinstance(method, Standout):
        return standout_scaled_omega(w_magnitude, method.w2)
    if isinstance(method, MagnitudePruning):
        raise ScalarUnsupportedError(
            "magnitude pruning defines only a vector-level (k-sparse indicator) penalty"
        )
    return method.lam * effective_penalty(method, w_magnitude, opts)


def effective_penalty_vector(method: MethodSpec, w, opts=None) -> float:
    """Vector penalty: coordinate-wise sum of scalar effective penalties.

    Magnitude pruning maps to the k-sparse indicator (0 inside, inf outside).
    """
    w = np.atleast_1d(np.asarray(w, dtype=float))
    if isinstance(method, MagnitudePruning):
        return HardThresh(k=method.k).omega(w)
    return float(sum(effective_penalty(method, abs(float(x)), opts) for x in w))


def hardconcrete_penalty_raw(
    method: HardConcreteL0, w_tilde: float, opts: Minimize1DOptions | None = None
) -> tuple[float, float]:
    """Hard-concrete penalty point in the raw-weight convention.

    The biased-mask reduction defines the penalty on the rescaled weight
    w_tilde = mu .* w, with the gate mean mu coupled to eta_tilde; the
    penalty therefore has no standalone closed form in the raw w.  What can
    be reported is the parametric curve traced by the optimal gate: given
    |w_tilde|, locate the minimizing eta_tilde, recover the gate mean mu at
    that point, and return the raw magnitude |w| = |w_tilde| / mu together
    with the penalty value.

    Returns:
        (raw weight magnitude, penalty value).
    """
    lam, beta, gamma, zeta = method.lam, method.beta, method.gamma, method.zeta
    _, ratio = _hc_scan(beta, gamma, zeta)
    domain = (lam * float(ratio[0]), lam * float(ratio[-1]))
    value, arg = omega_from_f(
        lambda eta: _hc_f_of_ratio(eta / lam, beta, gamma, zeta), domain, w_tilde, opts
    )
    if math.isinf(arg):
        mu = 1.0  # a -> inf: the gate saturates at s = 1
    elif arg == 0.0:
        mu = 0.0
    else:
        target = min(max(arg / lam, float(ratio[0])), float(ratio[-1]))
        log_a = _hc_log_a_from_ratio(target, beta, gamma, zeta)
        mu, _ = _hc_moments(HardConcreteMask(a=math.exp(log_a), beta=beta, gamma=gamma, zeta=zeta))
    if w_tilde == 0.0:
        return 0.0, value
    return (INF if mu == 0.0 else w_tilde / mu), value


# -- magnitude pruning ----------------------------------------------------------


def magnitude_pruning_eta_hat(w, k: int) -> np.ndarray:
    """inf on the k largest-magnitude coordinates (ties to lowest index), else 0."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    out = np.zeros(w.shape)
    out[top_k_indices(w, k)] = INF
    return out


def pruning_schedule(t: int, total: int, k_final: int, d: int) -> int:
    """Cubic keep-count schedule from d down to k_final.

    k(t) = k_final + (d - k_final) (1 - t/total)^3, rounded to the nearest
    integer; k(0) = d and k(total) = k_final exactly.
    """
    if not 0 <= k_final <= d:
        raise ValueError(f"need 0 <= k_final <= d, got k_final={k_final}, d={d}")
    if total < 0 or not 0 <= t <= max(total, 0):
        raise ValueError(f"need 0 <= t <= total, got t={t}, total={total}")
    if total == 0:
        return k_final
    frac = 1.0 - t / total
    return int(round(k_final + (d - k_final) * frac**3))


# -- string grammar --------------------------------------------------------------

METHOD_GRAMMAR = """\
Method specs are written as NAME or NAME:key=value,...:

  standout:lambda=L,w2=W          activation masking (defaults 1, 1)
  vardrop:lambda=L                variational Gaussian masking (default 1)
  hardconcrete:lambda=L[,beta=B,gamma=G,zeta=Z]
                                  hard-concrete gates (defaults 2/3, -0.1, 1.1)
  magprune:k=K                    keep-top-k pruning  [vector-level only]
"""


def parse_method(text: str) -> MethodSpec:
    """Parse a method spec string like ``vardrop:lambda=1``."""
    name, _, body = text.strip().partition(":")
    name = name.strip().lower()
    params: dict[str, float] = {}
    if body:
        for item in body.replace(";", ",").split(","):
            if "=" not in item:
                raise ValueError(f"malformed method parameter {item!r}")
            key, _, value = item.partition("=")
            key = key.strip().lower()
            try:
                params[key] = int(value) if key == "k" else float(value)
            except ValueError as exc:
                raise ValueError(f"bad value for {key!r}: {value!r}") from exc
    lam = params.pop("lambda", None)
    try:
        if name == "standout":
            return Standout(lam=lam if lam is not None else 1.0, **params)
        if name == "vardrop":
            return VariationalDropout(lam=lam if lam is not None else 1.0, **params)
        if name == "hardconcrete":
            return HardConcreteL0(lam=lam if lam is not None else 1.0, **params)
        if name == "magprune":
            if lam is not None:
                raise ValueError("magprune takes no lambda")
            return MagnitudePruning(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for method {name!r}: {exc}") from exc
    raise ValueError(f"unknown method {name!r}")
