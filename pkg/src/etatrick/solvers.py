"""Solvers for penalized linear regression and its masked dual forms.

All solvers minimize (variants of) L(w) + lam * omega(w) with the squared
loss L(w) = ||y - X w||^2 / (2n) on a standardized design, emit a common
per-iteration trace, and are deterministic functions of (problem, config,
seed).  The roster:

  * ``irls``                   alternating exact minimization in w and eta,
  * ``joint_gd``               gradient descent in (w, log eta) jointly,
  * ``ada_tikhonov``           gradient descent in w at eta = eta_hat(w),
  * ``ada_prox``               proximal gradient with eta = eta_hat(w+),
  * ``direct_gd``              (sub)gradient descent on the penalty itself,
  * ``dropout_sgd``            stochastic masking with adaptive keep probs,
  * ``additive_reparam_prox``  two-pass proximal scheme with additive noise,
  * ``iht``                    gradient step plus keep-top-k projection.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .dropout import alpha_from_eta
from .penalties import Penalty, quad_over_eta, top_k_indices

__all__ = [
    "Problem",
    "SolverConfig",
    "Trace",
    "SolutionMetrics",
    "ZeroColumnError",
    "SingularSystemError",
    "standardize",
    "unscale_coefficients",
    "irls",
    "joint_gd",
    "ada_tikhonov",
    "ada_prox",
    "direct_gd",
    "dropout_sgd",
    "additive_reparam_prox",
    "iht",
    "solution_metrics",
    "SOLVERS",
]

INF = math.inf


class ZeroColumnError(ValueError):
    """A design column has zero root-mean-square and cannot be standardized."""


class SingularSystemError(RuntimeError):
    """The reweighted normal matrix stayed singular after ridge jitter."""


class Problem:
    """Linear-regression data (X, y) with cached normal-equation pieces."""

    def __init__(self, X, y):
        self.X = np.asarray(X, dtype=float)
        self.y = np.asarray(y, dtype=float)
        if self.X.ndim != 2:
            raise ValueError("X must be a 2-D array")
        if self.y.shape != (self.X.shape[0],):
            raise ValueError(f"y must have shape ({self.X.shape[0]},), got {self.y.shape}")
        self.n, self.d = self.X.shape
        self._gram = None
        self._xty = None

    @property
    def gram(self) -> np.ndarray:
        if self._gram is None:
            self._gram = self.X.T @ self.X / self.n
        return self._gram

    @property
    def xty(self) -> np.ndarray:
        if self._xty is None:
            self._xty = self.X.T @ self.y / self.n
        return self._xty

    def risk(self, w: np.ndarray) -> float:
        r = self.y - self.X @ w
        return 0.5 * float(r @ r) / self.n

    def grad_risk(self, w: np.ndarray) -> np.ndarray:
        return self.gram @ w - self.xty

    def is_standardized(self, tol: float = 1e-10) -> bool:
        diag = np.einsum("ij,ij->j", self.X, self.X) / self.n
        return bool(np.max(np.abs(diag - 1.0)) <= tol)


def standardize(X_raw) -> tuple[np.ndarray, np.ndarray]:
    """Scale each column to unit root-mean-square so diag(X^T X)/n = I.

    Returns:
        (standardized matrix, per-column scales); dividing a solution on the
        standardized problem by the scales maps it back to raw coordinates.

    Raises:
        ZeroColumnError: some column is identically zero.
    """
    X_raw = np.asarray(X_raw, dtype=float)
    n = X_raw.shape[0]
    scales = np.sqrt(np.einsum("ij,ij->j", X_raw, X_raw) / n)
    if np.any(scales == 0.0) or not np.all(np.isfinite(scales)):
        bad = int(np.flatnonzero(~(scales > 0))[0])
        raise ZeroColumnError(f"column {bad} has zero root-mean-square")
    return X_raw / scales, scales


def unscale_coefficients(w, scales) -> np.ndarray:
    """Map coefficients from standardized back to raw column coordinates."""
    return np.asarray(w, dtype=float) / np.asarray(scales, dtype=float)


@dataclass
class SolverConfig:
    """Shared solver settings.

    ``mask_family`` selects the stochastic mask for the dropout solvers:
    "binary" (unbiased 1/alpha-scaled Bernoulli), "gaussian", or "ones"
    (deterministic all-ones, no dropout noise).  ``eta_init`` seeds the
    reweighted solvers (inf = start unpenalized); joint descent starts at
    log eta = ``log_eta_init``.
    """

    lam: float = 1e-2
    step: float = 0.1
    step_schedule: str = "constant"  # or "linear" (decay to zero)
    iters: int = 100
    seed: int = 0
    mask_family: str | None = None
    log_every: int = 1
    zero_tol: float = 1e-8
    w_init: str = "zeros"  # or "gaussian"
    init_scale: float = 1.0
    eta_init: float = INF
    log_eta_init: float = 5.0

    def __post_init__(self) -> None:
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.step <= 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if self.iters < 1:
            raise ValueError(f"iters must be >= 1, got {self.iters}")
        if self.step_schedule not in ("constant", "linear"):
            raise ValueError(f"unknown step_schedule {self.step_schedule!r}")
        if self.mask_family not in (None, "binary", "gaussian", "ones"):
            raise ValueError(f"unknown mask_family {self.mask_family!r}")
        if self.log_every < 1:
            raise ValueError(f"log_every must be >= 1, got {self.log_every}")
        if self.w_init not in ("zeros", "gaussian"):
            raise ValueError(f"unknown w_init {self.w_init!r}")


class Trace:
    """Per-iteration record of a solver run."""

    def __init__(self, zero_tol: float):
        self.zero_tol = zero_tol
        self.iterations: list[int] = []
        self.w: list[np.ndarray] = []
        self.eta: list[np.ndarray | None] = []
        self.risk: list[float] = []
        self.objective: list[float] = []
        self.nnz: list[int] = []
        self.wall: list[float] = []
        self._t0 = time.perf_counter()

    def log(self, t: int, w: np.ndarray, eta: np.ndarray | None, risk: float, objective: float) -> None:
        self.iterations.append(t)
        self.w.append(w.copy())
        self.eta.append(None if eta is None else np.asarray(eta, dtype=float).copy())
        self.risk.append(risk)
        self.objective.append(objective)
        self.nnz.append(int(np.count_nonzero(np.abs(w) > self.zero_tol)))
        self.wall.append(time.perf_counter() - self._t0)

    @property
    def final_w(self) -> np.ndarray:
        return self.w[-1]

    def to_csv(self, fh, header_lines=(), include_timing: bool = False) -> None:
        """Write the trace as CSV.

        Wall-clock times are omitted unless ``include_timing`` is set, so a
        rerun with identical inputs reproduces the file byte for byte.
        """
        d = self.w[0].size
        has_eta = any(e is not None for e in self.eta)
        for line in header_lines:
            fh.write(f"# {line}\n")
        cols = ["iter", "risk", "objective", "nnz"]
        if include_timing:
            cols.append("wall_seconds")
        cols += [f"w_{j}" for j in range(d)]
        if has_eta:
            cols += [f"eta_{j}" for j in range(d)]
        fh.write(",".join(cols) + "\n")
        for i, t in enumerate(self.iterations):
            row = [str(t), repr(self.risk[i]), repr(self.objective[i]), str(self.nnz[i])]
            if include_timing:
                row.append(repr(self.wall[i]))
            row += [repr(float(x)) for x in self.w[i]]
            if has_eta:
                eta = self.eta[i]
                if eta is None:
                    row += [""] * d
                else:
                    row += [repr(float(x)) for x in eta]
            fh.write(",".join(row) + "\n")


@dataclass
class SolutionMetrics:
    """Support-recovery and error summary of a final iterate."""

    nnz: int
    nnz_fraction: float
    precision: float | None = None
    recall: float | None = None
    exact_support: bool | None = None
    nmse: float | None = None


def solution_metrics(trace, w_true=None, zero_tol: float = 1e-8) -> SolutionMetrics:
    """Summarize a trace (or a bare iterate) against an optional ground truth."""
    w = trace.final_w if isinstance(trace, Trace) else np.asarray(trace, dtype=float)
    support = np.abs(w) > zero_tol
    metrics = SolutionMetrics(nnz=int(support.sum()), nnz_fraction=float(support.mean()))
    if w_true is not None:
        w_true = np.asarray(w_true, dtype=float)
        true_support = w_true != 0
        hit = int(np.count_nonzero(support & true_support))
        metrics.precision = hit / support.sum() if support.any() else 1.0
        metrics.recall = hit / true_support.sum() if true_support.any() else 1.0
        metrics.exact_support = bool(np.array_equal(support, true_support))
        denom = float(w_true @ w_true)
        metrics.nmse = float((w - w_true) @ (w - w_true)) / denom if denom > 0 else None
    return metrics


# -- shared pieces -------------------------------------------------------------


def _require_standardized(problem: Problem) -> None:
    if not problem.is_standardized(tol=1e-8):
        raise ValueError("problem must be standardized (see standardize())")


def _init_w(problem: Problem, config: SolverConfig) -> np.ndarray:
    if config.w_init == "zeros":
        return np.zeros(problem.d)
    rng = np.random.default_rng(config.seed)
    return config.init_scale * rng.standard_normal(problem.d)


def _step_size(config: SolverConfig, t: int) -> float:
    if config.step_schedule == "constant":
        return config.step
    return config.step * (1.0 - t / config.iters)


def _objective(problem: Problem, penalty: Penalty, lam: float, w: np.ndarray) -> tuple[float, float]:
    risk = problem.risk(w)
    return risk, risk + lam * penalty.omega(w)


def _prox_tikhonov(v: np.ndarray, eta: np.ndarray, tau: float) -> np.ndarray:
    """Solve (I + tau diag(eta)^-1) x = v coordinate-wise.

    eta = inf passes the coordinate through untouched; eta = 0 zeroes it.
    """
    out = np.zeros_like(v)
    inf_mask = np.isinf(eta)
    out[inf_mask] = v[inf_mask]
    pos = ~inf_mask & (eta > 0)
    out[pos] = v[pos] * (eta[pos] / (eta[pos] + tau))
    return out


def _reg_gradient(w: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Gradient w / eta of the Tikhonov term, with the limit conventions.

    Coordinates with eta = 0 (and w != 0) have an infinite pull to zero;
    they are returned as 0 here and zeroed by the caller after the step.
    """
    g = np.zeros_like(w)
    ok = np.isfinite(eta) & (eta > 0)
    g[ok] = w[ok] / eta[ok]
    return g


def _draw_mask(family: str, alpha: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if family == "ones":
        return np.ones_like(alpha)
    if family == "binary":
        s = np.zeros_like(alpha)
        on = rng.random(alpha.size) < alpha
        s[on] = 1.0 / alpha[on]
        return s
    if family == "gaussian":
        a = np.clip(alpha, 1e-12, 1.0)
        return 1.0 + np.sqrt(1.0 / a - 1.0) * rng.standard_normal(alpha.size)
    raise ValueError(f"unknown mask family {family!r}")


def _alpha_vector(eta: np.ndarray, lam: float) -> np.ndarray:
    return np.array([alpha_from_eta(float(e), lam) for e in eta])


def _f_prime(penalty: Penalty, eta: float, rel_step: float = 1e-6) -> float:
    h = rel_step * max(abs(eta), 1e-3)
    lo = max(eta - h, 0.0)
    hi = eta + h
    return (penalty.f_scalar(hi) - penalty.f_scalar(lo)) / (hi - lo)


def _solve_reweighted(problem: Problem, eta: np.ndarray, lam: float) -> np.ndarray:
    """Exact minimizer of L(w) + (lam/2) w^T diag(eta)^-1 w.

    Coordinates with eta = 0 are removed from the system (forced to zero);
    eta = inf contributes no regularization.  A ridge jitter of 1e-12 is
    applied if the reduced normal matrix is not positive definite.
    """
    w = np.zeros(problem.d)
    with np.errstate(divide="ignore", over="ignore"):
        ratio = np.where(np.isinf(eta), 0.0, lam / np.where(eta > 0, eta, np.nan))
    # eta = 0 and eta so small that lam/eta overflows are both forced-zero
    active = (eta > 0) & np.isfinite(ratio)
    if not np.any(active):
        return w
    idx = np.flatnonzero(active)
    A = problem.gram[np.ix_(idx, idx)].copy()
    A[np.diag_indices_from(A)] += ratio[idx]
    b = problem.xty[idx]
    try:
        w[idx] = cho_solve(cho_factor(A), b)
    except LinAlgError:
        A[np.diag_indices_from(A)] += 1e-12
        try:
            w[idx] = cho_solve(cho_factor(A), b)
        except LinAlgError as exc:
            raise SingularSystemError("reweighted system singular even after jitter") from exc
    return w


# -- solvers --------------------------------------------------------------------


def _initial_eta(problem: Problem, penalty: Penalty, config: SolverConfig) -> np.ndarray:
    """Project the configured initial eta into the penalty's domain H.

    Separable penalties clip to their interval (a bounded domain starts at
    its least-regularized endpoint); vector-level penalties whose domain
    excludes the all-eta_init vector fall back to eta_hat at the initial w.
    """
    eta = np.full(problem.d, config.eta_init)
    if penalty.separable:
        lo, hi = penalty.eta_domain()
        return np.clip(eta, lo, hi)
    if penalty.eta_in_domain(eta):
        return eta
    return penalty.eta_hat(_init_w(problem, config))


def irls(problem: Problem, penalty: Penalty, config: SolverConfig) -> Trace:
    """Iteratively reweighted least squares: alternate exact w and eta updates.

    Each iteration solves the Tikhonov-regularized normal equations at the
    current eta, then sets eta = eta_hat(w).  Because both half-steps are
    exact minimizations of the joint dual objective, the regularized
    objective L + lam * omega is non-increasing across iterations.
    """
    _require_standardized(problem)
    trace = Trace(config.zero_tol)
    eta = _initial_eta(problem, penalty, config)
    for t in range(1, config.iters + 1):
        w = _solve_reweighted(problem, eta, config.lam)
        eta = penalty.eta_hat(w)
        if t % config.log_every == 0 or t == config.iters:
            risk, obj = _objective(problem, penalty, config.lam, w)
            trace.log(t, w, eta, risk, obj)
    return trace


def joint_gd(problem: Problem, penalty: Penalty, config: SolverConfig) -> Trace:
    """Joint gradient descent in w and log(eta) of the dual objective.

    eta is parameterized as exp of an unconstrained variable, so the descent
    respects eta > 0; requires f differentiable on the iterate path.
    """
    _require_standardized(problem)
    trace = Trace(config.zero_tol)
    w = _init_w(problem, config)
    xi = np.full(problem.d, config.log_eta_init)
    risk, obj = _objective(problem, penalty, config.lam, w)
    trace.log(0, w, np.exp(xi), risk, obj)
    for t in range(config.iters):
        rho = _step_size(config, t)
        eta = np.exp(xi)
        gw = problem.grad_risk(w) + config.lam * _reg_gradient(w, eta)
        fp = np.array([_f_prime(penalty, float(e)) for e in eta])
        gxi = 0.5 * config.lam * (-quad_over_eta(w, eta) + eta * fp)
        w = w - rho * gw
        xi = xi - rho * gxi
        if (t + 1) % config.log_every == 0 or t + 1 == config.iters:
            risk, obj = _objective(problem, penalty, config.lam, w)
            trace.log(t + 1, w, np.exp(xi), risk, obj)
    return trace


def ada_tikhonov(problem: Problem, penalty: Penalty, config: SolverConfig) -> Trace:
    """Gradient descent in w with eta refreshed to eta_hat(w) each iteration."""
    _require_standardized(problem)
    trace = Trace(config.zero_tol)
    w = _init_w(problem, config)
    risk, obj = _objective(problem, penalty, config.lam, w)
    trace.log(0, w, penalty.eta_hat(w), risk, obj)
    for t in range(config.iters):
        rho = _step_size(config, t)
        eta = penalty.eta_hat(w)
        # eta = 0 at a nonzero coordinate means an infinite pull to zero;
        # apply it as the limiting projection.  At w = 0 the subgradient-0
        # convention applies instead and the coordinate moves freely.
        pinned = (eta == 0) & (w != 0)
        g = problem.grad_risk(w) + config.lam * _reg_gradient(w, eta)
        w = w - rho * g
        w[pinned] = 0.0
        if (t + 1) % config.log_every == 0 or t + 1 == config.iters:
            risk, obj = _objective(problem, penalty, config.lam, w)
            trace.log(t + 1, w, eta, risk, obj)
    return trace


def ada_prox(problem: Problem, penalty: Penalty, config: SolverConfig) -> Trace:
    """Proximal gradient descent with eta = eta_hat at the pre-prox iterate."""
    _require_standardized(problem)
    trace = Trace(config.zero_tol)
    w = _init_w(problem, config)
    risk, obj = _objective(problem, penalty, config.lam, w)
    trace.log(0, w, penalty.eta_hat(w), risk, obj)
    for t in range(config.iters):
        rho = _step_size(config, t)
        w_plus = w - rho * problem.grad_risk(w)
        eta = penalty.eta_hat(w_plus)
        w = _prox_tikhonov(w_plus, eta, rho * config.lam)
        if (t + 1) % config.log_every == 0 or t + 1 == config.iters:
            risk, obj = _objective(problem, penalty, config.lam, w)
            trace.log(t + 1, w, eta, risk, obj)
    return trace


def direct_gd(problem: Problem, penalty: Penalty, config: SolverConfig) -> Trace:
    """(Sub)gradient descent on L + lam * omega directly.

    The subgradient of |.| at 0 is taken as 0, so exact zeros stay put until
    the loss gradient moves them.
    """
    _require_standardized(problem)
    trace = Trace(config.zero_tol)
    w = _init_w(problem, config)
    risk, obj = _objective(problem, penalty, config.lam, w)
    trace.log(0, w, None, risk, obj)
    for t in range(config.iters):
        rho = _step_size(config, t)
        g = problem.grad_risk(w) + config.lam * penalty.omega_grad(w)
        w = w - rho * g
        if (t + 1) % config.log_every == 0 or t + 1 == config.iters:
            risk, obj = _objective(problem, penalty, config.lam, w)
            trace.log(t + 1, w, None, risk, obj)
    return trace


def dropout_sgd(problem: Problem, penalty: Penalty, config: SolverConfig) -> Trace:
    """Stochastic masked descent with adaptively updated keep probabilities.

    Each iteration sets alpha_j = eta_hat_j(w) / (eta_hat_j(w) + lam), draws
    a mask s from the configured family, and steps w along the gradient of
    w -> L(s .* w).
    """
    _require_standardized(problem)
    if config.mask_family is None:
        raise ValueError("dropout_sgd requires config.mask_family")
    trace = Trace(config.zero_tol)
    rng = np.random.default_rng(config.seed)
    w = _init_w(problem, config)
    risk, obj = _objective(problem, penalty, config.lam, w)
    trace.log(0, w, penalty.eta_hat(w), risk, obj)
    for t in range(config.iters):
        rho = _step_size(config, t)
        eta = penalty.eta_hat(w)
        alpha = _alpha_vector(eta, config.lam)
        s = _draw_mask(config.mask_family, alpha, rng)
        g = s * problem.grad_risk(s * w)
        w = w - rho * g
        if (t + 1) % config.log_every == 0 or t + 1 == config.iters:
            risk, obj = _objective(problem, penalty, config.lam, w)
            trace.log(t + 1, w, eta, risk, obj)
    return trace


def additive_reparam_prox(problem: Problem, penalty: Penalty, config: SolverConfig) -> Trace:
    """Two-pass proximal scheme under the additive-noise change of variables.

    Per iteration: draw s, take a gradient step on w -> L(w + (s - 1) .* v)
    at v = w (the mask does not multiply the gradient, which is the variance
    reduction), copy v <- w, refresh eta = eta_hat(v), apply the Tikhonov
    proximal map to v, copy back, and update the keep probabilities.  With
    the "ones" mask family this reduces exactly to ada_prox.
    """
    _require_standardized(problem)
    if config.mask_family is None:
        raise ValueError("additive_reparam_prox requires config.mask_family")
    trace = Trace(config.zero_tol)
    rng = np.random.default_rng(config.seed)
    w = _init_w(problem, config)
    v = w.copy()
    alpha = _alpha_vector(penalty.eta_hat(w), config.lam)
    risk, obj = _objective(problem, penalty, config.lam, w)
    trace.log(0, w, penalty.eta_hat(w), risk, obj)
    for t in range(config.iters):
        rho = _step_size(config, t)
        s = _draw_mask(config.mask_family, alpha, rng)
        g = problem.grad_risk(w + (s - 1.0) * v)
        w1 = w - rho * g
        v1 = w1
        eta = penalty.eta_hat(v1)
        v2 = _prox_tikhonov(v1, eta, rho * config.lam)
        w = v2
        v = v2
        alpha = _alpha_vector(eta, config.lam)
        if (t + 1) % config.log_every == 0 or t + 1 == config.iters:
            risk, obj = _objective(problem, penalty, config.lam, w)
            trace.log(t + 1, w, eta, risk, obj)
    return trace


def iht(problem: Problem, k_or_schedule, config: SolverConfig) -> Trace:
    """Iterative hard thresholding: gradient step then keep-top-k.

    ``k_or_schedule`` is either a fixed integer k or a callable
    ``(t, total) -> k`` such as a pruning schedule; ties in magnitude break
    toward the lowest index, matching the hard-threshold eta update.
    """
    _require_standardized(problem)
    trace = Trace(config.zero_tol)
    w = _init_w(problem, config)
    trace.log(0, w, None, problem.risk(w), problem.risk(w))
    for t in range(config.iters):
        rho = _step_size(config, t)
        w_plus = w - rho * problem.grad_risk(w)
        k = k_or_schedule(t + 1, config.iters) if callable(k_or_schedule) else int(k_or_schedule)
        keep = top_k_indices(w_plus, min(k, problem.d))
        w = np.zeros_like(w_plus)
        w[keep] = w_plus[keep]
        if (t + 1) % config.log_every == 0 or t + 1 == config.iters:
            risk = problem.risk(w)
            trace.log(t + 1, w, None, risk, risk)
    return trace


SOLVERS = {
    "irls": irls,
    "joint_gd": joint_gd,
    "ada_tikhonov": ada_tikhonov,
    "ada_prox": ada_prox,
    "direct_gd": direct_gd,
    "dropout_sgd": dropout_sgd,
    "additive_reparam_prox": additive_reparam_prox,
    "iht": iht,
}
