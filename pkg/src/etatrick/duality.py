"""Numeric engine for the quadratic dual representation of penalties.

Converts between the three members of a dual triple when no closed form is
available, and brute-force-verifies the closed-form pairs:

  * ``omega_from_f``      minimizes  (1/2) (w^2/eta + f(eta))  over eta in H,
  * ``f_from_omega``      maximizes  u * (-1/eta) + 2 omega(sqrt(u))  over u,
  * ``omega_from_eta_hat`` integrates 1 / (2 eta_hat(sqrt(t))) in t = w^2,
  * ``eta_hat_from_omega`` differentiates omega in the w^2 variable.

All four treat eta = 0 (dropped coordinate) and eta = inf (unpenalized
coordinate) via explicit limit conventions, and the 1-D searches are blind
to any closed-form eta_hat so they can serve as an independent oracle.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass

import numpy as np

from .penalties import HardThresh, LpNorm, Penalty, quad_over_eta
from .specialfn import QuadratureOptions, quad_adaptive

__all__ = [
    "Minimize1DOptions",
    "EmptyDomainError",
    "NonMonotoneUpdateError",
    "omega_from_f",
    "f_from_omega",
    "omega_from_eta_hat",
    "eta_hat_from_omega",
    "subquadratic_check",
    "check_dual_pair",
    "DualPairReport",
]

INF = math.inf
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

ScalarFn = Callable[[float], float]


@dataclass(frozen=True)
class Minimize1DOptions:
    """Log-spaced bracket and refinement settings for the 1-D searches."""

    grid_lo: float = 1e-8
    grid_hi: float = 1e8
    grid_points: int = 256
    refine_tol: float = 1e-10

    def __post_init__(self) -> None:
        if not 0 < self.grid_lo < self.grid_hi:
            raise ValueError("need 0 < grid_lo < grid_hi")
        if self.grid_points < 64:
            raise ValueError(f"grid_points must be >= 64, got {self.grid_points}")
        if self.refine_tol <= 0:
            raise ValueError("refine_tol must be positive")


class EmptyDomainError(ValueError):
    """The domain H does not intersect the search bracket."""


class NonMonotoneUpdateError(ValueError):
    """eta_hat decreased somewhere on the sampled integration range."""


def _golden_refine(
    fn: ScalarFn, lo: float, hi: float, rel_tol: float
) -> tuple[float, float]:
    """Golden-section minimize fn over [lo, hi] in log coordinates.

    Returns the best (x, fn(x)) pair among every point evaluated, so the
    result is never worse than either bracket endpoint.
    """
    la, lb = math.log(lo), math.log(hi)
    best_x, best_v = lo, fn(lo)
    v_hi = fn(hi)
    if v_hi < best_v:
        best_x, best_v = hi, v_hi
    c = lb - _INVPHI * (lb - la)
    d = la + _INVPHI * (lb - la)
    fc = fn(math.exp(c))
    fd = fn(math.exp(d))
    while lb - la > rel_tol:
        if fc <= fd:
            lb, d, fd = d, c, fc
            c = lb - _INVPHI * (lb - la)
            fc = fn(math.exp(c))
            x, v = math.exp(c), fc
        else:
            la, c, fc = c, d, fd
            d = la + _INVPHI * (lb - la)
            fd = fn(math.exp(d))
            x, v = math.exp(d), fd
        if v < best_v:
            best_x, best_v = x, v
    return best_x, best_v


def _grid_with_endpoints(
    lo: float, hi: float, points: int, extra: Iterable[float]
) -> np.ndarray:
    grid = np.geomspace(lo, hi, points)
    extras = [x for x in extra if math.isfinite(x) and lo < x < hi]
    if extras:
        grid = np.unique(np.concatenate([grid, np.asarray(extras)]))
    return grid


def omega_from_f(
    f: ScalarFn,
    domain: tuple[float, float],
    w: float,
    opts: Minimize1DOptions | None = None,
) -> tuple[float, float]:
    """Recover omega(w) = min over eta in H of (1/2)(w^2/eta + f(eta)).

    The minimum is located on a log grid and refined by golden section.  A
    minimum lying on the top of the bracket with a flat or falling tail is
    reported with ``argmin = inf``; if 0 is in H and beats every positive
    candidate, ``argmin = 0``.

    Returns:
        (omega value, minimizing eta).
    """
    if opts is None:
        opts = Minimize1DOptions()
    dom_lo, dom_hi = domain
    lo = max(opts.grid_lo, dom_lo if dom_lo > 0 else opts.grid_lo)
    hi = min(opts.grid_hi, dom_hi)
    if not lo < hi:
        raise EmptyDomainError(f"domain {domain} does not intersect the bracket")

    def phi(eta: float) -> float:
        return 0.5 * (quad_over_eta(w, eta) + f(eta))

    grid = _grid_with_endpoints(lo, hi, opts.grid_points, [dom_lo, dom_hi])
    vals = np.array([phi(float(g)) for g in grid])
    i = int(np.argmin(vals))
    b_lo = grid[max(i - 1, 0)]
    b_hi = grid[min(i + 1, grid.size - 1)]
    best_eta, best_val = _golden_refine(phi, float(b_lo), float(b_hi), opts.refine_tol)
    if vals[i] < best_val:
        best_eta, best_val = float(grid[i]), float(vals[i])

    # eta -> inf plateau: the top of the bracket keeps (weakly) improving.
    if i == grid.size - 1 and vals[-1] <= vals[-2] and math.isinf(dom_hi):
        return float(vals[-1]), INF
    # eta = 0 boundary (dropped coordinate / empty integral of f).
    if dom_lo == 0.0:
        phi0 = phi(0.0)
        if phi0 <= best_val:
            return float(phi0), 0.0
    return float(best_val), float(best_eta)


def f_from_omega(
    omega: ScalarFn, eta: float, opts: Minimize1DOptions | None = None
) -> float:
    """Recover f(eta) = sup over u >= 0 of -u/eta + 2 omega(sqrt(u)).

    A supremum that keeps growing at the top of the bracket is reported as
    +inf (eta outside the effective domain of a divergent pair).  A supremum
    attained only at u = 0, strictly dominating every positive u, signals
    that eta sits below the reach of eta_hat; such points are reported as
    +inf to match the domain-restricted closed forms.
    """
    if opts is None:
        opts = Minimize1DOptions()
    if eta < 0:
        return INF
    if eta == 0.0:
        return 2.0 * omega(0.0)

    def neg_psi(u: float) -> float:
        return u / eta - 2.0 * omega(math.sqrt(u))

    grid = np.geomspace(opts.grid_lo, opts.grid_hi, opts.grid_points)
    vals = np.array([neg_psi(float(g)) for g in grid])
    i = int(np.argmin(vals))
    if i == grid.size - 1 and vals[-1] <= vals[-2]:
        return INF
    b_lo = grid[max(i - 1, 0)]
    b_hi = grid[min(i + 1, grid.size - 1)]
    best_u, best_neg = _golden_refine(neg_psi, float(b_lo), float(b_hi), opts.refine_tol)
    if vals[i] < best_neg:
        best_neg = float(vals[i])
    psi0 = 2.0 * omega(0.0)
    if psi0 > -best_neg:
        return INF
    return float(-best_neg)


def omega_from_eta_hat(
    eta_hat: ScalarFn,
    w: float,
    anchor: float = 0.0,
    anchor_value: float = 0.0,
    quad_opts: QuadratureOptions | None = None,
    monotone_samples: int = 64,
) -> float:
    """Reconstruct omega(w) by integrating the reciprocal update.

    Evaluates ``anchor_value + int_anchor^{w^2} dt / (2 eta_hat(sqrt(t)))``,
    computed after the substitution t = s^2 which renders the integrand
    s / eta_hat(s) smooth for every update in the zoo.  ``anchor`` is in the
    t = w^2 variable.

    Raises:
        NonMonotoneUpdateError: eta_hat decreases on the sampled range (the
            update then does not come from a subquadratic penalty).
        ValueError: eta_hat is non-positive strictly inside the range.
    """
    s_lo = math.sqrt(anchor)
    s_hi = abs(w)
    if s_hi == s_lo:
        return anchor_value
    sign = 1.0
    if s_hi < s_lo:
        s_lo, s_hi = s_hi, s_lo
        sign = -1.0

    samples = np.linspace(s_lo, s_hi, monotone_samples)
    vals = np.array([eta_hat(float(s)) for s in samples])
    drops = np.diff(vals) < -1e-12 * np.maximum(np.abs(vals[:-1]), 1.0)
    if np.any(drops):
        s_bad = samples[1:][drops][0]
        raise NonMonotoneUpdateError(f"eta_hat decreases near |w| = {s_bad:.6g}")
    if np.any(vals[1:] <= 0):
        raise ValueError("eta_hat must be strictly positive on the integration range")

    def integrand(s: float) -> float:
        if s <= 0.0:
            s = 1e-150  # limit probe; eta_hat(0) = 0 updates have finite s/eta_hat
        e = eta_hat(s)
        if e <= 0.0:
            return INF
        return s / e

    return anchor_value + sign * quad_adaptive(integrand, s_lo, s_hi, quad_opts)


def eta_hat_from_omega(
    omega: ScalarFn, w: float, fd_step: float | None = None
) -> float:
    """Minimizing eta from omega via the derivative in the u = w^2 variable.

    Central finite difference of omega(sqrt(u)); returns +inf when the
    derivative vanishes (flat penalty, unpenalized coordinate).
    """
    u = w * w
    h = fd_step if fd_step is not None else max(1e-6, 1e-6 * u)
    u_lo = max(u - h, 0.0)
    u_hi = u + h
    d = (omega(math.sqrt(u_hi)) - omega(math.sqrt(u_lo))) / (u_hi - u_lo)
    if d <= 0.0:
        return INF
    return 1.0 / (2.0 * d)


def subquadratic_check(
    omega: ScalarFn, u_grid, tol: float = 1e-8
) -> tuple[bool, float]:
    """Concavity of g(u) = omega(sqrt(u)) by second central differences.

    ``u_grid`` should be uniformly spaced; the (undivided) differences
    g[i-1] - 2 g[i] + g[i+1] must all stay below ``tol``.  Affine g (plain
    quadratic penalties) passes with zero curvature.

    Returns:
        (all differences <= tol, worst difference observed).
    """
    u = np.asarray(u_grid, dtype=float)
    if u.size < 3:
        raise ValueError("u_grid needs at least 3 points")
    g = np.array([omega(math.sqrt(float(x))) for x in u])
    second = g[:-2] - 2.0 * g[1:-1] + g[2:]
    worst = float(np.max(second))
    return worst <= tol, worst


@dataclass
class DualPairReport:
    """Worst-case deviations from a brute-force check of one dual pair."""

    name: str
    max_omega_dev: float
    max_argmin_rel_err: float
    n_points: int
    omega_tol: float
    argmin_rtol: float
    notes: str = ""

    @property
    def passed(self) -> bool:
        return (
            self.max_omega_dev <= self.omega_tol
            and self.max_argmin_rel_err <= self.argmin_rtol
        )


def _hardthresh_brute(penalty: HardThresh, vectors) -> DualPairReport:
    # Enumerate every support of size <= k; with f = 0 the dual objective is
    # 0 when supp(w) fits inside the chosen support and inf otherwise.
    from itertools import combinations

    worst = 0.0
    count = 0
    for w in vectors:
        w = np.asarray(w, dtype=float)
        d = w.size
        best = INF
        best_eta = None
        for size in range(min(penalty.k, d) + 1):
            for supp in combinations(range(d), size):
                eta = np.zeros(d)
                eta[list(supp)] = INF
                val = 0.5 * (np.sum(quad_over_eta(w, eta)) + penalty.f(eta))
                if val < best:
                    best, best_eta = val, eta
        target = penalty.omega(w)
        dev = 0.0 if best == target else abs(best - target)
        worst = max(worst, dev)
        count += 1
    return DualPairReport(
        name=f"hardthresh:k={penalty.k}",
        max_omega_dev=worst,
        max_argmin_rel_err=0.0,
        n_points=count,
        omega_tol=0.0,
        argmin_rtol=INF,
        notes="combinatorial support enumeration",
    )


def check_dual_pair(
    penalty: Penalty,
    w_grid=None,
    tol: float = 1e-6,
    argmin_rtol: float = 1e-4,
    opts: Minimize1DOptions | None = None,
    name: str = "",
) -> DualPairReport:
    """Verify a closed-form dual triple against the numeric minimizer.

    For separable penalties the scalar dual objective is minimized blindly
    on ``w_grid`` (default: 64 log-spaced points in [1e-3, 10]) and compared
    against the closed-form omega; the located argmin is compared against
    eta_hat wherever the latter is finite and nonzero.  HardThresh is checked
    by support enumeration on small test vectors, and the vector p-norm by
    its scalar reduction plus the exact identity at eta_hat on the grid
    embedded in R^3.
    """
    if opts is None:
        opts = Minimize1DOptions()
    if isinstance(penalty, HardThresh):
        d = max(penalty.k + 1, 3)
        rng = np.random.default_rng(0)
        vectors = [rng.standard_normal(d) for _ in range(8)]
        vectors += [np.zeros(d), np.eye(d)[0] * 2.0]
        report = _hardthresh_brute(penalty, vectors)
        report.omega_tol = tol
        return report

    if w_grid is None:
        w_grid = np.geomspace(1e-3, 10.0, 64)
    w_grid = np.asarray(w_grid, dtype=float)

    if isinstance(penalty, LpNorm):
        # Vector identity at eta_hat: w^T diag(eta_hat)^-1 w + f(eta_hat)
        # equals 2 ||w||_p exactly by the closed-form algebra.
        worst = 0.0
        for w in w_grid:
            vec = np.array([w, 0.5 * w, 0.25 * w])
            eh = penalty.eta_hat(vec)
            val = 0.5 * (np.sum(quad_over_eta(vec, eh)) + penalty.f(eh))
            worst = max(worst, abs(val - penalty.omega(vec)))
        return DualPairReport(
            name=name or f"lp:p={penalty.p}",
            max_omega_dev=worst,
            max_argmin_rel_err=0.0,
            n_points=w_grid.size,
            omega_tol=tol,
            argmin_rtol=argmin_rtol,
            notes="vector identity at eta_hat",
        )

    worst_omega = 0.0
    worst_arg = 0.0
    for w in w_grid:
        value, arg = omega_from_f(penalty.f_scalar, penalty.eta_domain(), float(w), opts)
        worst_omega = max(worst_omega, abs(value - penalty.omega_scalar(float(w))))
        eh = penalty.eta_hat_scalar(float(w))
        if math.isfinite(eh) and eh > 0 and math.isfinite(arg):
            worst_arg = max(worst_arg, abs(arg - eh) / eh)
    return DualPairReport(
        name=name or type(penalty).__name__.lower(),
        max_omega_dev=worst_omega,
        max_argmin_rel_err=worst_arg,
        n_points=w_grid.size,
        omega_tol=tol,
        argmin_rtol=argmin_rtol,
    )
