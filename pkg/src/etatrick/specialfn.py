"""Special functions and quadrature used by the dual-penalty machinery.

Provides Dawson's integral F(u) = exp(-u^2) * int_0^u exp(t^2) dt, the
log-uniform KL integral int_0^b F(sqrt(t/2)) / sqrt(2t) dt that appears as
the dual function of variational dropout, and a small adaptive Simpson
integrator with handling for integrable endpoint singularities.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

from scipy.special import dawsn

__all__ = [
    "QuadratureOptions",
    "DepthExceededError",
    "quad_adaptive",
    "dawson",
    "kl_integrand",
    "kl_loguniform",
]

ScalarFn = Callable[[float], float]


@dataclass(frozen=True)
class QuadratureOptions:
    """Absolute tolerance and recursion cap for adaptive Simpson."""

    abs_tol: float = 1e-10
    max_depth: int = 40

    def __post_init__(self) -> None:
        if self.abs_tol <= 0:
            raise ValueError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")


class DepthExceededError(RuntimeError):
    """Adaptive subdivision hit max_depth before reaching the tolerance."""


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive(
    fn: ScalarFn,
    a: float,
    b: float,
    fa: float,
    fm: float,
    fb: float,
    whole: float,
    tol: float,
    depth: int,
    max_depth: int,
) -> float:
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = fn(lm)
    frm = fn(rm)
    left = _simpson(fa, flm, fm, m - a)
    right = _simpson(fm, frm, fb, b - m)
    err = (left + right - whole) / 15.0
    # Stop once the estimate is below the requested tolerance or the
    # roundoff floor of the accumulated value, whichever is larger.
    floor = 2.0**-52 * (abs(left) + abs(right))
    if abs(err) <= max(tol, floor):
        return left + right + err
    if depth >= max_depth:
        raise DepthExceededError(
            f"adaptive Simpson did not converge on [{a}, {b}] "
            f"(error estimate {abs(err):.3g} > {tol:.3g} at depth {depth})"
        )
    half = 0.5 * tol
    return _adaptive(
        fn, a, m, fa, flm, fm, left, half, depth + 1, max_depth
    ) + _adaptive(fn, m, b, fm, frm, fb, right, half, depth + 1, max_depth)


def _simpson_adaptive(fn: ScalarFn, lo: float, hi: float, opts: QuadratureOptions) -> float:
    fa = fn(lo)
    fb = fn(hi)
    m = 0.5 * (lo + hi)
    fm = fn(m)
    whole = _simpson(fa, fm, fb, hi - lo)
    return _adaptive(fn, lo, hi, fa, fm, fb, whole, opts.abs_tol, 0, opts.max_depth)


def _regularized_left(fn: ScalarFn, lo: float, hi: float) -> ScalarFn:
    # Map t = lo + c*x^2; the Jacobian 2*c*x tames endpoint singularities up
    # to (and including) inverse-square-root order.  x is floored away from 0
    # so the wrapped integrand never evaluates fn at the singular endpoint.
    c = hi - lo

    def wrapped(x: float) -> float:
        x = max(x, 1e-8)
        return 2.0 * c * x * fn(lo + c * x * x)

    return wrapped


def quad_adaptive(
    fn: ScalarFn, lo: float, hi: float, opts: QuadratureOptions | None = None
) -> float:
    """Adaptive Simpson estimate of the integral of ``fn`` over [lo, hi].

    Endpoints at which ``fn`` is non-finite are treated as integrable
    singularities and handled by a quadratic substitution on the adjacent
    half-interval.

    Raises:
        DepthExceededError: subdivision hit ``opts.max_depth`` before the
            error estimate dropped below ``opts.abs_tol``.
    """
    if opts is None:
        opts = QuadratureOptions()
    if lo == hi:
        return 0.0
    if lo > hi:
        return -quad_adaptive(fn, hi, lo, opts)

    flo = fn(lo)
    fhi = fn(hi)
    lo_singular = not math.isfinite(flo)
    hi_singular = not math.isfinite(fhi)
    if not lo_singular and not hi_singular:
        return _simpson_adaptive(fn, lo, hi, opts)

    mid = 0.5 * (lo + hi)
    half_opts = QuadratureOptions(abs_tol=0.5 * opts.abs_tol, max_depth=opts.max_depth)
    if lo_singular:
        left = _simpson_adaptive(_regularized_left(fn, lo, mid), 0.0, 1.0, half_opts)
    else:
        left = _simpson_adaptive(fn, lo, mid, half_opts)
    if hi_singular:
        right = _simpson_adaptive(_regularized_left(lambda t: fn(hi - (t - lo)), lo, mid), 0.0, 1.0, half_opts)
    else:
        right = _simpson_adaptive(fn, mid, hi, half_opts)
    return left + right


def dawson(u: float) -> float:
    """Dawson's integral F(u), odd by construction."""
    if u == 0.0:
        return 0.0
    return math.copysign(float(dawsn(abs(u))), u)


def kl_integrand(t: float) -> float:
    """Integrand F(sqrt(t/2)) / sqrt(2t) of the log-uniform KL integral.

    The singularity at t = 0 is removable; the analytic limit 1/2 is used
    there.
    """
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    if t == 0.0:
        return 0.5
    return dawson(math.sqrt(0.5 * t)) / math.sqrt(2.0 * t)


# Tail of int 2*F(x) dx from the asymptotic series
# F(x) = sum_k (2k-1)!! / (2^(k+1) x^(2k+1)): antiderivative
# log x - sum_{k>=1} (2k-1)!! / (2^k * 2k) * x^(-2k).  For x >= 8 the
# truncation error after 12 terms is below 1e-13.
_TAIL_SWITCH = 8.0
_TAIL_COEFFS = []
_df = 1.0  # (2k-1)!!
for _k in range(1, 13):
    _df *= 2 * _k - 1
    _TAIL_COEFFS.append(_df / (2.0**_k * 2 * _k))


def _tail_antiderivative(x: float) -> float:
    inv2 = 1.0 / (x * x)
    acc = 0.0
    p = 1.0
    for c in _TAIL_COEFFS:
        p *= inv2
        acc += c * p
    return math.log(x) - acc


def kl_loguniform(eta_bar: float, opts: QuadratureOptions | None = None) -> float:
    """KL divergence integral int_0^eta_bar F(sqrt(t/2)) / sqrt(2t) dt.

    Evaluated after the substitution t = 2 x^2, which turns the integrand
    into the smooth 2 F(x) on [0, sqrt(eta_bar / 2)]; beyond x = 8 the
    remainder is summed from the asymptotic expansion of F.
    """
    if eta_bar < 0:
        raise ValueError(f"eta_bar must be non-negative, got {eta_bar}")
    if eta_bar == 0.0:
        return 0.0
    if math.isinf(eta_bar):
        return math.inf
    x_hi = math.sqrt(0.5 * eta_bar)
    x_core = min(x_hi, _TAIL_SWITCH)
    total = quad_adaptive(lambda x: 2.0 * dawson(x), 0.0, x_core, opts)
    if x_hi > _TAIL_SWITCH:
        total += _tail_antiderivative(x_hi) - _tail_antiderivative(_TAIL_SWITCH)
    return total
