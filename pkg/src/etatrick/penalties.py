"""Sparsity-inducing penalties with their quadratic dual forms.

Each penalty carries three pieces: the penalty value omega(w), the dual
function f(eta) with its domain H, and the minimizing update eta_hat(w)
realizing

    omega(w) = min_{eta in H} (1/2) * (w^2 / eta + f(eta))

coordinate-wise for separable penalties (the Lp norm and the hard-threshold
indicator are vector-level).  Auxiliary weights eta live in [0, inf] with
the limit conventions: eta = 0 forces a coordinate to zero (w^2/eta = inf
unless w = 0) and eta = inf leaves it unpenalized (w^2/eta = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

__all__ = [
    "Penalty",
    "L1",
    "LpNorm",
    "LpPow",
    "L0",
    "ElasticNet",
    "Huber",
    "LogSum",
    "Scad",
    "Mcp",
    "HardThresh",
    "omega",
    "f_dual",
    "eta_hat",
    "eta_in_domain",
    "quad_over_eta",
    "top_k_indices",
    "parse_penalty",
    "PENALTY_GRAMMAR",
]

INF = math.inf


def quad_over_eta(w, eta):
    """Element-wise w^2 / eta under the [0, inf] limit conventions."""
    w = np.asarray(w, dtype=float)
    eta = np.asarray(eta, dtype=float)
    out = np.full(np.broadcast_shapes(w.shape, eta.shape), INF)
    w, eta = np.broadcast_arrays(w, eta)
    pos = (eta > 0) & np.isfinite(eta)
    np.divide(w * w, eta, out=out, where=pos)
    out[np.isinf(eta)] = 0.0
    out[(eta == 0) & (w == 0)] = 0.0
    return out if out.ndim else float(out)


def top_k_indices(w, k: int) -> np.ndarray:
    """Indices of the k largest |w_j|; ties broken toward the lowest index."""
    w = np.asarray(w, dtype=float)
    if not 0 <= k <= w.size:
        raise ValueError(f"k must be in [0, {w.size}], got {k}")
    order = np.argsort(-np.abs(w), kind="stable")
    return np.sort(order[:k])


class Penalty:
    """Base class; subclasses fill in the scalar or vector dual triple."""

    separable: ClassVar[bool] = True

    # -- scalar interface (separable penalties) ---------------------------
    def omega_scalar(self, w: float) -> float:
        raise NotImplementedError

    def f_scalar(self, eta: float) -> float:
        raise NotImplementedError

    def eta_hat_scalar(self, w: float) -> float:
        raise NotImplementedError

    def omega_grad_scalar(self, w: float) -> float:
        raise NotImplementedError

    def eta_domain(self) -> tuple[float, float]:
        """Closed interval H of admissible scalar eta values."""
        return (0.0, INF)

    # -- vector interface --------------------------------------------------
    def omega(self, w) -> float:
        w = np.atleast_1d(np.asarray(w, dtype=float))
        return float(sum(self.omega_scalar(float(x)) for x in w))

    def f(self, eta) -> float:
        eta = np.atleast_1d(np.asarray(eta, dtype=float))
        return float(sum(self.f_scalar(float(e)) for e in eta))

    def eta_hat(self, w) -> np.ndarray:
        w = np.atleast_1d(np.asarray(w, dtype=float))
        return np.array([self.eta_hat_scalar(float(x)) for x in w])

    def omega_grad(self, w) -> np.ndarray:
        w = np.atleast_1d(np.asarray(w, dtype=float))
        return np.array([self.omega_grad_scalar(float(x)) for x in w])

    def eta_in_domain(self, eta) -> bool:
        lo, hi = self.eta_domain()
        eta = np.atleast_1d(np.asarray(eta, dtype=float))
        if np.any(eta < lo) or np.any(np.isnan(eta)):
            return False
        return bool(np.all(eta <= hi))


@dataclass(frozen=True)
class L1(Penalty):
    """Absolute value: omega = |w|, f = eta, eta_hat = |w|."""

    def omega_scalar(self, w: float) -> float:
        return abs(w)

    def f_scalar(self, eta: float) -> float:
        return eta

    def eta_hat_scalar(self, w: float) -> float:
        return abs(w)

    def omega_grad_scalar(self, w: float) -> float:
        return math.copysign(1.0, w) if w != 0 else 0.0


@dataclass(frozen=True)
class LpNorm(Penalty):
    """Vector p-(quasi)norm for p in (0, 2); not separable.

    omega = ||w||_p, f = ||eta||_q with q = p / (2 - p), and
    eta_hat_j = |w_j|^(2-p) * ||w||_p^(p-1) (zero at w = 0).
    """

    p: float
    separable: ClassVar[bool] = False

    def __post_init__(self) -> None:
        if not 0 < self.p < 2:
            raise ValueError(f"p must be in (0, 2), got {self.p}")

    @property
    def q(self) -> float:
        return self.p / (2.0 - self.p)

    def omega(self, w) -> float:
        w = np.abs(np.atleast_1d(np.asarray(w, dtype=float)))
        return float(np.sum(w**self.p) ** (1.0 / self.p))

    def f(self, eta) -> float:
        eta = np.atleast_1d(np.asarray(eta, dtype=float))
        if np.any(eta < 0):
            return INF
        if np.any(np.isinf(eta)):
            return INF
        return float(np.sum(eta**self.q) ** (1.0 / self.q))

    def eta_hat(self, w) -> np.ndarray:
        w = np.abs(np.atleast_1d(np.asarray(w, dtype=float)))
        norm = np.sum(w**self.p) ** (1.0 / self.p)
        if norm == 0.0:
            return np.zeros_like(w)
        return w ** (2.0 - self.p) * norm ** (self.p - 1.0)

    def omega_grad(self, w) -> np.ndarray:
        w = np.atleast_1d(np.asarray(w, dtype=float))
        aw = np.abs(w)
        norm = np.sum(aw**self.p) ** (1.0 / self.p)
        if norm == 0.0:
            return np.zeros_like(w)
        out = np.zeros_like(w)
        nz = aw > 0
        out[nz] = np.sign(w[nz]) * aw[nz] ** (self.p - 1.0) * norm ** (1.0 - self.p)
        return out

    def eta_in_domain(self, eta) -> bool:
        eta = np.atleast_1d(np.asarray(eta, dtype=float))
        return bool(np.all(eta >= 0) and not np.any(np.isnan(eta)))


@dataclass(frozen=True)
class LpPow(Penalty):
    """Separable power penalty omega = |w|^p / p for p in (0, 2)."""

    p: float

    def __post_init__(self) -> None:
        if not 0 < self.p < 2:
            raise ValueError(f"p must be in (0, 2), got {self.p}")

    @property
    def q(self) -> float:
        return self.p / (2.0 - self.p)

    def omega_scalar(self, w: float) -> float:
        return abs(w) ** self.p / self.p

    def f_scalar(self, eta: float) -> float:
        if eta < 0:
            return INF
        if math.isinf(eta):
            return INF
        return eta**self.q / self.q

    def eta_hat_scalar(self, w: float) -> float:
        return abs(w) ** (2.0 - self.p)

    def omega_grad_scalar(self, w: float) -> float:
        if w == 0:
            return 0.0
        return math.copysign(abs(w) ** (self.p - 1.0), w)


@dataclass(frozen=True)
class L0(Penalty):
    """Support indicator: omega = 1{w != 0}, f = 2 * 1{eta > 0}.

    The dual pair here sits outside the smooth conjugacy theory (f jumps at
    eta = 0 and the minimum over eta is attained only in the eta -> inf
    limit), but the stated pair does satisfy the minimization identity.
    """

    def omega_scalar(self, w: float) -> float:
        return 1.0 if w != 0 else 0.0

    def f_scalar(self, eta: float) -> float:
        return 2.0 if eta > 0 else 0.0

    def eta_hat_scalar(self, w: float) -> float:
        return INF if w != 0 else 0.0

    def omega_grad_scalar(self, w: float) -> float:
        return 0.0


@dataclass(frozen=True)
class ElasticNet(Penalty):
    """Quadratic/absolute mixture (theta/2) w^2 + (1 - theta) |w|."""

    theta: float

    def __post_init__(self) -> None:
        if not 0 < self.theta < 1:
            raise ValueError(f"theta must be in (0, 1), got {self.theta}")

    def omega_scalar(self, w: float) -> float:
        return 0.5 * self.theta * w * w + (1.0 - self.theta) * abs(w)

    def f_scalar(self, eta: float) -> float:
        if eta < 0 or eta > 1.0 / self.theta:
            return INF
        denom = 1.0 - eta * self.theta
        if denom <= 0:
            return INF
        return eta * (1.0 - self.theta) ** 2 / denom

    def eta_hat_scalar(self, w: float) -> float:
        aw = abs(w)
        return aw / (self.theta * aw + (1.0 - self.theta))

    def omega_grad_scalar(self, w: float) -> float:
        sub = math.copysign(1.0, w) if w != 0 else 0.0
        return self.theta * w + (1.0 - self.theta) * sub

    def eta_domain(self) -> tuple[float, float]:
        return (0.0, 1.0 / self.theta)


@dataclass(frozen=True)
class Huber(Penalty):
    """Huber penalty, quadratic below eps and absolute above."""

    eps: float

    def __post_init__(self) -> None:
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")

    def omega_scalar(self, w: float) -> float:
        aw = abs(w)
        if aw <= self.eps:
            return 0.5 * w * w / self.eps + 0.5 * self.eps
        return aw

    def f_scalar(self, eta: float) -> float:
        if eta < self.eps:
            return INF
        return eta

    def eta_hat_scalar(self, w: float) -> float:
        return max(self.eps, abs(w))

    def omega_grad_scalar(self, w: float) -> float:
        if abs(w) <= self.eps:
            return w / self.eps
        return math.copysign(1.0, w)

    def eta_domain(self) -> tuple[float, float]:
        return (self.eps, INF)


@dataclass(frozen=True)
class LogSum(Penalty):
    """Logarithmic penalty omega = log(|w| + eps)."""

    eps: float

    def __post_init__(self) -> None:
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")

    def omega_scalar(self, w: float) -> float:
        return math.log(abs(w) + self.eps)

    def f_scalar(self, eta: float) -> float:
        if eta < 0:
            return INF
        if eta == 0.0:
            return 2.0 * math.log(self.eps)
        if math.isinf(eta):
            return INF
        root = math.sqrt(self.eps * self.eps + 4.0 * eta)
        return 2.0 * math.log(0.5 * (root + self.eps)) - (root - self.eps) ** 2 / (4.0 * eta)

    def eta_hat_scalar(self, w: float) -> float:
        aw = abs(w)
        return aw * (aw + self.eps)

    def omega_grad_scalar(self, w: float) -> float:
        if w == 0:
            return 0.0
        return math.copysign(1.0, w) / (abs(w) + self.eps)


@dataclass(frozen=True)
class Scad(Penalty):
    """Smoothly clipped absolute deviation, factored by its own lam.

    The built-in lam is the classic knot parameter of the penalty shape and
    is distinct from the outer regularization weight multiplying omega.
    """

    a: float
    lam: float

    def __post_init__(self) -> None:
        if self.a <= 1:
            raise ValueError(f"a must be > 1, got {self.a}")
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")

    def omega_scalar(self, w: float) -> float:
        aw = abs(w)
        a, lam = self.a, self.lam
        if aw <= lam:
            return aw
        if aw <= a * lam:
            return (2.0 * a * lam * aw - w * w - lam * lam) / (2.0 * (a - 1.0) * lam)
        return 0.5 * (a + 1.0) * lam

    def f_scalar(self, eta: float) -> float:
        if eta < 0:
            return INF
        a, lam = self.a, self.lam
        if eta <= lam:
            return eta
        if math.isinf(eta):
            return lam * (a + 1.0)
        return lam * ((a + 1.0) * eta - lam) / ((a - 1.0) * lam + eta)

    def eta_hat_scalar(self, w: float) -> float:
        aw = abs(w)
        a, lam = self.a, self.lam
        if aw <= lam:
            return aw
        if aw < a * lam:
            return (a - 1.0) * lam * aw / (a * lam - aw)
        return INF

    def omega_grad_scalar(self, w: float) -> float:
        aw = abs(w)
        a, lam = self.a, self.lam
        if aw == 0:
            return 0.0
        if aw <= lam:
            return math.copysign(1.0, w)
        if aw <= a * lam:
            return math.copysign((a * lam - aw) / ((a - 1.0) * lam), w)
        return 0.0


@dataclass(frozen=True)
class Mcp(Penalty):
    """Minimax concave penalty, factored by its own lam (see Scad)."""

    a: float
    lam: float

    def __post_init__(self) -> None:
        if self.a <= 0:
            raise ValueError(f"a must be positive, got {self.a}")
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")

    def omega_scalar(self, w: float) -> float:
        aw = abs(w)
        alam = self.a * self.lam
        if aw <= alam:
            return aw - w * w / (2.0 * alam)
        return 0.5 * alam

    def f_scalar(self, eta: float) -> float:
        if eta < 0:
            return INF
        alam = self.a * self.lam
        if math.isinf(eta):
            return alam
        return alam * eta / (eta + alam)

    def eta_hat_scalar(self, w: float) -> float:
        aw = abs(w)
        alam = self.a * self.lam
        if aw < alam:
            return alam * aw / (alam - aw)
        return INF

    def omega_grad_scalar(self, w: float) -> float:
        aw = abs(w)
        alam = self.a * self.lam
        if aw == 0:
            return 0.0
        if aw <= alam:
            return math.copysign(1.0 - aw / alam, w)
        return 0.0


@dataclass(frozen=True)
class HardThresh(Penalty):
    """Indicator of the k-sparse set; not separable.

    omega is 0 on {||w||_0 <= k} and inf outside; f is 0 on the domain
    H = {eta : ||eta||_0 <= k}; eta_hat puts inf on the top-k coordinates
    by magnitude (ties to the lowest index) and 0 elsewhere.
    """

    k: int
    separable: ClassVar[bool] = False

    def __post_init__(self) -> None:
        if self.k < 0 or self.k != int(self.k):
            raise ValueError(f"k must be a non-negative integer, got {self.k}")

    def omega(self, w) -> float:
        w = np.atleast_1d(np.asarray(w, dtype=float))
        return 0.0 if np.count_nonzero(w) <= self.k else INF

    def f(self, eta) -> float:
        return 0.0 if self.eta_in_domain(eta) else INF

    def eta_hat(self, w) -> np.ndarray:
        w = np.atleast_1d(np.asarray(w, dtype=float))
        out = np.zeros(w.shape)
        out[top_k_indices(w, min(self.k, w.size))] = INF
        return out

    def omega_grad(self, w) -> np.ndarray:
        w = np.atleast_1d(np.asarray(w, dtype=float))
        return np.zeros_like(w)

    def eta_in_domain(self, eta) -> bool:
        eta = np.atleast_1d(np.asarray(eta, dtype=float))
        if np.any(eta < 0) or np.any(np.isnan(eta)):
            return False
        return int(np.count_nonzero(eta)) <= self.k


# -- operation-style wrappers ----------------------------------------------


def omega(penalty: Penalty, w) -> float:
    """Penalty value omega(w) for a weight vector."""
    return penalty.omega(w)


def f_dual(penalty: Penalty, eta) -> float:
    """Dual value f(eta); +inf when eta lies outside the domain H."""
    return penalty.f(eta)


def eta_hat(penalty: Penalty, w) -> np.ndarray:
    """Minimizing auxiliary weights for a given w."""
    return penalty.eta_hat(w)


def eta_in_domain(penalty: Penalty, eta) -> bool:
    """Whether eta belongs to the penalty's domain H."""
    return penalty.eta_in_domain(eta)


# -- string grammar ----------------------------------------------------------

PENALTY_GRAMMAR = """\
Penalty specs are written as NAME or NAME:key=value,... with the following
forms (parameter ranges in parentheses):

  l1                              absolute value
  lp:p=P                          vector p-norm, P in (0, 2)  [not separable]
  lppow:p=P                       |w|^P / P, P in (0, 2)
  l0                              support indicator
  elasticnet:theta=T              (T/2) w^2 + (1-T) |w|, T in (0, 1)
  huber:eps=E                     Huber with knee E > 0
  logsum:eps=E                    log(|w| + E), E > 0
  scad:a=A,lambda=L               SCAD with A > 1, L > 0
  mcp:a=A,lambda=L                MCP with A > 0, L > 0
  hardthresh:k=K                  k-sparse indicator  [not separable]
"""

_FLOAT_KEYS = {"p", "theta", "eps", "a", "lambda", "weight"}


def _parse_params(body: str) -> dict[str, float]:
    params: dict[str, float] = {}
    if not body:
        return params
    for item in body.replace(";", ",").split(","):
        if "=" not in item:
            raise ValueError(f"malformed penalty parameter {item!r} (expected key=value)")
        key, _, value = item.partition("=")
        key = key.strip().lower()
        try:
            params[key] = int(value) if key == "k" else float(value)
        except ValueError as exc:
            raise ValueError(f"bad value for {key!r}: {value!r}") from exc
    return params


def parse_penalty(text: str) -> Penalty:
    """Parse a penalty spec string like ``mcp:a=1,lambda=1``."""
    name, _, body = text.strip().partition(":")
    name = name.strip().lower()
    params = _parse_params(body)
    try:
        if name == "l1":
            return L1(**params)
        if name == "lp":
            return LpNorm(**params)
        if name == "lppow":
            return LpPow(**params)
        if name == "l0":
            return L0(**params)
        if name == "elasticnet":
            return ElasticNet(**params)
        if name == "huber":
            return Huber(**params)
        if name == "logsum":
            return LogSum(**params)
        if name == "scad":
            return Scad(a=params.pop("a"), lam=params.pop("lambda"), **params)
        if name == "mcp":
            return Mcp(a=params.pop("a"), lam=params.pop("lambda"), **params)
        if name == "hardthresh":
            return HardThresh(**params)
    except (TypeError, KeyError) as exc:
        raise ValueError(f"bad parameters for penalty {name!r}: {exc}") from exc
    raise ValueError(f"unknown penalty {name!r}")
