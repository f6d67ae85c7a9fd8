"""Equation constants, second-order jets and the normalized p-Laplacian.

The operator acting on a jet is

    A_p u = (1/p) tr(D^2 u) + ((p-2)/p) <D^2 u v, v>,   v = Du/|Du|,

and at a vanishing gradient the direction term is replaced by the smallest
(supersolution side) or largest (subsolution side) Hessian eigenvalue.
``p = inf`` gives the normalized infinity-Laplacian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

CLASSICAL = "classical"
ENVELOPE_LOWER = "envelope_lower"
ENVELOPE_UPPER = "envelope_upper"

DEFAULT_TAU = 1e-8


@dataclass(frozen=True)
class PParams:
    """Constants of the equation for a given ``p`` and dimension ``n``."""

    p: float
    n: int
    alpha: float
    beta: float
    nu: Optional[float]

    @property
    def infinite(self) -> bool:
        return math.isinf(self.p)

    @property
    def lap_coef(self) -> float:
        """Coefficient of the trace term, 1/p."""
        return 0.0 if self.infinite else 1.0 / self.p

    @property
    def dir_coef(self) -> float:
        """Coefficient of the gradient-direction term, (p-2)/p."""
        return 1.0 if self.infinite else (self.p - 2.0) / self.p

    @property
    def ratio(self) -> float:
        """alpha / beta, the decay exponent of the fundamental solution."""
        return self.alpha / self.beta

    def label(self) -> str:
        ps = "inf" if self.infinite else f"{self.p:g}"
        return f"p={ps},n={self.n}"


def make_params(p: float, n: int) -> PParams:
    """Build :class:`PParams` for ``1 < p <= inf`` and ``n >= 1``."""
    p = float(p)
    if not (p > 1.0) or math.isnan(p):
        raise ValueError(f"p must satisfy 1 < p <= inf, got {p}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    n = int(n)
    if math.isinf(p):
        return PParams(p=math.inf, n=n, alpha=2.0, beta=4.0, nu=None)
    alpha = 2.0 * (p + n - 2.0) / p
    beta = 4.0 * (p - 1.0) / p
    nu = None if p == n else (p - n) / (p - 1.0)
    return PParams(p=p, n=n, alpha=alpha, beta=beta, nu=nu)


@dataclass(frozen=True)
class Point:
    x: np.ndarray
    t: float

    def __post_init__(self):
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)))
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def as_array(self) -> np.ndarray:
        """Space-time coordinates ``(x1, ..., xn, t)``."""
        return np.append(self.x, self.t)

    @classmethod
    def from_array(cls, z) -> "Point":
        z = np.asarray(z, dtype=float)
        return cls(z[:-1], z[-1])


@dataclass(frozen=True)
class Jet2:
    """Second-order jet ``(u, u_t, Du, D^2 u)`` at a space-time point."""

    u: float
    ut: float
    du: np.ndarray
    d2u: np.ndarray

    def __post_init__(self):
        du = np.atleast_1d(np.asarray(self.du, dtype=float))
        d2u = np.atleast_2d(np.asarray(self.d2u, dtype=float))
        if d2u.shape != (du.shape[0], du.shape[0]):
            raise ValueError(f"Hessian shape {d2u.shape} does not match gradient {du.shape}")
        if np.any(np.abs(d2u - d2u.T) > 1e-12):
            raise ValueError("Hessian is not symmetric")
        object.__setattr__(self, "du", du)
        object.__setattr__(self, "d2u", d2u)
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "ut", float(self.ut))

    def scaled(self, s: float) -> "Jet2":
        return Jet2(s * self.u, s * self.ut, s * self.du, s * self.d2u)


@dataclass(frozen=True)
class OperatorValue:
    value: float
    branch: str


def eval_envelope(d2u, params: PParams, side: str = "lower"):
    """Semicontinuous envelope of the operator at a vanishing gradient.

    ``side="lower"`` uses the smallest Hessian eigenvalue (the supersolution
    test), ``side="upper"`` the largest. Accepts a single matrix or a stack
    of shape ``(..., n, n)``.
    """
    d2u = np.asarray(d2u, dtype=float)
    eig = np.linalg.eigvalsh(d2u)  # ascending
    if side == "lower":
        lam = eig[..., 0]
    elif side == "upper":
        lam = eig[..., -1]
    else:
        raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")
    trace = np.trace(d2u, axis1=-2, axis2=-1)
    out = params.lap_coef * trace + params.dir_coef * lam
    return float(out) if np.ndim(out) == 0 else out


def operator_values(du, d2u, params: PParams, tau: float = DEFAULT_TAU, side: str = "lower"):
    """Vectorized operator evaluation.

    Returns ``(values, classical)`` where ``classical`` flags entries with
    ``|du| > tau``; the others hold the requested envelope value.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    du = np.asarray(du, dtype=float)
    d2u = np.asarray(d2u, dtype=float)
    norm = np.linalg.norm(du, axis=-1)
    classical = norm > tau
    safe = np.where(classical, norm, 1.0)
    v = du / safe[..., None]
    directional = np.einsum("...i,...ij,...j->...", v, d2u, v)
    trace = np.trace(d2u, axis1=-2, axis2=-1)
    values = params.lap_coef * trace + params.dir_coef * directional
    if not np.all(classical):
        env = eval_envelope(d2u, params, side)
        values = np.where(classical, values, env)
    return values, classical


def eval_operator(jet: Jet2, params: PParams, tau: float = DEFAULT_TAU, side: str = "lower") -> OperatorValue:
    """Apply the normalized p-Laplacian to a jet.

    Parameters
    ----------
    jet : Jet2
        Jet at the evaluation point.
    params : PParams
    tau : float
        Vanishing-gradient threshold; ``|Du| <= tau`` switches to the
        envelope branch.
    side : {"lower", "upper"}
        Envelope requested on the vanishing-gradient branch.
    """
    values, classical = operator_values(jet.du, jet.d2u, params, tau, side)
    if bool(classical):
        branch = CLASSICAL
    else:
        branch = ENVELOPE_LOWER if side == "lower" else ENVELOPE_UPPER
    return OperatorValue(float(values), branch)


def residual(jet: Jet2, params: PParams, tau: float = DEFAULT_TAU, side: str = "lower") -> float:
    """``u_t - A_p u``; positive certifies a supersolution at the point."""
    return jet.ut - eval_operator(jet, params, tau, side).value


def residuals(ut, du, d2u, params: PParams, tau: float = DEFAULT_TAU, side: str = "lower"):
    values, classical = operator_values(du, d2u, params, tau, side)
    return np.asarray(ut, dtype=float) - values, classical


def numeric_jet(field: Callable[[np.ndarray, float], float], point: Point, h: float) -> Jet2:
    """Central finite-difference jet of ``field(x, t)`` at ``point``.

    Mixed second derivatives use the four-point cross stencil; the Hessian
    is symmetrized by averaging.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x0 = point.x
    t0 = point.t
    n = x0.shape[0]

    def f(x, t):
        val = float(field(x, t))
        if not math.isfinite(val):
            raise ValueError(f"non-finite field value at x={x}, t={t}")
        return val

    u0 = f(x0, t0)
    ut = (f(x0, t0 + h) - f(x0, t0 - h)) / (2 * h)
    eye = np.eye(n)
    du = np.empty(n)
    d2u = np.empty((n, n))
    for i in range(n):
        fp = f(x0 + h * eye[i], t0)
        fm = f(x0 - h * eye[i], t0)
        du[i] = (fp - fm) / (2 * h)
        d2u[i, i] = (fp - 2 * u0 + fm) / (h * h)
        for j in range(i + 1, n):
            ei, ej = h * eye[i], h * eye[j]
            mixed = (f(x0 + ei + ej, t0) - f(x0 + ei - ej, t0)
                     - f(x0 - ei + ej, t0) + f(x0 - ei - ej, t0)) / (4 * h * h)
            d2u[i, j] = d2u[j, i] = mixed
    d2u = 0.5 * (d2u + d2u.T)
    return Jet2(u0, ut, du, d2u)
