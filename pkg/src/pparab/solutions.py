"""Explicit solutions with analytic second-order jets.

Each :class:`Solution` exposes vectorized ``value(x, t)`` and
``derivs(x, t) -> (u, ut, du, d2u)`` with ``x`` of shape ``(..., n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate

from .core import Jet2, PParams, Point, numeric_jet, residuals

SOLUTION = "solution"
SUPERSOLUTION = "supersolution"
SUBSOLUTION = "subsolution"


@dataclass(frozen=True, eq=False)
class Solution:
    label: str
    params: PParams
    value: Callable
    derivs: Callable
    singular: Callable
    sign_role: str = SOLUTION
    constants: dict = field(default_factory=dict)
    reversed_time: bool = False

    def jet(self, point: Point) -> Jet2:
        u, ut, du, d2u = self.derivs(point.x[None], np.array([point.t]))
        return Jet2(u[0], ut[0], du[0], d2u[0])

    def is_singular(self, point: Point) -> bool:
        return bool(self.singular(point.x[None], np.array([point.t]))[0])

    def field(self, x, t) -> float:
        """Scalar evaluation ``u(x, t)``, e.g. for :func:`numeric_jet`."""
        return float(self.value(np.asarray(x, dtype=float)[None], np.array([t]))[0])


def _arrays(x, t):
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    return x, t


def _outer(x):
    return x[..., :, None] * x[..., None, :]


def _eye_like(x):
    return np.broadcast_to(np.eye(x.shape[-1]), x.shape[:-1] + (x.shape[-1], x.shape[-1]))


# ------------------------------------------------------------ uniform propagation

def traveling_wave(a, b: float, A: float, B: float, params: PParams) -> Solution:
    """``u = A + B exp(-(<a, x> - b t)/m)`` with ``m = |a|^2 (p-1)/(b p)``."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if not np.any(a != 0):
        raise ValueError("a must be nonzero")
    if b == 0:
        raise ValueError("b must be nonzero")
    if a.shape[0] != params.n:
        raise ValueError("len(a) must equal n")
    # (p-1)/p == 1/p + (p-2)/p, which is also the p = inf limit
    m = float(a @ a) * (params.lap_coef + params.dir_coef) / b

    def value(x, t):
        x, t = _arrays(x, t)
        return A + B * np.exp(-(x @ a - b * t) / m)

    def derivs(x, t):
        x, t = _arrays(x, t)
        E = B * np.exp(-(x @ a - b * t) / m)
        du = -(E / m)[..., None] * a
        d2u = (E / m**2)[..., None, None] * np.outer(a, a)
        return A + E, E * b / m, du, d2u

    def singular(x, t):
        return np.zeros(np.shape(t), dtype=bool)

    return Solution("traveling_wave", params, value, derivs, singular,
                    constants={"a": tuple(a), "b": b, "A": A, "B": B, "m": m})


# ------------------------------------------------------------ separable

def separable(c: float, params: PParams, c1: float = 0.0) -> Solution:
    """``u = A_q |x|^2 + c1 |x|^nu + c t`` with ``A_q = c p / (2 (n+p-2)) = c/alpha``.

    The ``|x|^nu`` term, ``nu = (p-n)/(p-1)``, is the radial p-harmonic
    profile; radial fields see a linear operator so it can be added freely.
    """
    if not params.infinite and params.p == params.n:
        raise ValueError("separable solution needs p != n")
    Aq = c / params.alpha
    nu = 1.0 if params.infinite else params.nu

    def value(x, t):
        x, t = _arrays(x, t)
        r2 = np.sum(x * x, axis=-1)
        out = Aq * r2 + c * t
        if c1:
            out = out + c1 * r2 ** (nu / 2)
        return out

    def derivs(x, t):
        x, t = _arrays(x, t)
        r2 = np.sum(x * x, axis=-1)
        u = value(x, t)
        du = 2 * Aq * x
        d2u = 2 * Aq * _eye_like(x)
        if c1:
            with np.errstate(all="ignore"):
                r = np.sqrt(r2)
                fp = c1 * nu * r ** (nu - 1)
                fpp = c1 * nu * (nu - 1) * r ** (nu - 2)
                e = x / r[..., None]
            du = du + fp[..., None] * e
            d2u = d2u + (fp / r)[..., None, None] * (_eye_like(x) - _outer(e)) + fpp[..., None, None] * _outer(e)
        return u, np.full(np.shape(t), float(c)), du, d2u

    def singular(x, t):
        x, t = _arrays(x, t)
        if c1:
            return np.sum(x * x, axis=-1) == 0
        return np.zeros(np.shape(t), dtype=bool)

    return Solution("separable", params, value, derivs, singular,
                    constants={"c": c, "c1": c1, "A_q": Aq})


# ------------------------------------------------------------ similarity I

def similarity_profile(zeta, params: PParams, lower: float = 0.0, rtol: float = 1e-10, limit: int = 200) -> float:
    """``int_lower^zeta s^(-a) exp(-s/beta) ds`` with ``a = alpha/beta``.

    For ``lower = 0`` and ``0 < a < 1`` the endpoint singularity is removed
    with ``s = w^(1/(1-a))``.
    """
    a = params.ratio
    beta = params.beta
    zeta = float(zeta)
    if lower == 0.0:
        if not 0 < a < 1:
            raise ValueError("lower limit 0 needs alpha/beta < 1 (p > n)")
        if zeta == 0:
            return 0.0
        k = 1.0 / (1.0 - a)
        out = integrate.quad(lambda w: k * math.exp(-w**k / beta), 0.0, zeta ** (1.0 - a),
                             epsabs=0.0, epsrel=rtol, limit=limit, full_output=1)
    else:
        out = integrate.quad(lambda s: s ** (-a) * math.exp(-s / beta), lower, zeta,
                             epsabs=0.0, epsrel=rtol, limit=limit, full_output=1)
    val, err = out[0], out[1]
    if len(out) > 3 and err > 10 * rtol * abs(val):
        raise RuntimeError(f"quadrature did not converge: {out[3]}")
    return val


def similarity_integral(C: float, params: PParams) -> Solution:
    """``u = C * int_{s0}^{|x|^2/t} s^(-alpha/beta) e^(-s/beta) ds`` for ``t > 0``.

    ``s0 = 0`` when ``p > n``; otherwise the integrand is not integrable at 0
    and ``s0 = 1`` (a constant shift of a solution).
    """
    a = params.ratio
    beta = params.beta
    lower = 0.0 if a < 1 else 1.0

    def F(zeta):
        zeta = np.asarray(zeta, dtype=float)
        flat = [C * similarity_profile(z, params, lower) for z in zeta.ravel()]
        return np.reshape(flat, zeta.shape)

    def value(x, t):
        x, t = _arrays(x, t)
        if np.any(t <= 0):
            raise ValueError("similarity solution is defined for t > 0")
        return F(np.sum(x * x, axis=-1) / t)

    def derivs(x, t):
        x, t = _arrays(x, t)
        u = value(x, t)
        zeta = np.sum(x * x, axis=-1) / t
        with np.errstate(divide="ignore", invalid="ignore"):
            F1 = C * zeta ** (-a) * np.exp(-zeta / beta)
            F2 = F1 * (-a / zeta - 1.0 / beta)
        ut = -F1 * zeta / t
        du = (2 * F1 / t)[..., None] * x
        d2u = (2 * F1 / t)[..., None, None] * _eye_like(x) + (4 * F2 / t**2)[..., None, None] * _outer(x)
        return u, ut, du, d2u

    def singular(x, t):
        x, t = _arrays(x, t)
        return (np.sum(x * x, axis=-1) == 0) | (t <= 0)

    role = SUBSOLUTION if C > 0 else SUPERSOLUTION if C < 0 else SOLUTION
    return Solution("similarity_integral", params, value, derivs, singular, sign_role=role,
                    constants={"C": C, "lower": lower})


# ------------------------------------------------------------ fundamental solution

def fundamental(params: PParams, time_sign: str = "positive") -> Solution:
    """``H_p(x, t) = t^(-alpha/beta) exp(-|x|^2/(beta t))`` on ``t > 0``.

    ``time_sign="negative"`` gives ``H_p(x, -t)`` on ``t < 0``. That field
    solves the time-reversed equation ``u_t = -A_p u`` and is flagged with
    ``reversed_time=True``. At ``p = inf`` this is ``t^(-1/2) e^(-|x|^2/(4t))``.
    """
    if time_sign not in ("positive", "negative"):
        raise ValueError("time_sign must be 'positive' or 'negative'")
    a = params.ratio
    beta = params.beta
    sgn = 1.0 if time_sign == "positive" else -1.0

    def _check(t):
        if np.any(sgn * t <= 0):
            raise ValueError(f"fundamental solution ({time_sign}) evaluated outside its time half-space")

    def value(x, t):
        x, t = _arrays(x, t)
        _check(t)
        s = sgn * t
        return np.exp(-a * np.log(s) - np.sum(x * x, axis=-1) / (beta * s))

    def derivs(x, t):
        x, t = _arrays(x, t)
        _check(t)
        s = sgn * t
        r2 = np.sum(x * x, axis=-1)
        u = np.exp(-a * np.log(s) - r2 / (beta * s))
        us = u * (-a / s + r2 / (beta * s * s))
        du = (-2 * u / (beta * s))[..., None] * x
        d2u = (-2 * u / (beta * s))[..., None, None] * _eye_like(x) \
            + (4 * u / (beta * s) ** 2)[..., None, None] * _outer(x)
        return u, sgn * us, du, d2u

    def singular(x, t):
        x, t = _arrays(x, t)
        return sgn * t <= 0

    label = "fundamental" if sgn > 0 else "fundamental_negative"
    return Solution(label, params, value, derivs, singular, reversed_time=sgn < 0,
                    constants={"time_sign": time_sign})


# ------------------------------------------------------------ heat-equation transform

class HeatTransform(NamedTuple):
    nu: float
    coefficient: float
    exponent: float
    rho_of_r: Callable
    check: Callable


class TransformCheck(NamedTuple):
    worst_u: float
    worst_v: float
    worst_diff: float
    samples: int


def heat_transform(params: PParams) -> HeatTransform:
    """Radial change of variables ``u(x, t) = v(|x|^nu, t)``, ``nu = (p-n)/(p-1)``.

    With this ``nu`` the first-order term drops and the equation becomes
    ``v_t = coefficient * rho^exponent * v_rho_rho`` with
    ``coefficient = (p-n)^2/(p(p-1))`` and ``exponent = 2(1-n)/(p-n)``.
    """
    if params.infinite:
        nu, coef, expo = 1.0, 1.0, 0.0
    else:
        p, n = params.p, params.n
        if p == n:
            raise ValueError("heat transform needs p != n")
        nu = (p - n) / (p - 1)
        coef = (p - n) ** 2 / (p * (p - 1))
        expo = 2.0 * (1 - n) / (p - n)

    def rho_of_r(r):
        return np.asarray(r, dtype=float) ** nu

    def check(v: Callable, radii=(0.5, 0.8, 1.2, 1.7), times=(0.3, 0.7, 1.1), h: float = 1e-3) -> TransformCheck:
        """Compare ``u_t - A_p u`` for ``u = v(|x|^nu, t)`` with ``v_t - coef rho^e v_rr``.

        ``v(rho, t)`` is a scalar callable. Both residuals use central
        differences with step ``h``.
        """
        rng = np.random.default_rng(0)
        worst_u = worst_v = worst_d = 0.0
        count = 0
        for r in radii:
            for t in times:
                d = rng.standard_normal(params.n)
                x = r * d / np.linalg.norm(d)
                u_field = lambda y, s: v(float(np.linalg.norm(y)) ** nu, s)
                jet = numeric_jet(u_field, Point(x, t), h)
                res_u, _ = residuals(jet.ut, jet.du, jet.d2u, params, tau=1e-12)
                rho = r**nu
                vt = (v(rho, t + h) - v(rho, t - h)) / (2 * h)
                vrr = (v(rho + h, t) - 2 * v(rho, t) + v(rho - h, t)) / (h * h)
                res_v = vt - coef * rho**expo * vrr
                worst_u = max(worst_u, abs(float(res_u)))
                worst_v = max(worst_v, abs(res_v))
                worst_d = max(worst_d, abs(float(res_u) - res_v))
                count += 1
        return TransformCheck(worst_u, worst_v, worst_d, count)

    return HeatTransform(nu, coef, expo, rho_of_r, check)


# ------------------------------------------------------------ sampling

def sample_points(n: int, count: int, seed: int = 0, r_min: float = 0.25, t_range=(0.5, 1.5)):
    """Quasi-random ``(x, t)`` with ``r_min <= |x|``, ``x`` in ``[-1, 1]^n``.

    Keeps finite-difference stencils away from the ``x = 0`` singular lines
    of the similarity entries.
    """
    from scipy.stats import qmc

    sob = qmc.Sobol(n + 1, scramble=True, seed=seed)
    xs, ts = [], []
    while sum(len(a) for a in xs) < count:
        z = sob.random(256)
        x = 2 * z[:, :n] - 1
        t = t_range[0] + (t_range[1] - t_range[0]) * z[:, n]
        keep = np.linalg.norm(x, axis=1) >= r_min
        xs.append(x[keep])
        ts.append(t[keep])
    return np.concatenate(xs)[:count], np.concatenate(ts)[:count]


# ------------------------------------------------------------ catalog

class Catalog(NamedTuple):
    entries: list
    skipped: dict


def catalog(params: PParams) -> Catalog:
    """All constructible catalog entries for ``params`` plus skip reasons."""
    n = params.n
    entries = []
    skipped = {}
    a = np.zeros(n)
    a[0] = 1.0
    if n > 1:
        a[1] = -0.5
    entries.append(traveling_wave(a, 0.5, 0.0, 1.0, params))
    try:
        entries.append(separable(1.0, params))
    except ValueError:
        skipped["separable"] = "p = n"
    entries.append(similarity_integral(1.0, params))
    entries.append(fundamental(params))
    try:
        heat_transform(params)
    except ValueError:
        skipped["heat_transform"] = "p = n"
    return Catalog(entries, skipped)


# ------------------------------------------------------------ verification

class EntryCheck(NamedTuple):
    label: str
    samples: int
    max_residual: float
    fd_residual: float
    jet_ratio: float  # nan when the difference quotients are exact (polynomial entries)


def verify_entry(sol: Solution, count: int = 200, seed: int = 0, fd_h: float = 1e-3, jet_points: int = 20,
                 jet_h: float = 1e-2, tau: float = 1e-8) -> EntryCheck:
    """Residuals from analytic and difference jets, plus the jet convergence ratio.

    Samples avoid the singular set and ``|du| <= tau``. The ratio is the
    median of ``err(jet_h) / err(jet_h / 2)`` over points where the
    difference jet is not already exact to rounding.
    """
    P = sol.params
    x, t = sample_points(P.n, 4 * count, seed=seed)
    if sol.reversed_time:
        t = -t
    _, _, du, _ = sol.derivs(x, t)
    keep = ~sol.singular(x, t) & (np.linalg.norm(du, axis=-1) > tau)
    x, t = x[keep][:count], t[keep][:count]
    u, ut, du, d2u = sol.derivs(x, t)
    res, _ = residuals(ut, du, d2u, P)
    worst = float(np.max(np.abs(res)))

    fd_res = []
    ratios = []
    for i in range(len(t)):
        pt = Point(x[i], t[i])
        jet = numeric_jet(sol.field, pt, fd_h)
        fd_res.append(abs(float(residuals(jet.ut, jet.du[None], jet.d2u[None], P)[0][0])))
        if i < jet_points:
            exact = sol.jet(pt)
            errs = []
            for step in (jet_h, jet_h / 2):
                j = numeric_jet(sol.field, pt, step)
                errs.append(max(abs(j.ut - exact.ut), np.max(np.abs(j.du - exact.du)),
                                np.max(np.abs(j.d2u - exact.d2u))))
            if errs[0] > 1e-7:
                ratios.append(errs[0] / errs[1])
    ratio = float(np.median(ratios)) if ratios else math.nan
    return EntryCheck(sol.label, int(len(t)), worst, float(max(fd_res)), ratio)
