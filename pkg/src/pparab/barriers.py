"""Barrier constructions and an automated checker of the barrier axioms.

A barrier at a boundary point is a positive supersolution in the domain
that vanishes only at that point. The constructions here are

* the exterior-sphere barrier ``e^(-a R0^2) - e^(-a R^2)``,
* the log-log barrier at the vertex of the Petrovsky domain,
* the sharp irregularity witness (a subsolution) for the widened domain.

Fields that under- or overflow near ``t = 0`` are handled through *scaled
jets*: ``(u_t, Du, D^2 u) / K`` for a positive factor ``K`` computed in
log-space. The operator is homogeneous of degree one, so the residual of a
scaled jet has the sign of the true residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize
from scipy.stats import qmc

from .core import PParams, Point, eval_envelope, operator_values
from .domains import INV_E, Domain, petrovsky_domain, spacetime_ball

SUPERSOLUTION_BARRIER = "supersolution_barrier"
SUBSOLUTION_WITNESS = "subsolution_witness"

DEFAULT_PETROVSKY_SLAB = math.exp(-math.e ** 2)


@dataclass(frozen=True, eq=False)
class Barrier:
    """A barrier field with analytic jets attached to a target boundary point.

    ``scaled_derivs(x, t)`` returns ``(ut, du, d2u)`` divided by a positive
    pointwise factor; ``scaled_value`` is ``w`` divided by a positive constant.
    ``axis(x, t)`` flags points where the gradient vanishes identically and
    the envelope branch applies.
    """

    label: str
    params: PParams
    value: Callable
    derivs: Callable
    scaled_derivs: Callable
    scaled_value: Callable
    axis: Callable
    domain: Optional[Domain]
    target: Point
    orientation: str
    constants: dict = field(default_factory=dict)
    structured_samples: Optional[Callable] = None
    approach: Optional[Callable] = None
    bracket: Optional[Callable] = None
    level: Optional[float] = None


@dataclass(frozen=True)
class BarrierReport:
    positivity_ok: bool
    boundary_liminf_ok: bool
    vanishing_at_target_ok: bool
    supersolution_ok: bool
    worst_violation: float
    sample_count: int
    witness: Optional[dict] = None
    floor: float = float("nan")

    @property
    def all_ok(self) -> bool:
        return self.positivity_ok and self.boundary_liminf_ok and self.vanishing_at_target_ok and self.supersolution_ok


def _outer(x):
    return x[..., :, None] * x[..., None, :]


def _eye_like(x):
    return np.broadcast_to(np.eye(x.shape[-1]), x.shape[:-1] + (x.shape[-1], x.shape[-1]))


# ------------------------------------------------------------ exterior sphere

def choose_sphere_parameter(delta: float, R0: float, params: PParams) -> float:
    """Return ``a`` with ``-R0 + a (p-1)/p delta^2 > (p+n-2)/(2p)`` by margin one."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    # (p-1)/p = beta/4 and (p+n-2)/(2p) = alpha/4, valid at p = inf too
    return (R0 + params.alpha / 4 + 1.0) / (params.beta / 4 * delta * delta)


def sphere_condition_margin(a: float, delta: float, R0: float, params: PParams) -> float:
    """Left minus right side of ``-R0 + a (p-1)/p delta^2 > (p+n-2)/(2p)``."""
    return -R0 + a * params.beta / 4 * delta * delta - params.alpha / 4


def south_pole_defect(a: float, R0: float, params: PParams, depths):
    """Sign-carrying part of ``w_t - A_p w`` on the axis below the south pole.

    For the sphere barrier centred at the origin, on ``x = x'`` the residual
    equals ``2a e^(-a R^2) [(t - t') - (p+n-2)/p]``. Returns the bracket at
    ``t - t' = -(R0 + depth)`` together with its log-magnitude prefactor, so
    the sign survives even when ``e^(-a R^2)`` underflows.
    """
    if a <= 0:
        raise ValueError("a must be positive")
    d = np.asarray(depths, dtype=float)
    dt = -(R0 + d)
    bracket = dt - params.alpha / 2
    log_prefactor = math.log(2 * a) - a * dt * dt
    return bracket, log_prefactor


def exterior_sphere_barrier(center_x, center_t: float, R0: float, contact: Point, params: PParams,
                            a: Optional[float] = None, allow_south_pole: bool = False) -> Barrier:
    """Barrier ``w = e^(-a R0^2) - e^(-a R^2)`` at a point touched by a ball.

    The field is checked on a small space-time ball externally tangent to the
    sphere at ``contact``. ``a`` overrides :func:`choose_sphere_parameter`
    (negative controls); ``allow_south_pole`` builds the known-defective
    south-pole case instead of rejecting it.
    """
    cx = np.atleast_1d(np.asarray(center_x, dtype=float))
    n = params.n
    if cx.shape[0] != n or contact.n != n:
        raise ValueError("dimension mismatch")
    if R0 <= 0:
        raise ValueError("R0 must be positive")
    zc = np.append(cx, center_t)
    z0 = contact.as_array()
    if abs(np.linalg.norm(z0 - zc) - R0) > 1e-9 * max(1.0, R0):
        raise ValueError("contact point is not on the sphere")
    normal = (z0 - zc) / R0
    d0 = float(np.linalg.norm(contact.x - cx))
    polar = d0 <= 1e-12 * R0
    north = polar and contact.t > center_t
    south = polar and contact.t < center_t
    if south and not allow_south_pole:
        raise ValueError("south-pole contact: the sphere barrier fails there for any positive a, "
                         "since p + n >= 2")
    if north and R0 < params.alpha / 2:
        raise ValueError(f"north-pole contact needs R0 >= alpha/2 = {params.alpha / 2:g}, got {R0:g}")
    if polar:
        delta = R0
        r_loc = R0 / 4
        case = "north" if north else "south"
    else:
        delta = d0 / 2
        r_loc = d0 / 4
        case = "lateral"
    a_val = choose_sphere_parameter(delta, R0, params) if a is None else float(a)
    if a_val <= 0:
        raise ValueError("a must be positive")

    def value(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        R2 = np.sum((x - cx) ** 2, axis=-1) + (t - center_t) ** 2
        return -math.exp(-a_val * R0 * R0) * np.expm1(-a_val * (R2 - R0 * R0))

    def scaled_value(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        R2 = np.sum((x - cx) ** 2, axis=-1) + (t - center_t) ** 2
        return -np.expm1(-a_val * (R2 - R0 * R0))

    def scaled_derivs(x, t):
        # jets divided by 2a e^(-a R^2)
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        y = x - cx
        ut = t - center_t
        d2u = _eye_like(y) - 2 * a_val * _outer(y)
        return np.asarray(ut, dtype=float), y, d2u

    def derivs(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        R2 = np.sum((x - cx) ** 2, axis=-1) + (t - center_t) ** 2
        K = 2 * a_val * np.exp(-a_val * R2)
        ut, du, d2u = scaled_derivs(x, t)
        return value(x, t), K * ut, K[..., None] * du, K[..., None, None] * d2u

    def axis(x, t):
        x = np.asarray(x, dtype=float)
        return np.all(x == cx, axis=-1)

    local_center = z0 + r_loc * normal
    local = spacetime_ball(local_center[:-1], local_center[-1], r_loc)

    def structured(count, rng):
        # points along the inward normal, plus the axis x = x' if it meets the local ball
        d = r_loc * np.geomspace(1e-6, 1.95, count // 2)
        along = z0 + d[:, None] * normal
        m = count - count // 2
        if polar:
            ts = local_center[-1] + r_loc * (2 * rng.random(m) - 1) * 0.999
            ax = np.column_stack([np.broadcast_to(cx, (m, n)), ts])
        else:
            v = rng.standard_normal((m, n + 1))
            v /= np.linalg.norm(v, axis=1, keepdims=True)
            ax = local_center + r_loc * rng.random(m)[:, None] ** (1.0 / (n + 1)) * v
        return np.concatenate([along, ax])

    tangents = np.linalg.svd(normal[None])[2][1:]

    def approach():
        d = r_loc * np.geomspace(0.5, 1e-13, 40)
        paths = []
        for direction in (normal, normal + 0.5 * tangents[0], normal - 0.5 * tangents[0]):
            u = direction / np.linalg.norm(direction)
            pts = z0 + d[:, None] * u
            paths.append(value(pts[:, :-1], pts[:, -1]))
        return paths

    return Barrier(
        label=f"sphere({case})", params=params, value=value, derivs=derivs, scaled_derivs=scaled_derivs,
        scaled_value=scaled_value, axis=axis, domain=local, target=contact,
        orientation=SUPERSOLUTION_BARRIER,
        constants={"a": a_val, "R0": R0, "delta": delta, "r_loc": r_loc, "case": case,
                   "margin": sphere_condition_margin(a_val, delta, R0, params)},
        structured_samples=structured, approach=approach)


# ------------------------------------------------------------ Petrovsky barrier

def petrovsky_barrier(c: float, params: PParams, c_time: float = DEFAULT_PETROVSKY_SLAB) -> Barrier:
    """Barrier ``w = -c L^(-(delta+1)) e^(|x|^2/(beta|t|)) + L^(-delta)`` with ``L = |log|t||``.

    ``delta = c alpha/beta``; the target is the origin of the factor-one
    Petrovsky domain on the slab ``(-c_time, 0)``.
    """
    if not 0 < c < 1:
        raise ValueError(f"c must lie in (0, 1), got {c}")
    if not 0 < c_time < INV_E:
        raise ValueError("c_time must lie in (0, 1/e)")
    n = params.n
    beta = params.beta
    delta = c * params.ratio
    dom = petrovsky_domain(1.0, c_time, params)

    def _ly(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        L = -np.log(-t)
        y = np.sum(x * x, axis=-1) / (beta * -t)
        return x, t, L, y

    def value(x, t):
        _, _, L, y = _ly(x, t)
        return np.exp(-delta * np.log(L)) * (1 - c * np.exp(y) / L)

    def scaled_derivs(x, t):
        # jets divided by K = L^(-delta-1)/|t|
        x, t, L, y = _ly(x, t)
        E = np.exp(y)
        ut = c * (delta + 1) * E / L - c * E * y - delta
        g = -2 * c * E / beta
        du = g[..., None] * x
        d2u = g[..., None, None] * (_eye_like(x) + (2 / (beta * -t))[..., None, None] * _outer(x))
        return ut, du, d2u

    def derivs(x, t):
        x, t, L, y = _ly(x, t)
        K = np.exp(-(delta + 1) * np.log(L)) / -t
        ut, du, d2u = scaled_derivs(x, t)
        return value(x, t), K * ut, K[..., None] * du, K[..., None, None] * d2u

    def bracket(x, t):
        _, _, L, y = _ly(x, t)
        return -c * (delta + 1) / L - c * params.ratio + delta * np.exp(-y)

    def axis(x, t):
        return np.all(np.asarray(x) == 0, axis=-1)

    def structured(count, rng):
        # log-uniform L between the slab edge and ~600 (|t| down to 1e-260)
        L0 = -math.log(c_time)
        L = np.exp(rng.uniform(math.log(L0), math.log(600.0), count))
        t = -np.exp(-L)
        theta = np.where(np.arange(count) % 3 == 0, 0.0, rng.random(count))
        r = np.sqrt(theta * beta * -t * np.log(L))
        dirs = rng.standard_normal((count, n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        return np.column_stack([r[:, None] * dirs, t])

    def approach():
        # along y = theta * log L, L = 10^j; t = -e^(-L) itself is not representable
        logL = np.log(10.0) * np.arange(1, 301)
        return [np.exp(-delta * logL) * (1 - c * np.exp((th - 1) * logL)) for th in (0.0, 0.5, 0.95)]

    return Barrier(
        label="petrovsky", params=params, value=value, derivs=derivs, scaled_derivs=scaled_derivs,
        scaled_value=value, axis=axis, domain=dom, target=Point(np.zeros(n), 0.0),
        orientation=SUPERSOLUTION_BARRIER,
        constants={"c": c, "delta": delta, "c_time": c_time},
        structured_samples=structured, approach=approach, bracket=bracket)


# ------------------------------------------------------------ irregularity witness

@dataclass(frozen=True)
class SlabCertificate:
    """Lower bounds on ``s = log|log|t||`` for the witness construction."""

    stated_condition: float
    certified: float
    log_term: float
    containment: float

    @property
    def s_min(self) -> float:
        return max(self.stated_condition, self.certified, self.log_term, self.containment)


def witness_S(s, y, eps1: float, k: float, params: PParams, normalized: bool = False):
    """``S = t L^(1+eps1) (w_t - A_p w)`` in coordinates ``s = log L``, ``y = |x|^2/(beta|t|)``.

    ``S >= 0`` is the subsolution condition (``t < 0``). ``normalized``
    divides by ``exp(max(k y, eps1 s - 2 log s))`` so the sign survives
    where ``S`` itself overflows.
    """
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    A = params.ratio * k + (1 + eps1) * np.exp(-s)
    logB = eps1 * s - 2 * np.log(s)
    M = np.maximum(k * y, logB) if normalized else 0.0
    return np.exp(k * y - M) * (y * (k - k * k) - A) + np.exp(logB - M)


def witness_S_min(s, eps1: float, k: float, params: PParams, normalized: bool = False):
    """Closed-form ``min over y >= 0`` of :func:`witness_S`."""
    s = np.asarray(s, dtype=float)
    q = k - k * k
    A = params.ratio * k + (1 + eps1) * np.exp(-s)
    logB = eps1 * s - 2 * np.log(s)
    ystar = A / q - 1 / k
    ky = k * np.maximum(ystar, 0.0)
    M = np.maximum(ky, logB) if normalized else 0.0
    interior = np.exp(logB - M) - (q / k) * np.exp(ky - M)
    return np.where(ystar <= 0, np.exp(logB - M) - A * np.exp(-M), interior)


def irregularity_subsolution(eps1: float, k: float, m: float, params: PParams,
                             eps: Optional[float] = None) -> Barrier:
    """Witness ``w = -L^(-(1+eps1)) e^(k|x|^2/(beta|t|)) + 1/log L`` of irregularity.

    The witness domain is ``{w > m}`` on the slab ``s >= s_min``: there ``w``
    is a subsolution, ``w = m`` on the lateral boundary, and ``w -> 0 > m``
    along the axis. The slab is only representable in ``s = log|log|t||``;
    everything is evaluated in those coordinates. With ``eps`` given, the
    slab also guarantees containment in the Petrovsky domain of factor
    ``1 + eps``.
    """
    if eps1 <= 0:
        raise ValueError("eps1 must be positive")
    if not 0.5 < k < 1:
        raise ValueError("k must lie in (1/2, 1)")
    if m >= 0:
        raise ValueError("m must be negative")
    if eps is not None:
        if eps <= 0:
            raise ValueError("eps must be positive")
        if (eps1 + 1) / k >= 1 + eps / 2:
            raise ValueError(f"(eps1+1)/k = {(eps1 + 1) / k:.4g} must be < 1 + eps/2 = {1 + eps / 2:.4g}")
    n = params.n
    ratio = params.ratio

    def y_boundary(s):
        s = np.asarray(s, dtype=float)
        return ((1 + eps1) * s + np.log(1 / s - m)) / k

    def margin(s):
        return (1 + eps) * np.asarray(s, dtype=float) - y_boundary(s)

    stated = 8 * ratio / eps1
    log_term = math.log((1 + eps1) / (ratio * k))
    s_lo = max(2 / eps1, 1e-3)
    f = lambda s: float(witness_S_min(s, eps1, k, params))  # noqa: E731
    if f(s_lo) >= 0:
        certified = s_lo
    else:
        hi = 2 * s_lo
        while f(hi) < 0:
            hi *= 2
        certified = optimize.brentq(f, s_lo, hi, xtol=1e-12) * (1 + 1e-9)
    containment = 0.0
    if eps is not None:
        lo = max(1.0, s_lo)
        if margin(lo) <= 0:
            hi = 2 * lo
            while margin(hi) <= 0:
                hi *= 2
            containment = optimize.brentq(lambda s: float(margin(s)), lo, hi, xtol=1e-12) * (1 + 1e-9)
    cert = SlabCertificate(stated, certified, log_term, containment)
    s_min = cert.s_min

    def w_log(s, y):
        s = np.asarray(s, dtype=float)
        y = np.asarray(y, dtype=float)
        return -np.exp(k * y - (1 + eps1) * s) + 1 / s

    def value(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        L = -np.log(-t)
        y = np.sum(x * x, axis=-1) / (params.beta * -t)
        return w_log(np.log(L), y)

    def derivs(x, t):
        # direct jets for representable t, used to audit witness_S
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        L = -np.log(-t)
        s = np.log(L)
        f_ = -np.exp(-(1 + eps1) * s)
        fp = -(1 + eps1) * np.exp(-(2 + eps1) * s) / t
        gp = 1 / (s * s * L * t)
        r2 = np.sum(x * x, axis=-1)
        E = np.exp(-k * r2 / (params.beta * t))
        ut = fp * E + f_ * E * r2 * k / (params.beta * t * t) + gp
        gx = -2 * k / (params.beta * t)
        du = (f_ * E * gx)[..., None] * x
        d2u = (f_ * E * gx)[..., None, None] * (_eye_like(x) + gx[..., None, None] * _outer(x))
        return value(x, t), ut, du, d2u

    def scaled_derivs(x, t):
        raise NotImplementedError("use witness_S in log coordinates")

    def axis(x, t):
        return np.all(np.asarray(x) == 0, axis=-1)

    consts = {"eps1": eps1, "k": k, "m": m, "s_min": s_min, "s_stated": stated, "s_certified": certified,
              "s_log_term": log_term, "s_containment": containment}
    if eps is not None:
        consts["eps"] = eps
        consts["containment_margin"] = float(margin(s_min))
    b = Barrier(
        label="irregularity", params=params, value=value, derivs=derivs, scaled_derivs=scaled_derivs,
        scaled_value=value, axis=axis, domain=None, target=Point(np.zeros(n), 0.0),
        orientation=SUBSOLUTION_WITNESS, constants=consts, level=m)
    object.__setattr__(b, "w_log", w_log)
    object.__setattr__(b, "y_boundary", y_boundary)
    object.__setattr__(b, "certificate", cert)
    return b


# ------------------------------------------------------------ verification

def _sobol_inside(domain: Domain, count: int, seed: int):
    d = domain.n + 1
    sob = qmc.Sobol(d, scramble=True, seed=seed)
    lo, hi = domain.bbox.lo, domain.bbox.hi
    got = []
    total = 0
    m = max(7, int(math.ceil(math.log2(max(count, 2)))))
    for i in range(12):
        # keeps the total drawn a power of two
        z = lo + sob.random_base2(m + max(i - 1, 0)) * (hi - lo)
        with np.errstate(all="ignore"):
            keep = domain.inside(z)
        got.append(z[keep])
        total += int(keep.sum())
        if total >= count:
            break
    return np.concatenate(got)[:count]


def _scaled_residual(barrier: Barrier, z, side: str):
    x, t = z[:, :-1], z[:, -1]
    ut, du, d2u = barrier.scaled_derivs(x, t)
    on_axis = barrier.axis(x, t) | (np.linalg.norm(du, axis=-1) == 0)
    vals, _ = operator_values(du, d2u, barrier.params, tau=1e-300, side=side)
    if np.any(on_axis):
        env = np.atleast_1d(eval_envelope(d2u[on_axis], barrier.params, side))
        vals = vals.copy()
        vals[on_axis] = env
    return ut - vals


def verify_barrier(barrier: Barrier, n_samples: int = 10_000, tol: float = 1e-8, seed: int = 0,
                   liminf_radius: Optional[float] = None) -> BarrierReport:
    """Check the barrier axioms at quasi-random and structured samples.

    Supersolution barriers: (i) ``w > 0`` inside, (ii) ``w`` bounded below by
    a positive floor on the boundary away from the target, (iii) ``w -> 0``
    along three approach paths, (iv) ``w_t - A_p w >= -tol`` on scaled jets,
    with the lower envelope on the axis. Witnesses are checked in
    log-coordinates, see :func:`irregularity_subsolution`.
    """
    if n_samples < 100:
        raise ValueError("n_samples must be >= 100")
    if barrier.orientation == SUBSOLUTION_WITNESS:
        return _verify_witness(barrier, n_samples, tol, seed)
    rng = np.random.default_rng(seed)
    dom = barrier.domain
    inner = _sobol_inside(dom, n_samples, seed)
    extra = barrier.structured_samples(max(n_samples // 4, 100), rng) if barrier.structured_samples else np.empty((0, dom.n + 1))
    with np.errstate(all="ignore"):
        extra = extra[dom.inside(extra)]
    z = np.concatenate([inner, extra])
    witness = None
    worst = 0.0

    w = barrier.scaled_value(z[:, :-1], z[:, -1])
    positivity_ok = bool(np.all(w > 0))
    if not positivity_ok:
        i = int(np.argmin(w))
        worst = max(worst, float(-w[i]))
        witness = {"axiom": "positivity", "point": z[i].tolist(), "value": float(w[i])}

    target = barrier.target.as_array()
    bpts, _ = dom.sample_boundary(max(n_samples // 4, 100), rng)
    diam = float(np.linalg.norm(dom.bbox.hi - dom.bbox.lo))
    r = 0.1 * diam if liminf_radius is None else liminf_radius
    far = bpts[np.linalg.norm(bpts - target, axis=1) >= r]
    wb = barrier.scaled_value(far[:, :-1], far[:, -1]) if len(far) else np.array([np.inf])
    floor = float(np.min(wb))
    liminf_ok = bool(len(far) > 0 and floor > 0)
    if not liminf_ok:
        worst = max(worst, max(0.0, -floor))
        if witness is None and len(far):
            i = int(np.argmin(wb))
            witness = {"axiom": "boundary_liminf", "point": far[i].tolist(), "value": float(wb[i])}

    paths = barrier.approach()
    lasts = [float(abs(p[-1])) for p in paths]
    vanishing_ok = all(v < tol for v in lasts)
    if not vanishing_ok:
        worst = max(worst, max(lasts) - tol)
        if witness is None:
            witness = {"axiom": "vanishing", "last_values": lasts}

    res = _scaled_residual(barrier, z, "lower")
    i = int(np.argmin(res))
    super_ok = bool(res[i] >= -tol)
    if not super_ok:
        worst = max(worst, float(-res[i]))
        if witness is None or witness["axiom"] != "supersolution":
            witness = {"axiom": "supersolution", "point": z[i].tolist(), "value": float(res[i])}
    return BarrierReport(positivity_ok, liminf_ok, vanishing_ok, super_ok, float(worst),
                         int(len(z) + len(far)), witness, floor)


def _verify_witness(barrier: Barrier, n_samples: int, tol: float, seed: int) -> BarrierReport:
    c = barrier.constants
    eps1, k, m = c["eps1"], c["k"], c["m"]
    s0 = c["s_min"]
    params = barrier.params
    sob = qmc.Sobol(2, scramble=True, seed=seed)
    u = sob.random_base2(int(math.ceil(math.log2(n_samples))))[:n_samples]
    # s log-uniform over [s0, 1e6 s0], y uniform below the level curve
    s = s0 * np.exp(u[:, 0] * math.log(1e6))
    yb = barrier.y_boundary(s)
    y = u[:, 1] * yb
    s = np.concatenate([s, s, s])
    y = np.concatenate([y, np.zeros_like(y), 0.999999 * yb])
    worst = 0.0
    witness = None

    w = barrier.w_log(s, y)
    positivity_ok = bool(np.all(w > m))
    if not positivity_ok:
        i = int(np.argmin(w - m))
        worst = max(worst, float(m - w[i]))
        witness = {"axiom": "above_level", "s": float(s[i]), "y": float(y[i]), "value": float(w[i])}

    sb = s0 * np.exp(np.linspace(0, math.log(1e6), 200))
    wb = barrier.w_log(sb, barrier.y_boundary(sb))
    dev = float(np.max(np.abs(wb - m)))
    liminf_ok = dev <= max(tol, 1e-12 * abs(m))
    if not liminf_ok:
        worst = max(worst, dev)

    big = np.geomspace(s0, 1e12, 60)
    paths = [barrier.w_log(big, th * barrier.y_boundary(big)) for th in (0.0, 0.1, 0.3)]
    lasts = [float(abs(p[-1])) for p in paths]
    vanishing_ok = all(v < tol for v in lasts)
    if not vanishing_ok:
        worst = max(worst, max(lasts) - tol)

    S = witness_S(s, y, eps1, k, params, normalized=True)
    S_floor = float(np.min(witness_S_min(np.concatenate([s, sb]), eps1, k, params, normalized=True)))
    i = int(np.argmin(S))
    sub_ok = bool(S[i] >= -tol and S_floor >= -tol)
    if not sub_ok:
        worst = max(worst, float(-min(S[i], S_floor)))
        witness = {"axiom": "subsolution", "s": float(s[i]), "y": float(y[i]), "value": float(S[i])}
    return BarrierReport(positivity_ok, liminf_ok, vanishing_ok, sub_ok, float(worst), int(len(s) + len(sb)),
                         witness, floor=float(m))
