"""Implicit space-time domains ``{phi(x, t) < 0}``.

Every constructor returns a :class:`Domain` whose ``phi`` is vectorized:
``x`` has shape ``(..., n)`` and ``t`` shape ``(...)``. Domains also carry a
bounding box (space first, time last) and a boundary sampler used by the
barrier verifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import PParams, Point
from .expr import compile_expression

BOUNDARY_TOL = 1e-10
INV_E = math.exp(-1.0)


@dataclass(frozen=True)
class Box:
    """Axis-aligned space-time box; the last coordinate is time."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1 or np.any(hi <= lo):
            raise ValueError(f"degenerate box lo={lo}, hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n(self) -> int:
        return self.lo.shape[0] - 1

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return np.all((z >= self.lo) & (z <= self.hi), axis=-1)

    def covers(self, other: "Box") -> bool:
        return bool(np.all(self.lo <= other.lo) and np.all(self.hi >= other.hi))


@dataclass(frozen=True)
class BoundarySample:
    point: Point
    is_parabolic: bool


@dataclass(frozen=True, eq=False)
class Domain:
    phi: Callable
    bbox: Box
    label: str
    kind: str = "custom"
    constants: dict = field(default_factory=dict)
    boundary_sampler: Optional[Callable] = None
    parabolic: Optional[Callable] = None

    @property
    def n(self) -> int:
        return self.bbox.n

    def phi_z(self, z):
        """``phi`` on stacked space-time coordinates of shape ``(..., n+1)``."""
        z = np.asarray(z, dtype=float)
        return np.asarray(self.phi(z[..., :-1], z[..., -1]), dtype=float)

    def inside(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return self.bbox.contains(z) & (self.phi_z(z) < 0)

    def sample_boundary(self, count: int, rng: np.random.Generator):
        """Return ``(points, is_parabolic)`` with points of shape ``(count, n+1)``."""
        if self.boundary_sampler is None:
            raise NotImplementedError(f"domain {self.label!r} has no boundary sampler")
        pts = self.boundary_sampler(count, rng)
        if self.parabolic is not None:
            par = self.parabolic(pts)
        else:
            par = np.zeros(len(pts), dtype=bool)
        return pts, par


def contains(domain: Domain, point: Point) -> bool:
    """True iff ``point`` lies in the bounding box and ``phi(point) < 0``."""
    return bool(domain.inside(point.as_array()))


def _unit_directions(count, n, rng):
    if n == 1:
        return rng.choice([-1.0, 1.0], size=(count, 1))
    v = rng.standard_normal((count, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


# ---------------------------------------------------------------- cylinders

def cylinder(space_lo, space_hi, t0: float, t1: float) -> Domain:
    """Space-time cylinder ``Q x (t0, t1)`` with ``Q`` the open box ``(space_lo, space_hi)``."""
    lo = np.atleast_1d(np.asarray(space_lo, dtype=float))
    hi = np.atleast_1d(np.asarray(space_hi, dtype=float))
    if lo.shape != hi.shape or np.any(hi <= lo):
        raise ValueError("space box must be nondegenerate")
    if not t0 < t1:
        raise ValueError("need t0 < t1")
    n = lo.shape[0]
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    tc, th = 0.5 * (t0 + t1), 0.5 * (t1 - t0)

    def phi(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        space = np.max(np.abs(x - center) - half, axis=-1)
        return np.maximum(space, np.abs(t - tc) - th)

    def parabolic(z):
        z = np.atleast_2d(z)
        x, t = z[:, :-1], z[:, -1]
        on_side = np.any(np.abs(np.abs(x - center) - half) <= BOUNDARY_TOL, axis=-1)
        return (t < t1 - BOUNDARY_TOL) | on_side

    widths = np.append(hi - lo, t1 - t0)
    face_area = np.prod(widths) / widths  # area of the face orthogonal to each axis

    def sampler(count, rng):
        axis = rng.choice(n + 1, size=count, p=face_area / face_area.sum())
        side = rng.integers(0, 2, size=count)
        z = np.append(lo, t0) + rng.random((count, n + 1)) * widths
        box_lo, box_hi = np.append(lo, t0), np.append(hi, t1)
        rows = np.arange(count)
        z[rows, axis] = np.where(side == 0, box_lo[axis], box_hi[axis])
        return z

    return Domain(phi, Box(np.append(lo, t0), np.append(hi, t1)),
                  label=f"cylinder{n}d", kind="cylinder",
                  constants={"lo": tuple(lo), "hi": tuple(hi), "t0": t0, "t1": t1},
                  boundary_sampler=sampler, parabolic=parabolic)


# ------------------------------------------------------------- balls

def spacetime_ball(center_x, center_t: float, R: float) -> Domain:
    """Open ball ``|x - x'|^2 + (t - t')^2 < R^2``."""
    c = np.atleast_1d(np.asarray(center_x, dtype=float))
    if R <= 0:
        raise ValueError("R must be positive")
    n = c.shape[0]

    def phi(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        return np.sum((x - c) ** 2, axis=-1) + (t - center_t) ** 2 - R * R

    def sampler(count, rng):
        v = rng.standard_normal((count, n + 1))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        return np.append(c, center_t) + R * v

    zc = np.append(c, center_t)
    return Domain(phi, Box(zc - R, zc + R), label="ball", kind="ball",
                  constants={"center": tuple(c), "center_t": center_t, "R": R},
                  boundary_sampler=sampler)


def ball_exterior(center_x, center_t: float, R: float, space_lo, space_hi, t0: float, t1: float) -> Domain:
    """Cylinder ``(space_lo, space_hi) x (t0, t1)`` with a closed space-time ball removed."""
    box = cylinder(space_lo, space_hi, t0, t1)
    ball = spacetime_ball(center_x, center_t, R)

    def phi(x, t):
        return np.maximum(box.phi(x, t), -ball.phi(x, t))

    def sampler(count, rng):
        pts = np.concatenate([box.boundary_sampler(count, rng), ball.boundary_sampler(count, rng)])
        keep = np.abs(phi(pts[:, :-1], pts[:, -1])) <= 1e-9
        return pts[keep][:count]

    return Domain(phi, box.bbox, label="ball-exterior", kind="ball",
                  constants={"center": tuple(np.atleast_1d(center_x)), "center_t": center_t, "R": R,
                             "lo": tuple(np.atleast_1d(space_lo)), "hi": tuple(np.atleast_1d(space_hi)),
                             "t0": t0, "t1": t1, "complement": True},
                  boundary_sampler=sampler)


# ------------------------------------------------------------ Petrovsky

def loglog(t):
    """``log|log|t||`` for ``0 < |t| < 1``."""
    return np.log(-np.log(np.abs(t)))


def petrovsky_radius2(t, factor: float, beta: float):
    """Squared lateral radius ``-factor*beta*t*log|log|t||`` (``t < 0``)."""
    return -factor * beta * t * loglog(t)


def petrovsky_domain(factor: float, c: float, params: PParams) -> Domain:
    """Domain bounded by ``|x|^2 = -factor*beta*t*log|log|t||`` and ``{t = -c}``.

    ``factor = 1`` is the regular domain; ``factor > 1`` the irregular family.
    The time slab must satisfy ``c < 1/e`` so that ``log|log|t||`` stays
    positive on ``(-c, 0)``.
    """
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if not 0 < c < INV_E:
        raise ValueError(f"c must satisfy 0 < c < 1/e = {INV_E:.6f} so that log|log|t|| > 0 on (-c, 0); got {c}")
    beta = params.beta
    n = params.n

    def phi(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        r2 = np.sum(x * x, axis=-1)
        slab = (t > -c) & (t < 0)
        ts = np.where(slab, t, -0.5 * c)
        with np.errstate(all="ignore"):
            lateral = r2 + factor * beta * ts * loglog(ts)
        lateral = np.where(slab, lateral, np.where(t >= 0, r2, -(t + c)))
        return np.maximum(np.maximum(lateral, -(t + c)), t)

    ts = -np.geomspace(1e-12, c, 4000)
    width = float(np.sqrt(np.max(petrovsky_radius2(ts, factor, beta)))) * 1.001

    def sampler(count, rng):
        n_lat = count - count // 5
        u = rng.random(n_lat)
        # half uniform, half log-uniform in |t| to resolve the cusp
        t_lat = np.where(rng.random(n_lat) < 0.5, -c * u, -c * np.exp(-30 * u))
        t_lat = np.clip(t_lat, -c * (1 - 1e-12), -1e-300)
        r = np.sqrt(petrovsky_radius2(t_lat, factor, beta))
        lat = np.column_stack([r[:, None] * _unit_directions(n_lat, n, rng), t_lat])
        n_bot = count - n_lat
        rb = np.sqrt(petrovsky_radius2(np.array(-c), factor, beta))
        dirs = _unit_directions(n_bot, n, rng)
        rad = rb * rng.random(n_bot) ** (1.0 / n)
        bot = np.column_stack([rad[:, None] * dirs, np.full(n_bot, -c)])
        return np.concatenate([lat, bot])

    lo = np.append(np.full(n, -width), -c)
    hi = np.append(np.full(n, width), 0.0)
    return Domain(phi, Box(lo, hi), label=f"petrovsky(factor={factor:g},c={c:g})", kind="petrovsky",
                  constants={"factor": factor, "c": c}, boundary_sampler=sampler)


# ------------------------------------------------------------ heat balls

def log_fundamental(y2, s, params: PParams):
    """``log H_p(y, s) = -(alpha/beta) log s - |y|^2/(beta s)`` for ``s > 0``."""
    return -params.ratio * np.log(s) - y2 / (params.beta * s)


def heat_ball(level: float, apex_x, apex_t: float, params: PParams) -> Domain:
    """Normalized p-parabolic ball ``{H_p(apex_x - x, apex_t - t) > level}``.

    The apex ``(apex_x, apex_t)`` is its latest moment and lies on the
    boundary.
    """
    if level <= 0:
        raise ValueError("level must be positive")
    if params.infinite:
        raise ValueError("heat balls need finite p")
    apex = np.atleast_1d(np.asarray(apex_x, dtype=float))
    n = apex.shape[0]
    a = params.ratio
    beta = params.beta

    def phi(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        y2 = np.sum((apex - x) ** 2, axis=-1)
        s = apex_t - t
        past = s > 0
        with np.errstate(all="ignore"):
            H = np.exp(log_fundamental(y2, np.where(past, s, 1.0), params))
        return np.where(past, level - H, level - s)

    s_max = level ** (-1.0 / a)
    s_star = s_max * math.exp(-1.0)
    r_max = math.sqrt(beta * s_star * a) * 1.001

    def radius(s):
        return np.sqrt(np.maximum(beta * s * (-a * np.log(s) - math.log(level)), 0.0))

    def sampler(count, rng):
        u = rng.random(count)
        s = np.where(rng.random(count) < 0.5, s_max * u, s_max * np.exp(-25 * u))
        s = np.clip(s, 1e-300, s_max)
        r = radius(s)
        return np.column_stack([apex + r[:, None] * _unit_directions(count, n, rng), apex_t - s])

    lo = np.append(apex - r_max, apex_t - s_max)
    hi = np.append(apex + r_max, apex_t)
    return Domain(phi, Box(lo, hi), label=f"heatball(level={level:g})", kind="heatball",
                  constants={"level": level, "apex": tuple(apex), "apex_t": apex_t},
                  boundary_sampler=sampler)


def custom_domain(expression: str, space_lo, space_hi, t0: float, t1: float) -> Domain:
    """Domain ``{expression < 0}`` inside the given bounding box."""
    lo = np.atleast_1d(np.asarray(space_lo, dtype=float))
    hi = np.atleast_1d(np.asarray(space_hi, dtype=float))
    f = compile_expression(expression, lo.shape[0])
    return Domain(f, Box(np.append(lo, t0), np.append(hi, t1)), label=f"expr[{expression}]",
                  kind="custom-expression", constants={"expr": expression})


# ------------------------------------------------------------ projection

def bisect_boundary(domain: Domain, inside, outside, iterations: int = 80):
    """Vectorized bisection on segments ``inside -> outside``.

    ``inside`` and ``outside`` have shape ``(m, n+1)``; ``phi`` must be
    negative at the first and nonnegative at the second. Returns the
    endpoint of the final bracket with the smaller ``|phi|``.
    """
    lo = np.array(inside, dtype=float, copy=True)
    hi = np.array(outside, dtype=float, copy=True)
    if lo.size == 0:
        return lo
    plo = domain.phi_z(lo)
    phi_hi = domain.phi_z(hi)
    if np.any(~(plo < 0)) or np.any(~(phi_hi >= 0)):
        raise ValueError("no sign change on a projection segment")
    done = phi_hi == 0
    for _ in range(iterations):
        if done.all():
            break
        mid = 0.5 * (lo + hi)
        pm = domain.phi_z(mid)
        neg = (pm < 0) & ~done
        pos = ~neg & ~done
        lo[neg] = mid[neg]
        hi[pos] = mid[pos]
        phi_hi = np.where(pos, pm, phi_hi)
        done |= phi_hi == 0
    plo = domain.phi_z(lo)
    take_hi = np.abs(phi_hi) <= np.abs(plo)
    return np.where(take_hi[:, None], hi, lo)


def project_to_boundary(domain: Domain, point: Point, exterior: Point) -> BoundarySample:
    """Bisect from an interior ``point`` toward an ``exterior`` stencil neighbor."""
    z = bisect_boundary(domain, point.as_array()[None], exterior.as_array()[None])[0]
    if abs(float(domain.phi_z(z))) > BOUNDARY_TOL:
        raise ValueError(f"projection did not reach the boundary (|phi|={abs(float(domain.phi_z(z))):.3g})")
    par = bool(domain.parabolic(z[None])[0]) if domain.parabolic is not None else False
    return BoundarySample(Point.from_array(z), par)


def on_boundary(domain: Domain, point: Point, radius: float = 1e-6, samples: int = 256, seed: int = 0) -> bool:
    """Topological boundary membership: ``|phi| <= 1e-10`` or both signs nearby."""
    z = point.as_array()
    with np.errstate(all="ignore"):
        val = float(domain.phi_z(z))
    if math.isfinite(val) and abs(val) <= BOUNDARY_TOL:
        return True
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((samples, z.shape[0]))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    # radii spread over many scales so thin cusps are hit
    radii = radius * np.geomspace(1e-6, 1.0, samples)[:, None]
    pts = z + radii * v
    with np.errstate(all="ignore"):
        vals = domain.phi_z(pts)
    return bool(np.any(vals < 0) and np.any(vals >= 0))
