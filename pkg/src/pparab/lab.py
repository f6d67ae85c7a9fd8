"""Experiments on boundary regularity and the large-p limit.

Each experiment is a pure function of its inputs; runs over several grids
or exponents go through a thread pool capped by ``PPARAB_THREADS``.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .core import PParams, Point, make_params, residuals
from .domains import Domain, cylinder, on_boundary
from .solutions import fundamental
from .solver import INTERIOR, GridSolution, GridSpec, cfl_max_dt, grid_for, rasterize, solve

REGULAR = "consistent_with_regular"
IRREGULAR = "consistent_with_irregular"
INCONCLUSIVE = "inconclusive"

GAP_TOL = 0.05
IRR_FLOOR = 0.15


def worker_count() -> int:
    env = os.environ.get("PPARAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _pmap(fn, items):
    items = list(items)
    if len(items) <= 1 or worker_count() == 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=min(worker_count(), len(items))) as pool:
        return list(pool.map(fn, items))


# ------------------------------------------------------------ regularity probe

@dataclass(frozen=True)
class RegularityReport:
    target: Point
    levels: list  # (h, approach_value)
    datum_at_target: float
    verdict: str
    gap_sequence: list
    probe_points: list

    def trend_regular(self) -> bool:
        g = self.gap_sequence
        return all(b < a for a, b in zip(g, g[1:]))

    def trend_irregular(self) -> bool:
        g = self.gap_sequence
        return g[-1] >= g[-2]


def distance_datum(target: Point) -> Callable:
    """``f(eta) = min(1, |eta - target|)`` in space-time."""
    z0 = target.as_array()

    def f(x, t):
        z = np.concatenate([np.asarray(x, dtype=float), np.asarray(t, dtype=float)[..., None]], axis=-1)
        return np.minimum(1.0, np.linalg.norm(z - z0, axis=-1))

    return f


def classify(gaps: Sequence[float], gap_tol: float = GAP_TOL, irr_floor: float = IRR_FLOOR) -> str:
    gaps = list(gaps)
    if all(b < a for a, b in zip(gaps, gaps[1:])) and gaps[-1] < gap_tol:
        return REGULAR
    if len(gaps) >= 3 and all(g > irr_floor for g in gaps[-3:]):
        return IRREGULAR
    return INCONCLUSIVE


def _probe_value(gsol: GridSolution, probe: np.ndarray):
    idx = np.nonzero(gsol.node_class == INTERIOR)
    mesh = gsol.mesh()
    pts = np.concatenate([mesh[idx[1:]], gsol.times[idx[0]][:, None]], axis=1)
    j = int(np.argmin(np.linalg.norm(pts - probe, axis=1)))
    return float(gsol.values[tuple(a[j] for a in idx)]), pts[j]


def probe_regularity(domain: Domain, target: Point, params: PParams, h_levels: Sequence[float],
                     gap_tol: float = GAP_TOL, irr_floor: float = IRR_FLOOR,
                     approach: Optional[Sequence[float]] = None) -> RegularityReport:
    """Approach ``target`` along a fixed path and watch the solution's gap to the datum.

    The datum is ``min(1, dist(., target))``, which vanishes only at the
    target. At each ``h`` the value is read at the interior node nearest to
    ``target + 2h * approach`` (default: straight back in time).
    """
    h_levels = [float(h) for h in h_levels]
    if len(h_levels) < 3 or any(b >= a for a, b in zip(h_levels, h_levels[1:])):
        raise ValueError("h_levels must be strictly decreasing with at least 3 entries")
    if not on_boundary(domain, target):
        raise ValueError("target is not on the domain boundary")
    n = domain.n
    d = np.zeros(n + 1)
    d[-1] = -1.0
    if approach is not None:
        d = np.asarray(approach, dtype=float)
        d = d / np.linalg.norm(d)
    f = distance_datum(target)
    z0 = target.as_array()

    def run(h):
        gsol = solve(domain, f, grid_for(domain, h, params), params)
        return _probe_value(gsol, z0 + 2 * h * d)

    out = _pmap(run, h_levels)
    values = [v for v, _ in out]
    datum0 = float(f(target.x[None], np.array([target.t]))[0])
    gaps = [abs(v - datum0) for v in values]
    return RegularityReport(target, list(zip(h_levels, values)), datum0, classify(gaps, gap_tol, irr_floor),
                            gaps, [p.tolist() for _, p in out])


# ------------------------------------------------------------ cylinder top

@dataclass(frozen=True)
class CylinderTopReport:
    interiors_identical: bool
    eps: float
    min_residual: float  # of h + eps/(T - t) over samples
    min_expected: float  # eps/(T - t)^2 over samples
    max_discrete_residual: float  # |residual| of the discrete solution itself
    bracket_width: float  # 2 eps/(T - t) at the middle of the time window
    samples: int

    @property
    def bracket_ok(self) -> bool:
        return self.min_residual > 0


def grid_jets(gsol: GridSolution, mask: np.ndarray):
    """Central-difference jets of a grid solution at nodes in ``mask``.

    Nodes need valued neighbours one step away in every spatial direction
    (including diagonals) and at slices ``k - 1`` and ``k + 1``.
    """
    V = gsol.values
    h, dt = gsol.spec.h, gsol.spec.dt
    n = gsol.n
    idx = np.nonzero(mask)
    k = idx[0]
    sp = idx[1:]

    def at(dk, off):
        return V[(k + dk,) + tuple(a + o for a, o in zip(sp, off))]

    zero = (0,) * n
    u = at(0, zero)
    ut = (at(1, zero) - at(-1, zero)) / (2 * dt)
    du = np.empty((len(k), n))
    d2u = np.empty((len(k), n, n))
    eye = np.eye(n, dtype=int)
    for i in range(n):
        up, um = at(0, eye[i]), at(0, -eye[i])
        du[:, i] = (up - um) / (2 * h)
        d2u[:, i, i] = (up - 2 * u + um) / (h * h)
        for j in range(i + 1, n):
            m = (at(0, eye[i] + eye[j]) - at(0, eye[i] - eye[j]) - at(0, eye[j] - eye[i])
                 + at(0, -eye[i] - eye[j])) / (4 * h * h)
            d2u[:, i, j] = d2u[:, j, i] = m
    return idx, u, ut, du, d2u


def cylinder_top_experiment(space_lo, space_hi, t0: float, t1: float, params: PParams, h: float, eps: float,
                            datum: Optional[Callable] = None, top_bump: float = 1.0,
                            margin: Optional[float] = None) -> CylinderTopReport:
    """Top-data irrelevance and the residual of ``h + eps/(T - t)``.

    Two solves differ only in data prescribed for ``t >= t1``; their
    interiors must agree bitwise. The discrete solution ``h`` then gives
    ``h + eps/(T - t)`` with residual ``eps/(T - t)^2`` up to the scheme's
    own residual, evaluated with grid jets and threshold ``tau = h``.

    Samples stay ``margin`` (default a tenth of the smallest extent) away
    from the parabolic boundary: the boundary datum is read at the bisected
    boundary point, which leaves an O(1) jet layer at the bottom corners.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    lo_arr, hi_arr = np.atleast_1d(np.asarray(space_lo, float)), np.atleast_1d(np.asarray(space_hi, float))
    if margin is None:
        margin = 0.1 * min(float(np.min(hi_arr - lo_arr)), t1 - t0)
    dom = cylinder(space_lo, space_hi, t0, t1)
    if datum is None:
        datum = fundamental(params).value
    base = datum

    def with_top(x, t):
        t = np.asarray(t, dtype=float)
        return base(x, t) + np.where(t >= t1, top_bump, 0.0)

    spec = grid_for(dom, h, params)
    raster = rasterize(dom, spec)
    a = solve(dom, base, spec, params, raster=raster)
    b = solve(dom, with_top, spec, params, raster=raster)
    inter = a.interior()
    identical = bool(np.array_equal(a.values[inter], b.values[inter]))

    # nodes whose full jet stencil is valued
    valued = np.isfinite(a.values)
    ok = inter.copy()
    ok[0] = ok[-1] = False
    ok[1:-1] &= valued[:-2] & valued[2:]
    for off in itertools.product((-1, 0, 1), repeat=a.n):
        if any(off):
            sh = valued
            for ax, o in enumerate(off):
                sh = np.roll(sh, -o, axis=ax + 1)
            ok &= sh
    mesh = a.mesh()
    far = np.all((mesh >= lo_arr + margin) & (mesh <= hi_arr - margin), axis=-1)
    ok &= far[None] & (a.times >= t0 + margin)[(slice(None),) + (None,) * a.n]
    idx, u, ut, du, d2u = grid_jets(a, ok)
    T = t1
    t = a.times[idx[0]]
    res, _ = residuals(ut, du, d2u, params, tau=h)
    extra = eps / (T - t) ** 2
    res_tilde = res + extra
    return CylinderTopReport(identical, eps, float(np.min(res_tilde)), float(np.min(extra)),
                             float(np.max(np.abs(res))), float(2 * eps / (T - 0.5 * (t0 + t1))), int(len(t)))


# ------------------------------------------------------------ large p

@dataclass(frozen=True)
class SweepRow:
    p: float
    h: float
    linf_gap_to_infty: float


def sweep_p(domain: Domain, datum: Callable, h: float, p_list: Sequence[float], n: int) -> list:
    """L-infinity gap between the p-solution and the infinity-solution on one shared grid."""
    plist = [float(p) for p in p_list]
    all_params = [make_params(p, n) for p in plist] + [make_params(math.inf, n)]
    dt = min(cfl_max_dt(h, P) for P in all_params)
    spec = GridSpec(h, dt, domain.bbox)
    raster = rasterize(domain, spec)
    sols = _pmap(lambda P: solve(domain, datum, spec, P, raster=raster), all_params)
    ref = sols[-1]
    mask = ref.interior()
    rows = []
    for p, s in zip(plist, sols[:-1]):
        rows.append(SweepRow(p, h, float(np.max(np.abs(s.values[mask] - ref.values[mask])))))
    return rows


@dataclass(frozen=True)
class LimitRow:
    x: tuple
    t: float
    p: float
    Hp: float
    W: float
    gap: float


def fundamental_limit_check(points, p_list: Sequence[float], n: Optional[int] = None) -> list:
    """``|H_p(x, t) - W(x, t)|`` per point and exponent, ``W = t^(-1/2) e^(-|x|^2/(4t))``."""
    rows = []
    for x, t in points:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if t <= 0:
            raise ValueError("points need t > 0")
        dim = x.shape[0] if n is None else n
        W = float(fundamental(make_params(math.inf, dim)).value(x[None], np.array([t]))[0])
        for p in p_list:
            Hp = float(fundamental(make_params(p, dim)).value(x[None], np.array([t]))[0])
            rows.append(LimitRow(tuple(x.tolist()), float(t), float(p), Hp, W, abs(Hp - W)))
    return rows
