"""Explicit monotone finite differences for ``u_t = A_p u`` on implicit domains.

Boundary values are prescribed on the whole Euclidean boundary, elliptic
style: every grid node with ``phi < 0`` whose stencil leaves the domain
is a boundary node, and its value is the datum at the point where the
segment toward the first exterior stencil neighbour crosses ``phi = 0``.
Time marches forward from the earliest slice, so data on the top of a
domain is never read.

Node classes per slice ``k``:

* interior: ``phi < 0`` at the node and its axis neighbours, at slices
  ``k`` and ``k - 1``;
* boundary: ``phi < 0`` but not interior;
* exterior: everything else.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .core import PParams
from .domains import Box, Domain, bisect_boundary

EXTERIOR = 0
INTERIOR = 1
BOUNDARY = 2

GRAD_THRESHOLD_FACTOR = 1.0  # vanishing-gradient threshold = factor * h


class CFLError(ValueError):
    """Time step above the stability bound."""


class InstabilityError(RuntimeError):
    """Non-finite values appeared during time marching."""


def cfl_max_dt(h: float, params: PParams) -> float:
    """Largest stable ``dt``: ``0.9 h^2 / (2 (n/p + max(1/p, (p-1)/p)))``."""
    if h <= 0:
        raise ValueError("h must be positive")
    if params.infinite:
        return 0.9 * h * h / 2.0
    p = params.p
    return 0.9 * h * h / (2.0 * (params.n / p + max(1.0 / p, (p - 1.0) / p)))


@dataclass(frozen=True)
class GridSpec:
    h: float
    dt: float
    bbox: Box

    def __post_init__(self):
        if not (self.h > 0 and self.dt > 0):
            raise ValueError("h and dt must be positive")


def grid_for(domain: Domain, h: float, params: PParams, dt: Optional[float] = None) -> GridSpec:
    """Grid over the domain's bounding box, ``dt`` defaulting to the CFL bound."""
    return GridSpec(h, cfl_max_dt(h, params) if dt is None else dt, domain.bbox)


# ------------------------------------------------------------ stencil geometry

def _offsets(n):
    return np.array(list(itertools.product((-1, 0, 1), repeat=n)), dtype=int)


def _offset_index(off):
    off = np.asarray(off)
    n = off.shape[-1]
    return np.sum((off + 1) * 3 ** np.arange(n - 1, -1, -1), axis=-1)


@dataclass
class Raster:
    axes: list
    times: np.ndarray
    node_class: np.ndarray  # (K+1, *spatial) int8
    boundary_index: tuple  # np.nonzero of node_class == BOUNDARY
    boundary_points: np.ndarray  # (m, n+1)
    ghost_index: np.ndarray  # (g,) flat (k, node) index of the centre at slice k
    ghost_offset: np.ndarray  # (g,) offset index into the 3^n neighbourhood
    ghost_points: np.ndarray  # (g, n+1)


def _axes(bbox: Box, h: float):
    axes = []
    for d in range(bbox.n):
        lo, hi = bbox.lo[d], bbox.hi[d]
        N = int(math.ceil((hi - lo) / h - 1e-9))
        axes.append(lo + h * np.arange(-1, N + 2))
    return axes


def _times(bbox: Box, dt: float):
    t0, t1 = bbox.lo[-1], bbox.hi[-1]
    K = int(math.floor((t1 - t0) / dt + 1e-9))
    return t0 + dt * np.arange(K + 1)


def _shift(mask, axis, step):
    """``out[i] = mask[i + step]`` along ``axis``, False past the edge."""
    out = np.zeros_like(mask)
    src = [slice(None)] * mask.ndim
    dst = [slice(None)] * mask.ndim
    if step > 0:
        src[axis], dst[axis] = slice(step, None), slice(None, -step)
    else:
        src[axis], dst[axis] = slice(None, step), slice(-step, None)
    out[tuple(dst)] = mask[tuple(src)]
    return out


def _clipped(domain: Domain, box: Box) -> Domain:
    """Same domain with ``phi >= 0`` forced outside the grid box."""

    def phi(x, t):
        z = np.concatenate([np.asarray(x, dtype=float), np.asarray(t, dtype=float)[..., None]], axis=-1)
        val = np.asarray(domain.phi(x, t), dtype=float)
        return np.where(box.contains(z), val, np.maximum(val, 1.0))

    return Domain(phi, domain.bbox, domain.label, domain.kind, domain.constants)


def rasterize(domain: Domain, spec: GridSpec) -> Raster:
    """Classify grid nodes and locate the boundary datum point of each boundary node."""
    if not spec.bbox.covers(domain.bbox):
        raise ValueError("grid box must cover the domain's bounding box")
    n = domain.n
    domain = _clipped(domain, spec.bbox)
    axes = _axes(spec.bbox, spec.h)
    times = _times(spec.bbox, spec.dt)
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    shape = mesh.shape[:-1]
    K1 = len(times)
    inside = np.empty((K1,) + shape, dtype=bool)
    with np.errstate(all="ignore"):
        for k, t in enumerate(times):
            z = np.concatenate([mesh, np.full(shape + (1,), t)], axis=-1)
            inside[k] = spec.bbox.contains(z) & (domain.phi_z(z) < 0)

    # spatial: node and its axis neighbours inside
    spatial_ok = inside.copy()
    for d in range(n):
        for s in (-1, 1):
            spatial_ok &= _shift(inside, d + 1, s)
    interior = np.zeros_like(inside)
    interior[1:] = spatial_ok[1:] & spatial_ok[:-1]
    node_class = np.where(interior, INTERIOR, np.where(inside, BOUNDARY, EXTERIOR)).astype(np.int8)
    if not interior.any():
        raise ValueError(f"domain {domain.label!r} has no interior nodes at h={spec.h}")

    # boundary datum points: first exterior neighbour in a fixed order
    bidx = np.nonzero(node_class == BOUNDARY)
    m = len(bidx[0])
    k_b = bidx[0]
    sp_b = bidx[1:]
    start = np.concatenate([mesh[sp_b], times[k_b][:, None]], axis=1)
    target = np.full((m, n + 1), np.nan)
    found = np.zeros(m, dtype=bool)
    candidates = []
    for d in range(n):
        for s in (-1, 1):
            candidates.append((0, d, s))
    candidates.append((-1, None, 0))
    for d in range(n):
        for s in (-1, 1):
            candidates.append((-1, d, s))
    for dk, d, s in candidates:
        kk = k_b + dk
        idx = [a.copy() for a in sp_b]
        valid = kk >= 0
        if d is not None:
            idx[d] = idx[d] + s
            valid &= (idx[d] >= 0) & (idx[d] < shape[d])
        take = ~found & valid
        if not take.any():
            continue
        sel = np.nonzero(take)[0]
        nb_inside = inside[(kk[sel],) + tuple(a[sel] for a in idx)]
        hit = sel[~nb_inside]
        if len(hit):
            pt = np.concatenate([mesh[tuple(a[hit] for a in idx)], times[kk[hit]][:, None]], axis=1)
            target[hit] = pt
            found[hit] = True
    # nodes whose whole stencil lies inside but lack a previous slice
    lonely = ~found
    if lonely.any():
        # only possible at k = 0: the datum is taken at the node itself
        target[lonely] = start[lonely]
    bpts = start.copy()
    seg = found
    if seg.any():
        with np.errstate(all="ignore"):
            bpts[seg] = bisect_boundary(domain, start[seg], target[seg])

    # ghost values for exterior diagonal corners at slice k-1
    offs = _offsets(n)
    diag = np.nonzero(np.sum(offs != 0, axis=1) >= 2)[0]
    iidx = np.nonzero(node_class == INTERIOR)
    gi, go, gp = [], [], []
    if n > 1 and len(diag):
        k_i = iidx[0] - 1
        flat = np.ravel_multi_index(iidx, node_class.shape)
        centre = np.concatenate([mesh[iidx[1:]], times[k_i][:, None]], axis=1)
        for oi in diag:
            o = offs[oi]
            nb = tuple(a + o[j] for j, a in enumerate(iidx[1:]))
            ok = np.ones(len(k_i), dtype=bool)
            for j in range(n):
                ok &= (nb[j] >= 0) & (nb[j] < shape[j])
            nb_c = tuple(np.clip(a, 0, shape[j] - 1) for j, a in enumerate(nb))
            ext = ~ok | ~inside[(k_i,) + nb_c]
            if not ext.any():
                continue
            sel = np.nonzero(ext)[0]
            corner = centre[sel].copy()
            corner[:, :n] += spec.h * o
            with np.errstate(all="ignore"):
                pts = bisect_boundary(domain, centre[sel], corner)
            gi.append(flat[sel])
            go.append(np.full(len(sel), oi))
            gp.append(pts)
    if gi:
        ghost_index = np.concatenate(gi)
        ghost_offset = np.concatenate(go)
        ghost_points = np.concatenate(gp)
    else:
        ghost_index = np.zeros(0, dtype=np.intp)
        ghost_offset = np.zeros(0, dtype=int)
        ghost_points = np.zeros((0, n + 1))
    return Raster(axes, times, node_class, bidx, bpts, ghost_index, ghost_offset, ghost_points)


# ------------------------------------------------------------ operator

def _neighbourhood_values(U, nodes, n):
    """Gather ``U`` over the ``3^n`` neighbourhood; exterior entries are NaN."""
    offs = _offsets(n)
    shape = U.shape
    out = np.empty((len(nodes[0]), len(offs)))
    for oi, o in enumerate(offs):
        idx = tuple(np.clip(a + o[j], 0, shape[j] - 1) for j, a in enumerate(nodes))
        ok = np.ones(len(nodes[0]), dtype=bool)
        for j, a in enumerate(nodes):
            ok &= (a + o[j] >= 0) & (a + o[j] < shape[j])
        out[:, oi] = np.where(ok, U[idx], np.nan)
    return out


def _interp(nb, v, n, sign):
    """Multilinear interpolation at ``sign * v`` (in units of h) within the 3^n cube."""
    sg = np.where(v >= 0, 1, -1) * sign
    w = np.abs(v)
    total = np.zeros(len(v))
    for bits in itertools.product((0, 1), repeat=n):
        b = np.array(bits)
        off = b[None, :] * sg
        weight = np.prod(np.where(b[None, :] == 1, w, 1 - w), axis=1)
        idx = _offset_index(off)
        total += weight * nb[np.arange(len(v)), idx]
    return total


def _direction_second_difference(nb, v, n, h):
    c = nb[:, (3 ** n - 1) // 2]
    return (_interp(nb, v, n, 1) + _interp(nb, v, n, -1) - 2 * c) / (h * h)


def _extreme_average(nb, n, h):
    """Mean of the smallest and largest axis/diagonal second differences."""
    c = nb[:, (3 ** n - 1) // 2]
    diffs = []
    eye = np.eye(n, dtype=int)
    for i in range(n):
        ip, im = _offset_index(eye[i]), _offset_index(-eye[i])
        diffs.append((nb[:, ip] + nb[:, im] - 2 * c) / (h * h))
    for i in range(n):
        for j in range(i + 1, n):
            for s in (1, -1):
                d = eye[i] + s * eye[j]
                diffs.append((nb[:, _offset_index(d)] + nb[:, _offset_index(-d)] - 2 * c) / (2 * h * h))
    D = np.stack(diffs, axis=1)
    return 0.5 * (D.min(axis=1) + D.max(axis=1))


def apply_operator(nb, params: PParams, h: float, experimental_subquadratic: bool = False):
    """Discrete operator on neighbourhood rows ``nb`` of shape ``(m, 3^n)``."""
    nb = np.asarray(nb, dtype=float)
    n = int(round(math.log(nb.shape[1], 3)))
    c = nb[:, (3 ** n - 1) // 2]
    if n == 1:
        D = (nb[:, 2] + nb[:, 0] - 2 * c) / (h * h)
        if params.p < 2 and experimental_subquadratic:
            return ((params.p - 1) / params.p) * D
        return params.lap_coef * D + params.dir_coef * D
    eye = np.eye(n, dtype=int)
    lap = np.zeros(len(nb))
    grad = np.empty((len(nb), n))
    for i in range(n):
        up, um = nb[:, _offset_index(eye[i])], nb[:, _offset_index(-eye[i])]
        lap += (up + um - 2 * c) / (h * h)
        grad[:, i] = (up - um) / (2 * h)
    gnorm = np.linalg.norm(grad, axis=1)
    classical = gnorm > GRAD_THRESHOLD_FACTOR * h
    out = np.empty(len(nb))
    fb = ~classical
    if classical.any():
        v = grad[classical] / gnorm[classical, None]
        sub = nb[classical]
        if params.p < 2 and experimental_subquadratic:
            out[classical] = _subquadratic_split(sub, v, params, n, h)
        else:
            out[classical] = params.lap_coef * lap[classical] + params.dir_coef * _direction_second_difference(sub, v, n, h)
    if fb.any():
        avg = _extreme_average(nb[fb], n, h)
        if params.p < 2 and experimental_subquadratic:
            out[fb] = (params.alpha / 2) * avg
        else:
            out[fb] = params.lap_coef * lap[fb] + params.dir_coef * avg
    return out


def _subquadratic_split(nb, v, params, n, h):
    # (1/p) sum over an orthonormal complement of v + ((p-1)/p) along v
    m = len(v)
    M = np.broadcast_to(np.eye(n), (m, n, n)).copy()
    M[:, :, 0] = v
    Q, _ = np.linalg.qr(M)
    total = ((params.p - 1) / params.p) * _direction_second_difference(nb, v, n, h)
    for j in range(1, n):
        total += (1 / params.p) * _direction_second_difference(nb, Q[:, :, j], n, h)
    return total


def discrete_operator(values, node, params: PParams, h: float) -> float:
    """Discrete ``A_p`` of a spatial array at the multi-index ``node``."""
    U = np.asarray(values, dtype=float)
    nodes = tuple(np.array([i]) for i in node)
    nb = _neighbourhood_values(U, nodes, U.ndim)
    return float(apply_operator(nb, params, h)[0])


# ------------------------------------------------------------ solve

def _eval_datum(datum, pts):
    if len(pts) == 0:
        return np.zeros(0)
    vals = np.asarray(datum(pts[:, :-1], pts[:, -1]), dtype=float)
    return np.broadcast_to(vals, (len(pts),)).astype(float)


@dataclass
class GridSolution:
    spec: GridSpec
    params: PParams
    axes: list
    times: np.ndarray
    node_class: np.ndarray
    values: np.ndarray  # NaN at exterior nodes
    boundary_points: np.ndarray
    boundary_data: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.axes)

    def interior(self) -> np.ndarray:
        return self.node_class == INTERIOR

    def mesh(self) -> np.ndarray:
        return np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1)

    def nearest_node(self, x, t):
        idx = tuple(int(np.argmin(np.abs(a - xi))) for a, xi in zip(self.axes, np.atleast_1d(x)))
        k = int(np.argmin(np.abs(self.times - t)))
        return (k,) + idx

    def node_coords(self, index):
        k = index[0]
        return np.array([self.axes[j][i] for j, i in enumerate(index[1:])]), float(self.times[k])


def solve(domain: Domain, datum: Callable, spec: GridSpec, params: PParams, *, check_cfl: bool = True,
          check_finite: bool = True, experimental_subquadratic: bool = False,
          raster: Optional[Raster] = None) -> GridSolution:
    """Forward-Euler march of the monotone scheme.

    ``datum(x, t)`` is vectorized over ``x`` of shape ``(m, n)`` and ``t``
    of shape ``(m,)``. ``check_cfl=False`` and ``check_finite=False`` exist
    for negative controls.
    """
    if params.p < 2 and not experimental_subquadratic:
        raise ValueError("1 < p < 2 requires experimental_subquadratic=True (no convergence claim)")
    if check_cfl and spec.dt > cfl_max_dt(spec.h, params) * (1 + 1e-12):
        raise CFLError(f"CFL violation: dt={spec.dt:.6g} exceeds bound {cfl_max_dt(spec.h, params):.6g}")
    r = rasterize(domain, spec) if raster is None else raster
    n = domain.n
    cls = r.node_class
    bvals = _eval_datum(datum, r.boundary_points)
    gvals = _eval_datum(datum, r.ghost_points)
    values = np.full(cls.shape, np.nan)
    values[r.boundary_index] = bvals
    # ghosts grouped per slice
    gk = np.unravel_index(r.ghost_index, cls.shape)[0] if len(r.ghost_index) else np.zeros(0, dtype=int)
    order = np.argsort(gk, kind="stable")
    gk_sorted = gk[order]
    for k in range(1, cls.shape[0]):
        mask = cls[k] == INTERIOR
        if not mask.any():
            continue
        nodes = np.nonzero(mask)
        U = values[k - 1]
        if n == 1:
            i = nodes[0]
            nb = np.stack([U[i - 1], U[i], U[i + 1]], axis=1)
        else:
            nb = _neighbourhood_values(U, nodes, n)
            lo, hi = np.searchsorted(gk_sorted, [k, k + 1])
            if hi > lo:
                sel = order[lo:hi]
                flat_here = np.ravel_multi_index(nodes, U.shape)
                flat_g = np.unravel_index(r.ghost_index[sel], cls.shape)
                flat_g = np.ravel_multi_index(flat_g[1:], U.shape)
                rows = np.searchsorted(flat_here, flat_g)
                nb[rows, r.ghost_offset[sel]] = gvals[sel]
        step = apply_operator(nb, params, spec.h, experimental_subquadratic)
        new = U[nodes] + spec.dt * step
        if check_finite and not np.all(np.isfinite(new)):
            raise InstabilityError(f"non-finite values at t={r.times[k]:.6g}")
        values[k][nodes] = new
    return GridSolution(spec, params, r.axes, r.times, cls, values, r.boundary_points, bvals,
                        meta={"domain": domain.label})


# ------------------------------------------------------------ errors and comparison

@dataclass(frozen=True)
class ErrorReport:
    linf: float
    l2: float
    h: float
    dt: float
    n_interior: int


def _final_quarter(gsol: GridSolution):
    interior = gsol.interior()
    active = np.nonzero(interior.reshape(len(gsol.times), -1).any(axis=1))[0]
    t_a, t_b = gsol.times[active[0]], gsol.times[active[-1]]
    late = gsol.times >= t_a + 0.75 * (t_b - t_a) - 1e-12
    return interior & late.reshape((-1,) + (1,) * gsol.n)


def error_vs(gsol: GridSolution, exact: Union["GridSolution", object]) -> ErrorReport:
    """L-infinity and ``sqrt(sum err^2)`` over interior nodes of the last quarter in time."""
    mask = _final_quarter(gsol)
    idx = np.nonzero(mask)
    got = gsol.values[idx]
    if isinstance(exact, GridSolution):
        ref = exact.values[idx]
    else:
        mesh = gsol.mesh()
        x = mesh[idx[1:]]
        t = gsol.times[idx[0]]
        ref = np.asarray(exact.value(x, t), dtype=float)
    err = np.abs(got - ref)
    linf = float(np.max(err)) if len(err) else 0.0
    return ErrorReport(linf, float(np.sqrt(np.sum(err * err))), gsol.spec.h, gsol.spec.dt, int(len(err)))


@dataclass(frozen=True)
class ComparisonReport:
    ok: bool
    violations: int
    worst: float
    checked: int


def comparison_report(domain: Domain, datum_low: Callable, datum_high: Callable, spec: GridSpec,
                      params: PParams, tol: float = 1e-12, **solve_kwargs) -> ComparisonReport:
    """Count nodes where ``u_low > u_high + tol``; non-finite values count as violations."""
    raster = rasterize(domain, spec)
    lo = solve(domain, datum_low, spec, params, raster=raster, **solve_kwargs)
    hi = solve(domain, datum_high, spec, params, raster=raster, **solve_kwargs)
    mask = lo.interior()
    a, b = lo.values[mask], hi.values[mask]
    with np.errstate(invalid="ignore"):
        bad = ~(a <= b + tol)
        gap = np.where(np.isfinite(a - b), a - b, np.inf)
    worst = float(np.max(gap)) if len(gap) else 0.0
    return ComparisonReport(not bad.any(), int(bad.sum()), worst, int(mask.sum()))


def check_discrete_comparison(domain: Domain, datum_low: Callable, datum_high: Callable, spec: GridSpec,
                              params: PParams, **solve_kwargs) -> bool:
    """True iff the low-data solution stays below the high-data one at every interior node."""
    return comparison_report(domain, datum_low, datum_high, spec, params, **solve_kwargs).ok
