import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pparab.core import Point, eval_operator, make_params
from pparab.domains import Box, cylinder, petrovsky_domain, spacetime_ball
from pparab.solutions import fundamental, traveling_wave
from pparab.solver import (BOUNDARY, EXTERIOR, INTERIOR, CFLError, GridSpec, cfl_max_dt,
                           check_discrete_comparison, comparison_report, discrete_operator, error_vs, grid_for,
                           rasterize, solve)


def test_cfl_examples():
    assert cfl_max_dt(0.1, make_params(2, 1)) == pytest.approx(0.0045)
    assert cfl_max_dt(0.1, make_params(math.inf, 3)) == pytest.approx(0.0045)
    with pytest.raises(ValueError):
        cfl_max_dt(0.0, make_params(2, 1))


@given(st.floats(2, 1e4), st.integers(1, 5), st.floats(1e-3, 1))
def test_cfl_decreases_in_n(p, n, h):
    assert cfl_max_dt(h, make_params(p, n + 1)) < cfl_max_dt(h, make_params(p, n))


# ------------------------------------------------------------ rasterize

def test_rasterize_three_node_example():
    D = cylinder([-1], [1], 0, 1)
    r = rasterize(D, GridSpec(0.5, 0.001, D.bbox))
    x = r.axes[0]
    inside = (x > -1) & (x < 1)
    np.testing.assert_array_equal(x[inside], [-0.5, 0.0, 0.5])
    row = r.node_class[2][inside]
    np.testing.assert_array_equal(row, [BOUNDARY, INTERIOR, BOUNDARY])
    # earliest slice of the domain is all boundary
    np.testing.assert_array_equal(r.node_class[1][inside], [BOUNDARY] * 3)
    assert np.all(r.node_class[0] == EXTERIOR)
    # lateral datum points land on x = +-1
    lateral = r.boundary_points[np.isclose(r.boundary_points[:, 1], 0.002)]
    np.testing.assert_allclose(sorted(lateral[:, 0]), [-1.0, 1.0])


def test_rasterize_interior_neighbours_are_in_domain():
    D = spacetime_ball([0.0, 0.0], 0.0, 1.0)
    P = make_params(3, 2)
    r = rasterize(D, grid_for(D, 0.1, P))
    cls = r.node_class
    interior = cls == INTERIOR
    for axis in (1, 2):
        for step in (1, -1):
            nb = np.roll(cls, step, axis=axis)
            assert np.all(nb[interior] != EXTERIOR)


def test_rasterize_south_pole_cap_is_boundary():
    D = spacetime_ball([0.0], 0.0, 1.0)
    r = rasterize(D, grid_for(D, 0.1, make_params(2, 1)))
    first = np.nonzero((r.node_class != EXTERIOR).any(axis=1))[0][0]
    row = r.node_class[first]
    assert np.all(row[row != EXTERIOR] == BOUNDARY)


def test_rasterize_petrovsky_cusp_nodes_boundary():
    # interior needs both spatial neighbours inside the cusp; none survive at the apex slice
    P = make_params(2, 1)
    D = petrovsky_domain(1.0, 0.3, P)
    h = 0.02
    r = rasterize(D, grid_for(D, h, P))
    x = r.axes[0]
    for k in np.nonzero((r.node_class == INTERIOR).any(axis=1))[0]:
        t = r.times[k]
        xi = x[r.node_class[k] == INTERIOR]
        for side in (-h, h):
            assert np.all(D.phi_z(np.column_stack([xi + side, np.full(len(xi), t)])) < 0)
    last = r.times >= -1e-12
    assert not (r.node_class[last] == INTERIOR).any()


def test_rasterize_rejects_small_bbox():
    D = cylinder([-1], [1], 0, 1)
    with pytest.raises(ValueError):
        rasterize(D, GridSpec(0.1, 0.001, Box([-0.5, 0.0], [0.5, 1.0])))


# ------------------------------------------------------------ discrete operator

def test_discrete_operator_quadratic_and_linear():
    h = 0.1
    x = np.arange(-2, 3) * h
    assert discrete_operator(x ** 2 / 2, (2,), make_params(2, 1), h) == pytest.approx(0.5, abs=1e-12)
    X, Y = np.meshgrid(x, x, indexing="ij")
    assert discrete_operator((X ** 2 + Y ** 2) / 2, (2, 2), make_params(2, 2), h) == pytest.approx(1.0, abs=1e-12)
    for p in (2, 4, math.inf):
        assert discrete_operator(0.3 * X - 1.7 * Y + 2, (2, 2), make_params(p, 2), h) == pytest.approx(0, abs=1e-12)


def test_discrete_operator_consistency_1d():
    # error against the analytic operator shrinks at order two along the line
    P = make_params(3, 1)
    sol = fundamental(P)
    x0, t0 = 0.7, 1.0
    exact = eval_operator(sol.jet(Point([x0], t0)), P).value

    def err(h):
        xs = x0 + h * np.array([-1.0, 0.0, 1.0])
        vals = sol.value(xs[:, None], np.full(3, t0))
        return abs(discrete_operator(vals, (1,), P, h) - exact)

    assert err(0.02) / err(0.01) >= 1.8


def test_vanishing_gradient_fallback():
    # flat gradient: average of extreme second differences
    h = 0.1
    x = np.arange(-1, 2) * h
    X, Y = np.meshgrid(x, x, indexing="ij")
    U = X ** 2 - 0.5 * Y ** 2
    P = make_params(4, 2)
    got = discrete_operator(U, (1, 1), P, h)
    lap = 2 - 1
    # axis second differences 2 and -1; diagonals (2 - 1)/2 = 0.5
    assert got == pytest.approx(lap / 4 + (2 / 4) * (2 - 1) / 2, abs=1e-12)


# ------------------------------------------------------------ solve

@pytest.mark.parametrize("p,n", [(2, 1), (4, 2), (math.inf, 1)])
def test_constant_datum_is_exact(p, n):
    P = make_params(p, n)
    D = spacetime_ball(np.zeros(n), 0.0, 1.0)
    g = solve(D, lambda x, t: np.full(len(t), 2.5), grid_for(D, 0.2, P), P)
    assert np.all(g.values[g.interior()] == 2.5)


def test_convergence_fundamental_1d():
    P = make_params(3, 1)
    sol = fundamental(P)
    D = cylinder([-2], [2], 0.5, 1.5)
    errs = [error_vs(solve(D, sol.value, grid_for(D, h, P), P), sol).linf for h in (0.2, 0.1, 0.05)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[0] / errs[1] >= 1.5 and errs[1] / errs[2] >= 1.5


def test_convergence_traveling_wave_1d():
    P = make_params(4, 1)
    sol = traveling_wave([1.0], 0.5, 0.0, 1.0, P)
    D = cylinder([-1], [1], 0.0, 1.0)
    errs = [error_vs(solve(D, sol.value, grid_for(D, h, P), P), sol).linf for h in (0.2, 0.1, 0.05)]
    assert errs[0] > errs[1] > errs[2]


def test_error_report_invariants_and_self():
    P = make_params(3, 1)
    sol = fundamental(P)
    D = cylinder([-2], [2], 0.5, 1.5)
    g = solve(D, sol.value, grid_for(D, 0.1, P), P)
    rep = error_vs(g, sol)
    assert rep.linf >= 0 and rep.l2 >= 0
    assert rep.linf >= rep.l2 / math.sqrt(rep.n_interior) - 1e-15
    same = error_vs(g, g)
    assert same.linf == 0.0 and same.l2 == 0.0


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([2, 3, 10, math.inf]))
def test_discrete_maximum_principle(seed, p):
    rng = np.random.default_rng(seed)
    a, b, c = rng.normal(size=3)
    P = make_params(p, 1)
    D = cylinder([-1], [1], 0, 0.5)

    def datum(x, t):
        return np.sin(3 * a * x[:, 0]) + b * np.cos(2 * x[:, 0]) + c * t

    g = solve(D, datum, grid_for(D, 0.1, P), P)
    lo, hi = g.boundary_data.min(), g.boundary_data.max()
    v = g.values[g.interior()]
    assert np.all(v >= lo - 1e-12) and np.all(v <= hi + 1e-12)


def test_p2_equals_heat_scheme():
    P = make_params(2, 2)
    D = cylinder([-1, -1], [1, 1], 0, 0.2)
    h = 0.1
    spec = grid_for(D, h, P)
    g = solve(D, lambda x, t: np.cos(x[:, 0]) * np.sin(x[:, 1] + 1) + t, spec, P)
    for k in range(2, len(g.times)):
        prev, cur = g.values[k - 1], g.values[k]
        mask = g.node_class[k] == INTERIOR
        lap = (np.roll(prev, 1, 0) + np.roll(prev, -1, 0) + np.roll(prev, 1, 1) + np.roll(prev, -1, 1) - 4 * prev) / h ** 2
        np.testing.assert_allclose(cur[mask], (prev + spec.dt * 0.5 * lap)[mask], rtol=0, atol=1e-13)


@pytest.mark.parametrize("s", [0.5, 2.0, 4.0])
def test_homogeneity_dyadic_1d(s):
    P = make_params(5, 1)
    D = cylinder([-1], [1], 0, 0.5)

    def f(x, t):
        return np.exp(-x[:, 0] ** 2) * (1 + t)

    spec = grid_for(D, 0.1, P)
    a = solve(D, f, spec, P)
    b = solve(D, lambda x, t: s * f(x, t), spec, P)
    m = a.interior()
    assert np.array_equal(b.values[m], s * a.values[m])


def test_homogeneity_p2_in_2d():
    P = make_params(2, 2)
    D = spacetime_ball([0.0, 0.0], 0.0, 1.0)
    spec = grid_for(D, 0.2, P)
    f = lambda x, t: x[:, 0] ** 2 - x[:, 1] + t
    a = solve(D, f, spec, P)
    b = solve(D, lambda x, t: 3.0 * f(x, t), spec, P)
    m = a.interior()
    np.testing.assert_allclose(b.values[m], 3.0 * a.values[m], rtol=1e-13, atol=1e-13)


def test_translation_invariance_bitwise():
    P = make_params(3, 1)
    shift_x, shift_t = 0.5, 0.25
    f = lambda x, t: np.sin(2 * x[:, 0]) + t
    D0 = cylinder([-1], [1], 0, 0.5)
    D1 = cylinder([-1 + shift_x], [1 + shift_x], shift_t, 0.5 + shift_t)
    h, dt = 0.125, 2.0 ** -8  # dyadic, below the bound
    assert dt <= cfl_max_dt(h, P)
    a = solve(D0, f, GridSpec(h, dt, D0.bbox), P)
    b = solve(D1, lambda x, t: f(x - shift_x, t - shift_t), GridSpec(h, dt, D1.bbox), P)
    assert np.array_equal(a.node_class, b.node_class)
    m = a.interior()
    assert np.array_equal(a.values[m], b.values[m])


def test_cfl_violation_rejected():
    P = make_params(2, 1)
    D = cylinder([-1], [1], 0, 1)
    with pytest.raises(CFLError, match="CFL violation"):
        solve(D, lambda x, t: 0 * t, GridSpec(0.1, 0.1, D.bbox), P)


def test_four_times_cfl_blows_up():
    P = make_params(3, 1)
    sol = fundamental(P)
    D = cylinder([-2], [2], 0.5, 1.5)
    spec = GridSpec(0.05, 4 * cfl_max_dt(0.05, P), D.bbox)
    bad = solve(D, sol.value, spec, P, check_cfl=False)
    assert np.nanmax(np.abs(bad.values)) > 1e6
    ok = solve(D, sol.value, grid_for(D, 0.05, P), P)
    assert np.max(np.abs(ok.values[ok.interior()])) <= np.max(np.abs(ok.boundary_data)) + 1e-12


def test_subquadratic_requires_flag():
    P = make_params(1.5, 1)
    D = cylinder([-1], [1], 0, 0.2)
    with pytest.raises(ValueError, match="experimental"):
        solve(D, lambda x, t: 0 * t, grid_for(D, 0.1, P), P)
    g = solve(D, lambda x, t: x[:, 0] ** 2, grid_for(D, 0.1, P), P, experimental_subquadratic=True)
    assert np.all(np.isfinite(g.values[g.interior()]))


def test_boundary_values_pinned():
    P = make_params(3, 1)
    D = cylinder([-1], [1], 0, 0.5)
    g = solve(D, lambda x, t: x[:, 0] + 2 * t, grid_for(D, 0.1, P), P)
    np.testing.assert_array_equal(g.values[g.node_class == BOUNDARY], g.boundary_data)


# ------------------------------------------------------------ comparison

def test_comparison_constants_and_bump():
    P = make_params(3, 1)
    D = cylinder([-1], [1], 0, 0.5)
    spec = grid_for(D, 0.1, P)
    assert check_discrete_comparison(D, lambda x, t: 0 * t, lambda x, t: 0 * t + 1, spec, P)
    low = lambda x, t: np.cos(x[:, 0])
    high = lambda x, t: np.cos(x[:, 0]) + 0.3 * np.exp(-10 * (np.abs(x[:, 0]) - 1) ** 2)
    assert check_discrete_comparison(D, low, high, spec, P)


def test_comparison_negative_control():
    P = make_params(3, 1)
    D = cylinder([-1], [1], 0, 0.5)
    h = 0.05
    spec = GridSpec(h, 4 * cfl_max_dt(h, P), D.bbox)
    low = lambda x, t: np.cos(7 * x[:, 0])
    high = lambda x, t: np.cos(7 * x[:, 0]) + 1e-3 * (1 + x[:, 0] ** 2)
    rep = comparison_report(D, low, high, spec, P, check_cfl=False, check_finite=False)
    assert not rep.ok and rep.violations > 0
