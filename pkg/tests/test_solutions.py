import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma, gammainc

from pparab.core import Jet2, Point, eval_envelope, make_params, numeric_jet, residuals
from pparab.solutions import (SOLUTION, SUBSOLUTION, SUPERSOLUTION, catalog, fundamental, heat_transform,
                              sample_points, separable, similarity_integral, similarity_profile, traveling_wave,
                              verify_entry)

GRID = [(2, 1), (3, 2), (10, 3)]


# ------------------------------------------------------------ traveling waves

def test_traveling_wave_constants():
    sol = traveling_wave([1.0], 1.0, 0.0, 1.0, make_params(2, 1))
    assert sol.constants["m"] == pytest.approx(0.5)
    assert sol.field([0.7], 0.7) == pytest.approx(1.0)


def test_traveling_wave_rejects_degenerate():
    P = make_params(3, 2)
    with pytest.raises(ValueError):
        traveling_wave([0.0, 0.0], 1.0, 0, 1, P)
    with pytest.raises(ValueError):
        traveling_wave([1.0, 0.0], 0.0, 0, 1, P)


@pytest.mark.parametrize("p", [2, 3.5, math.inf])
def test_traveling_wave_residual_vs_fd(p):
    P = make_params(p, 2)
    sol = traveling_wave([1.0, -0.5], 1.0, 2.0, -1.0, P)
    x, t = sample_points(2, 50, seed=3)
    for xi, ti in zip(x, t):
        jet = numeric_jet(sol.field, Point(xi, ti), 1e-3)
        res, _ = residuals(jet.ut, jet.du[None], jet.d2u[None], P)
        assert abs(res[0]) < 1e-4
    _, ut, du, d2u = sol.derivs(x, t)
    assert np.max(np.abs(residuals(ut, du, d2u, P)[0])) < 1e-9


# ------------------------------------------------------------ separable

def test_separable_example_p2_n1():
    # A_q = c/alpha: u = |x|^2 + t at p=2, n=1, c=1 (alpha = 1)
    P = make_params(2, 1)
    sol = separable(1.0, P)
    assert sol.constants["A_q"] == pytest.approx(1.0)
    u, ut, du, d2u = sol.derivs(np.array([[0.3]]), np.array([0.2]))
    assert residuals(ut, du, d2u, P)[0][0] == pytest.approx(0.0, abs=1e-15)


def test_separable_zero_and_p_equals_n():
    sol = separable(0.0, make_params(3, 2))
    assert sol.field([0.4, 0.1], 0.9) == 0.0
    with pytest.raises(ValueError):
        separable(1.0, make_params(3, 3))


@given(st.floats(-5, 5), st.floats(1.5, 20), st.integers(1, 4))
def test_separable_envelope_at_origin(c, p, n):
    if abs(p - n) < 1e-9:
        return
    P = make_params(p, n)
    _, ut, _, d2u = separable(c, P).derivs(np.zeros((1, n)), np.array([1.0]))
    for side in ("lower", "upper"):
        assert ut[0] == pytest.approx(eval_envelope(d2u[0], P, side), abs=1e-12)


def test_separable_with_p_harmonic_term():
    P = make_params(4, 2)
    sol = separable(0.7, P, c1=1.3)
    x, t = sample_points(2, 40, seed=5)
    _, ut, du, d2u = sol.derivs(x, t)
    assert np.max(np.abs(residuals(ut, du, d2u, P)[0])) < 1e-12


# ------------------------------------------------------------ similarity

def test_similarity_zero_at_origin_and_gaussian_limit():
    P = make_params(2, 1)
    sol = similarity_integral(1.0, P)
    assert sol.field([0.0], 1.0) == 0.0
    assert similarity_profile(1e4, P) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-10)


@pytest.mark.parametrize("p,n", [(2, 1), (3, 2), (10, 3), (7, 1)])
def test_similarity_profile_matches_incomplete_gamma(p, n):
    # independent route: int_0^z s^-a e^(-s/b) ds = b^(1-a) Gamma(1-a) P(1-a, z/b)
    P = make_params(p, n)
    a, b = P.ratio, P.beta
    for z in (0.01, 0.5, 2.0, 9.0):
        ref = b ** (1 - a) * gamma(1 - a) * gammainc(1 - a, z / b)
        assert similarity_profile(z, P) == pytest.approx(ref, rel=1e-9)


def test_similarity_lower_limit_switch():
    P = make_params(2, 3)  # p < n: alpha/beta > 1
    sol = similarity_integral(1.0, P)
    assert sol.constants["lower"] == 1.0
    assert sol.field([1.0, 0.0, 0.0], 1.0) == pytest.approx(0.0, abs=1e-14)


def test_similarity_roles_and_time_domain():
    P = make_params(3, 2)
    assert similarity_integral(2.0, P).sign_role == SUBSOLUTION
    assert similarity_integral(-2.0, P).sign_role == SUPERSOLUTION
    assert similarity_integral(0.0, P).sign_role == SOLUTION
    with pytest.raises(ValueError):
        similarity_integral(1.0, P).field([0.3, 0.0], -1.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 20.0), st.floats(0.0, 20.0))
def test_similarity_monotone_in_zeta(z1, z2):
    P = make_params(4, 2)
    lo, hi = sorted((z1, z2))
    assert similarity_profile(lo, P) <= similarity_profile(hi, P) + 1e-12


# ------------------------------------------------------------ fundamental

def test_fundamental_at_origin_unit_time():
    for p, n in GRID:
        assert fundamental(make_params(p, n)).field(np.zeros(n), 1.0) == pytest.approx(1.0)


def test_fundamental_large_p_limit():
    W = math.exp(-0.25)
    assert abs(fundamental(make_params(1e6, 1)).field([1.0], 1.0) - W) < 1e-5
    gaps = [abs(fundamental(make_params(p, 1)).field([1.0], 1.0) - W) for p in (1e3, 1e6)]
    assert gaps[1] < gaps[0]


def test_fundamental_time_domain_and_negative_variant():
    P = make_params(3, 1)
    with pytest.raises(ValueError):
        fundamental(P).field([0.0], -1.0)
    neg = fundamental(P, "negative")
    assert neg.reversed_time
    assert neg.field([0.0], -1.0) == pytest.approx(1.0)
    # H_p(x, -t) solves the reversed equation u_t = -A_p u
    x = np.array([[0.3], [0.8]])
    t = np.array([-0.5, -1.2])
    _, ut, du, d2u = neg.derivs(x, t)
    res, _ = residuals(ut, du, d2u, P)
    np.testing.assert_allclose(res, 2 * ut, rtol=1e-12)
    with pytest.raises(ValueError):
        fundamental(P, "sideways")


@settings(max_examples=40)
@given(st.integers(0, 10_000), st.sampled_from([(2, 1), (3, 2), (10, 3)]))
def test_fundamental_rotation_invariant(seed, pn):
    p, n = pn
    sol = fundamental(make_params(p, n))
    rng = np.random.default_rng(seed)
    R, _ = np.linalg.qr(rng.normal(size=(n, n)))
    x = rng.normal(size=n)
    assert sol.field(R @ x, 0.7) == pytest.approx(sol.field(x, 0.7), rel=1e-12)


@pytest.mark.parametrize("maker", ["fundamental", "similarity"])
def test_scaling_invariance(maker):
    # v(x, t) = u(A x, A^2 t) with A = 2 is again a solution
    P = make_params(3, 2)
    sol = fundamental(P) if maker == "fundamental" else similarity_integral(1.0, P)
    A = 2.0
    x, t = sample_points(2, 10, seed=11)
    for xi, ti in zip(x, t):
        jet = numeric_jet(lambda y, s: sol.field(A * np.asarray(y), A * A * s), Point(xi, ti), 1e-3)
        res, _ = residuals(jet.ut, jet.du[None], jet.d2u[None], P)
        assert abs(res[0]) < 2e-4


# ------------------------------------------------------------ heat transform

def test_heat_transform_constants():
    ht = heat_transform(make_params(3, 1))
    assert (ht.nu, ht.coefficient, ht.exponent) == pytest.approx((1.0, 2 / 3, 0.0))
    ht = heat_transform(make_params(2, 1))
    assert (ht.nu, ht.coefficient) == pytest.approx((1.0, 0.5))
    with pytest.raises(ValueError):
        heat_transform(make_params(3, 3))


@pytest.mark.parametrize("p,n", [(3, 2), (5, 3), (1.5, 2)])
def test_heat_transform_residuals_vanish_together(p, n):
    ht = heat_transform(make_params(p, n))
    stationary = ht.check(lambda rho, t: rho)
    assert stationary.worst_u < 1e-4 and stationary.worst_v < 1e-4
    # a non-solution: the two residuals coincide
    bumped = ht.check(lambda rho, t: rho + t)
    assert bumped.worst_diff < 1e-4
    assert bumped.worst_u == pytest.approx(1.0, abs=1e-4)


# ------------------------------------------------------------ catalog

def test_catalog_composition():
    cat = catalog(make_params(2, 1))
    assert [s.label for s in cat.entries] == ["traveling_wave", "separable", "similarity_integral", "fundamental"]
    cat = catalog(make_params(3, 3))
    assert cat.skipped == {"separable": "p = n", "heat_transform": "p = n"}
    assert "separable" not in [s.label for s in cat.entries]


@pytest.mark.parametrize("p,n", GRID + [(math.inf, 2)])
def test_catalog_entries_verified(p, n):
    for sol in catalog(make_params(p, n)).entries:
        chk = verify_entry(sol)
        assert chk.samples == 200
        assert chk.max_residual < 1e-8, sol.label
        assert chk.fd_residual < 1e-4, sol.label
        if not math.isnan(chk.jet_ratio):
            assert 3.5 <= chk.jet_ratio <= 4.5, sol.label


def test_sample_points_region():
    x, t = sample_points(3, 100, seed=2)
    assert x.shape == (100, 3)
    assert np.all(np.linalg.norm(x, axis=1) >= 0.25)
    assert np.all((t >= 0.5) & (t <= 1.5))
    x2, _ = sample_points(3, 100, seed=2)
    assert np.array_equal(x, x2)


def test_solution_jet_method():
    sol = fundamental(make_params(3, 2))
    jet = sol.jet(Point([0.5, 0.5], 1.0))
    assert isinstance(jet, Jet2)
    assert not sol.is_singular(Point([0.5, 0.5], 1.0))
    assert sol.is_singular(Point([0.5, 0.5], 0.0))
