import math

import numpy as np
import pytest

from pparab.core import Point, make_params
from pparab.domains import ball_exterior, cylinder, petrovsky_domain
from pparab.lab import (INCONCLUSIVE, IRREGULAR, REGULAR, classify, cylinder_top_experiment, distance_datum,
                        fundamental_limit_check, probe_regularity, sweep_p, worker_count)

P21 = make_params(2, 1)
H_LEVELS = [0.04, 0.02, 0.01]


def benign_datum(x, t):
    return np.cos(x[:, 0]) + 0.3 * np.sin(2 * x[:, 0])


# ------------------------------------------------------------ verdict logic

@pytest.mark.parametrize("gaps,verdict", [
    ([0.3, 0.1, 0.01], REGULAR),
    ([0.3, 0.1, 0.06], INCONCLUSIVE),
    ([0.02, 0.03, 0.01], INCONCLUSIVE),
    ([0.5, 0.4, 0.3], IRREGULAR),
    ([0.16, 0.2, 0.16], IRREGULAR),
    ([0.5, 0.4, 0.15], INCONCLUSIVE),
])
def test_classify(gaps, verdict):
    assert classify(gaps) == verdict


def test_distance_datum():
    f = distance_datum(Point([0.0], 0.0))
    np.testing.assert_allclose(f(np.array([[0.0], [0.3], [5.0]]), np.array([0.0, -0.4, 0.0])), [0.0, 0.5, 1.0])


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("PPARAB_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("PPARAB_THREADS", "0")
    assert worker_count() == 1


# ------------------------------------------------------------ probe

def test_probe_rejects_bad_inputs():
    D = petrovsky_domain(1.0, 0.3, P21)
    with pytest.raises(ValueError):
        probe_regularity(D, Point([0.0], 0.0), P21, [0.04, 0.02])
    with pytest.raises(ValueError):
        probe_regularity(D, Point([0.0], 0.0), P21, [0.02, 0.04, 0.01])
    with pytest.raises(ValueError, match="boundary"):
        probe_regularity(D, Point([0.0], -0.1), P21, H_LEVELS)


def test_probe_report_invariants_and_determinism(monkeypatch):
    D = petrovsky_domain(1.5, 0.3, P21)
    target = Point([0.0], 0.0)
    a = probe_regularity(D, target, P21, [0.08, 0.04, 0.02])
    monkeypatch.setenv("PPARAB_THREADS", "1")
    b = probe_regularity(D, target, P21, [0.08, 0.04, 0.02])
    assert a == b
    assert a.datum_at_target == 0.0
    for (h, v), g in zip(a.levels, a.gap_sequence):
        assert g == abs(v - a.datum_at_target)
    assert a.verdict == classify(a.gap_sequence)


@pytest.mark.slow
def test_sphere_probe_dichotomy():
    D = ball_exterior([0.0], 0.0, 0.5, [-1], [1], -0.8, 0.3)
    eq = probe_regularity(D, Point([0.5], 0.0), P21, H_LEVELS, approach=[1, 0])
    assert eq.verdict == REGULAR
    south = probe_regularity(D, Point([0.0], -0.5), P21, H_LEVELS, approach=[0, -1])
    assert south.verdict == IRREGULAR


@pytest.mark.slow
def test_irregularity_persists_in_larger_domain():
    # empirical consistency: the superset's gaps stay at least half the subset's final gap
    target = Point([0.0], 0.0)
    small = probe_regularity(petrovsky_domain(1.5, 0.3, P21), target, P21, H_LEVELS)
    big = probe_regularity(petrovsky_domain(2.0, 0.3, P21), target, P21, H_LEVELS)
    assert all(g >= 0.5 * small.gap_sequence[-1] for g in big.gap_sequence)


# ------------------------------------------------------------ cylinder top

def test_cylinder_top_bracket_1d():
    P = make_params(3, 1)
    rep = cylinder_top_experiment([-1], [1], 0.5, 1.5, P, 0.05, 0.1)
    assert rep.interiors_identical
    assert rep.bracket_ok
    assert rep.min_residual >= rep.min_expected - rep.max_discrete_residual
    assert rep.max_discrete_residual < 0.01
    assert rep.samples > 100


def test_cylinder_top_width_shrinks_with_eps():
    P = make_params(3, 1)
    widths = [cylinder_top_experiment([-1], [1], 0.5, 1.5, P, 0.1, e).bracket_width for e in (0.1, 0.01, 0.001)]
    assert widths[0] > widths[1] > widths[2]
    assert widths[0] == pytest.approx(0.4)  # eps = 0.1, T - t = 0.5
    assert widths[1] == pytest.approx(widths[0] / 10)


def test_cylinder_top_identical_in_2d():
    rep = cylinder_top_experiment([-1, -1], [1, 1], 0.5, 1.0, make_params(3, 2), 0.2, 0.1)
    assert rep.interiors_identical


def test_cylinder_top_rejects_eps():
    with pytest.raises(ValueError):
        cylinder_top_experiment([-1], [1], 0.5, 1.5, make_params(3, 1), 0.1, 0.0)


# ------------------------------------------------------------ large p

def test_sweep_p_benign_cylinder():
    D = cylinder([-1], [1], 0.5, 1.5)
    rows = sweep_p(D, benign_datum, 0.05, [10, 100, 1000], 1)
    gaps = [r.linf_gap_to_infty for r in rows]
    assert all(math.isfinite(g) for g in gaps)
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < gaps[0] / 10


def test_sweep_p_infinity_against_itself():
    D = cylinder([-1], [1], 0.5, 1.0)
    assert sweep_p(D, benign_datum, 0.1, [math.inf], 1)[0].linf_gap_to_infty == 0.0


def test_fundamental_limit_examples():
    rows = fundamental_limit_check([((0.0,), 1.0)], [10, 1e6], n=1)
    assert all(r.Hp == pytest.approx(1.0) and r.W == pytest.approx(1.0) for r in rows)
    rows = fundamental_limit_check([((1.0,), 1.0)], [10, 100, 1000, 1e6], n=1)
    assert rows[0].W == pytest.approx(math.exp(-0.25))
    assert rows[-1].gap < 1e-5
    gaps = [r.gap for r in rows]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    with pytest.raises(ValueError):
        fundamental_limit_check([((0.0,), 0.0)], [10])
