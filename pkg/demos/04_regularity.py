"""
Probing boundary regularity
===========================

The datum min(1, dist(., target)) vanishes only at the target. At a
regular point the discrete solution approaches 0 as we close in; at an
irregular one it stays away.

The factor-1 Petrovsky cusp is regular in the continuum, but on these
grids the gap shrinks too slowly to show it: the cusp width near |t| = 2h
is about 0.23, far wider than the grid would need to resolve the limit.
"""

from pparab import Point, ball_exterior, heat_ball, make_params, petrovsky_domain, probe_regularity

P = make_params(2, 1)
levels = [0.04, 0.02, 0.01]
origin = Point([0.0], 0.0)
ball = ball_exterior([0.0], 0.0, 0.5, [-1], [1], -0.8, 0.3)

cases = [
    ("Petrovsky factor 1", petrovsky_domain(1.0, 0.3, P), origin, None),
    ("Petrovsky factor 1.5", petrovsky_domain(1.5, 0.3, P), origin, None),
    ("heat-ball apex", heat_ball(1.0, [0.0], 0.0, P), origin, None),
    ("sphere equator", ball, Point([0.5], 0.0), [1, 0]),
    ("sphere south pole", ball, Point([0.0], -0.5), [0, -1]),
]
for label, D, target, approach in cases:
    rep = probe_regularity(D, target, P, levels, approach=approach)
    gaps = "  ".join(f"{g:.3f}" for g in rep.gap_sequence)
    print(f"{label:<22} gaps {gaps}   {rep.verdict}")
