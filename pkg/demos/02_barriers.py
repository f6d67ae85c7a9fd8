"""
Barriers near the boundary
==========================

A barrier is a positive supersolution vanishing at one boundary point.
Here we verify the exterior-sphere construction at an equatorial contact,
watch it break at the south pole, and check the Petrovsky barrier.
"""

from pparab import Point, exterior_sphere_barrier, make_params, petrovsky_barrier, verify_barrier

P = make_params(2, 1)

# Equatorial contact: all four axioms hold.
b = exterior_sphere_barrier([0.0], 0.0, 0.5, Point([0.5], 0.0), P)
rep = verify_barrier(b)
print(f"equator   all_ok={rep.all_ok}  worst violation {rep.worst_violation}")

# South pole: no exponent a rescues the supersolution inequality. Jets are
# divided by 2a exp(-aR^2), so the witness value is the a-free bracket
# (t - t') - (p+n-2)/p.
for a in (1, 10, 100, 1000):
    b = exterior_sphere_barrier([0.0], 0.0, 0.5, Point([0.0], -0.5), P, a=a, allow_south_pole=True)
    rep = verify_barrier(b, n_samples=2000)
    print(f"south a={a:<5} supersolution_ok={rep.supersolution_ok}  witness value {rep.witness['value']:.3e}")

# The Petrovsky barrier lives in log-log time; jets are evaluated in scaled form.
for p, n in [(2, 1), (2, 2), (5, 3)]:
    rep = verify_barrier(petrovsky_barrier(0.5, make_params(p, n)))
    print(f"Petrovsky (p,n)=({p},{n}) all_ok={rep.all_ok} samples={rep.sample_count}")
