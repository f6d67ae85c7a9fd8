"""
The explicit scheme
===================

Forward Euler with a compact stencil. The time step is capped by the
CFL bound; above it, the march amplifies rounding noise without limit.
"""

import numpy as np

from pparab import cylinder, error_vs, fundamental, grid_for, make_params, solve
from pparab.solver import GridSpec, cfl_max_dt

P = make_params(3, 1)
sol = fundamental(P)
D = cylinder([-2], [2], 0.5, 1.5)

# Refining h halves the error: the scheme is first order.
prev = None
for h in (0.2, 0.1, 0.05, 0.025):
    err = error_vs(solve(D, sol.value, grid_for(D, h, P), P), sol).linf
    ratio = "" if prev is None else f"  ratio {prev / err:.2f}"
    print(f"h={h:<6} linf={err:.5f}{ratio}")
    prev = err

# Four times the stable step.
h = 0.05
bad = solve(D, sol.value, GridSpec(h, 4 * cfl_max_dt(h, P), D.bbox), P, check_cfl=False)
print(f"\n4x CFL: max |u| = {np.nanmax(np.abs(bad.values)):.2e}")
