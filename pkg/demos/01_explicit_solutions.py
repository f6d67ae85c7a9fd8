"""
Explicit solutions and their residuals
======================================

Every closed-form solution in the catalog is checked two ways: with its
analytic jet, and with a finite-difference jet of its values alone.
"""

import numpy as np

from pparab import catalog, fundamental, make_params
from pparab.solutions import verify_entry

# The exponent enters only through two constants.
for p, n in [(2, 1), (3, 2), (10, 3), (np.inf, 2)]:
    P = make_params(p, n)
    print(f"p={p:<4} n={n}  alpha={P.alpha:.4f}  beta={P.beta:.4f}")

# Residuals of each catalog entry at (p, n) = (3, 2).
print()
P = make_params(3, 2)
for sol in catalog(P).entries:
    chk = verify_entry(sol)
    print(f"{sol.label:<20} analytic {chk.max_residual:.1e}   fd {chk.fd_residual:.1e}")

# As p grows, H_p approaches W(x, t) = t^(-1/2) exp(-|x|^2 / (4t)).
print()
W = np.exp(-0.25)
for p in (10, 100, 1e4, 1e6):
    Hp = fundamental(make_params(p, 1)).field([1.0], 1.0)
    print(f"p={p:<8g} H_p((1), 1) = {Hp:.8f}   gap to W = {abs(Hp - W):.2e}")
