"""
Toward the infinity-Laplacian
=============================

On one shared grid the p-solutions approach the p = inf solution at
rate O(1/p).
"""

import numpy as np

from pparab import cylinder, sweep_p

D = cylinder([-1], [1], 0.5, 1.5)
rows = sweep_p(D, lambda x, t: np.cos(x[:, 0]) + 0.3 * np.sin(2 * x[:, 0]), 0.05, [10, 100, 1000, 10000], 1)
for r in rows:
    print(f"p={r.p:<7g} gap={r.linf_gap_to_infty:.3e}   p*gap={r.p * r.linf_gap_to_infty:.3f}")
