"""Numerical lab for the normalized p-parabolic equation.

``u_t = (1/p) |Du|^(2-p) div(|Du|^(p-2) Du)``, equivalently
``u_t = (1/p) tr D^2u + ((p-2)/p) <D^2u v, v>`` with ``v = Du/|Du|``.
"""

from .barriers import (BarrierReport, exterior_sphere_barrier, irregularity_subsolution, petrovsky_barrier,
                       verify_barrier)
from .core import Jet2, OperatorValue, PParams, Point, eval_operator, make_params, numeric_jet, residual
from .domains import (Box, Domain, ball_exterior, contains, custom_domain, cylinder, heat_ball, petrovsky_domain,
                      spacetime_ball)
from .lab import (RegularityReport, SweepRow, cylinder_top_experiment, fundamental_limit_check, probe_regularity,
                  sweep_p)
from .solutions import Solution, catalog, fundamental, separable, similarity_integral, traveling_wave
from .solver import (CFLError, ErrorReport, GridSolution, GridSpec, InstabilityError, check_discrete_comparison,
                     error_vs, grid_for, rasterize, solve)

__version__ = "0.1.0"

__all__ = [
    "BarrierReport", "Box", "CFLError", "Domain", "ErrorReport", "GridSolution", "GridSpec", "InstabilityError",
    "Jet2", "OperatorValue", "PParams", "Point", "RegularityReport", "Solution", "SweepRow", "ball_exterior",
    "catalog", "check_discrete_comparison", "contains", "custom_domain", "cylinder", "cylinder_top_experiment",
    "error_vs", "eval_operator", "exterior_sphere_barrier", "fundamental", "fundamental_limit_check", "grid_for",
    "heat_ball", "irregularity_subsolution", "make_params", "numeric_jet", "petrovsky_barrier", "petrovsky_domain",
    "probe_regularity", "rasterize", "residual", "separable", "similarity_integral", "solve", "spacetime_ball",
    "sweep_p", "traveling_wave", "verify_barrier",
]
