"""Certification toolkit for discrete-time polytopic LPV systems.

Decides poly-quadratic stability, detectability and stabilizability via LMI
feasibility, reconstructs observer/controller gain schedules from the
certificates, and verifies every certificate independently.
"""

try:
    from . import _lpvcert as _core
except ImportError:  # development builds keep the extension on sys.path
    import _lpvcert as _core

GainSchedule = _core.GainSchedule
PolytopicSystem = _core.PolytopicSystem
analyze = _core.analyze
bisect_gamma = _core.bisect_gamma
check_thm2_sampled = _core.check_thm2_sampled
check_vertex_certificate = _core.check_vertex_certificate
condition_ids = _core.condition_ids
count_decision_vars = _core.count_decision_vars
gain_from_certificate = _core.gain_from_certificate
is_positive_definite = _core.is_positive_definite
lti_ground_truth = _core.lti_ground_truth
min_eigenvalue = _core.min_eigenvalue
monte_carlo_descent = _core.monte_carlo_descent
product_radius_oracle = _core.product_radius_oracle
scalar_parameter_grid = _core.scalar_parameter_grid
simulate = _core.simulate
smat = _core.smat
spectral_radius = _core.spectral_radius
svec = _core.svec

__all__ = [
    "GainSchedule",
    "PolytopicSystem",
    "analyze",
    "bisect_gamma",
    "check_thm2_sampled",
    "check_vertex_certificate",
    "condition_ids",
    "count_decision_vars",
    "gain_from_certificate",
    "is_positive_definite",
    "lti_ground_truth",
    "min_eigenvalue",
    "monte_carlo_descent",
    "product_radius_oracle",
    "scalar_parameter_grid",
    "simulate",
    "smat",
    "spectral_radius",
    "svec",
]
