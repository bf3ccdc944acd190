"""Numerical toolkit for constrained vector optimization with solid ordering cones.

Polyhedral cones, Gerstewitz scalarization, constraint maps ``0 in H(x, p)``,
regularity certificates, exact penalization and multiplier-rule checks.
"""
__version__ = "0.1.0"

from .cones import PolyhedralCone, Polytope, dual_cone, is_weak_minimal, nonnegative_orthant
from .scalarize import GerstewitzFunctional
from .setmaps import AffineConeMap, Box, EpigraphicalMap, SampledGraphMap
from .regularity import (RegularityCertificate, coderivative_rate, epigraphical_radius,
                         estimate_openness_rate, verify_epigraphical_openness,
                         verify_graphical_regularity, verify_metric_regularity)
from .penalty import (PenalizedProblem, check_exact_penalty, minimize_local, penalize_joint,
                      penalize_parametric)
from .vecopt import (VectorProblem, necessary_condition_joint, necessary_condition_parametric,
                     scalar_necessary_condition, weak_front_oracle)
from .fixtures import load_fixture, validate_fixture

__all__ = [
    "AffineConeMap", "Box", "EpigraphicalMap", "GerstewitzFunctional", "PenalizedProblem",
    "PolyhedralCone", "Polytope", "RegularityCertificate", "SampledGraphMap", "VectorProblem",
    "check_exact_penalty", "coderivative_rate", "dual_cone", "epigraphical_radius",
    "estimate_openness_rate", "is_weak_minimal", "load_fixture", "minimize_local",
    "necessary_condition_joint", "necessary_condition_parametric", "nonnegative_orthant",
    "penalize_joint", "penalize_parametric", "scalar_necessary_condition", "validate_fixture",
    "verify_epigraphical_openness", "verify_graphical_regularity", "verify_metric_regularity",
    "weak_front_oracle",
]
