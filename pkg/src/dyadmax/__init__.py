"""Sharp Lp bounds for tree (dyadic-like) maximal operators, checked numerically."""
from .errors import DomainError, NumericError, ResourceError
from .extremizer import (ExtremizerParams, ExtremizerRealization, build_s_alpha, realize,
                         sharpness_report)
from .maximal import Linearization, linearize, maximal_function, tree_moments
from .scalars import (DEFAULT_ROOT, RootConfig, H, bellman_three_on_surface, bellman_two,
                      beta_from_fF, omega, solve_z, upper_bound_three)
from .trees import StepFunction, Tree, build_kadic, build_random_tree
from .verify import VerificationPlan, run_plan

__all__ = [
    "DomainError", "NumericError", "ResourceError",
    "ExtremizerParams", "ExtremizerRealization", "build_s_alpha", "realize", "sharpness_report",
    "Linearization", "linearize", "maximal_function", "tree_moments",
    "DEFAULT_ROOT", "RootConfig", "H", "bellman_three_on_surface", "bellman_two",
    "beta_from_fF", "omega", "solve_z", "upper_bound_three",
    "StepFunction", "Tree", "build_kadic", "build_random_tree",
    "VerificationPlan", "run_plan",
]
