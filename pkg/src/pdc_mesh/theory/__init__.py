"""Constants of the convergence analysis and the admissible parameter region."""

from pdc_mesh.theory.constants import (
    DescentConstants,
    ErrorConstants,
    PerturbationConstants,
    descent_constants,
    error_constants,
    kappa,
    perturbation_constants,
)
from pdc_mesh.theory.hoffman import (
    FullRankBounds,
    SingularValueBounds,
    assemble_m1,
    assemble_m2,
    hoffman_estimates,
    hoffman_theta,
    singular_value_bounds,
    stacked_norm_bound,
    theta_bounds_fullrank,
)
from pdc_mesh.theory.regime import (
    Condition,
    ConstantSheet,
    IpdcConditions,
    RegimeVerdict,
    StepBounds,
    build_constant_sheet,
    check_regime,
    step_bounds,
)

__all__ = [
    "Condition",
    "ConstantSheet",
    "DescentConstants",
    "ErrorConstants",
    "FullRankBounds",
    "IpdcConditions",
    "PerturbationConstants",
    "RegimeVerdict",
    "SingularValueBounds",
    "StepBounds",
    "assemble_m1",
    "assemble_m2",
    "build_constant_sheet",
    "check_regime",
    "descent_constants",
    "error_constants",
    "hoffman_estimates",
    "hoffman_theta",
    "kappa",
    "perturbation_constants",
    "singular_value_bounds",
    "stacked_norm_bound",
    "step_bounds",
    "theta_bounds_fullrank",
]
