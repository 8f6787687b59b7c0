"""Convergence metrics, KKT certificates and potential-function oracles."""

from pdc_mesh.diagnostics.metrics import (
    KktReport,
    classification_accuracy,
    consensus_gap,
    eps_kkt,
    gradient_residue,
    infeasibility,
    training_loss,
)
from pdc_mesh.diagnostics.potential import (
    PhiComponents,
    PhiState,
    QuadraticDualModel,
    ShadowDual,
    dual_solution_projection,
    phi_eval_quadratic,
)
from pdc_mesh.diagnostics.proximal import prox_solution_map

__all__ = [
    "KktReport",
    "PhiComponents",
    "PhiState",
    "QuadraticDualModel",
    "ShadowDual",
    "classification_accuracy",
    "consensus_gap",
    "dual_solution_projection",
    "eps_kkt",
    "gradient_residue",
    "infeasibility",
    "phi_eval_quadratic",
    "prox_solution_map",
    "training_loss",
]
