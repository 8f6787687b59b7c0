"""Coupled-problem model and instance builders."""

from pdc_mesh.problems.checks import certify_curvature, estimate_curvature, finite_diff_check
from pdc_mesh.problems.consensus import build_consensus_instance
from pdc_mesh.problems.coupled import CoupledProblem
from pdc_mesh.problems.datasets import (
    VerticalDataset,
    even_partition,
    read_dataset_csv,
    read_partition,
    synthesize_vertical_dataset,
    write_dataset_csv,
    write_partition,
)
from pdc_mesh.problems.objectives import (
    LocalObjective,
    LogisticLossObjective,
    NonconvexPenaltyObjective,
    QuadraticObjective,
    SeparableObjective,
    SoftmaxHeadObjective,
    ZeroObjective,
    quadratic_terms,
)
from pdc_mesh.problems.quadratic import build_quadratic_instance, kkt_oracle_quadratic
from pdc_mesh.problems.vertical import (
    assemble_vertical_point,
    build_vertical_lr,
    build_vertical_nn,
    erm_objective_lr,
    erm_objective_nn,
    extract_model,
    predict_classes,
)

__all__ = [
    "CoupledProblem",
    "LocalObjective",
    "LogisticLossObjective",
    "NonconvexPenaltyObjective",
    "QuadraticObjective",
    "SeparableObjective",
    "SoftmaxHeadObjective",
    "VerticalDataset",
    "ZeroObjective",
    "assemble_vertical_point",
    "build_consensus_instance",
    "build_quadratic_instance",
    "build_vertical_lr",
    "build_vertical_nn",
    "certify_curvature",
    "erm_objective_lr",
    "erm_objective_nn",
    "estimate_curvature",
    "even_partition",
    "extract_model",
    "finite_diff_check",
    "kkt_oracle_quadratic",
    "predict_classes",
    "quadratic_terms",
    "read_dataset_csv",
    "read_partition",
    "synthesize_vertical_dataset",
    "write_dataset_csv",
    "write_partition",
]
