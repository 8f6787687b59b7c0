"""Convergence metrics and epsilon-KKT certification."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lstsq

from pdc_mesh.problems.coupled import CoupledProblem
from pdc_mesh.problems.datasets import VerticalDataset
from pdc_mesh.problems.vertical import predict_classes
from pdc_mesh.topology.graph import Graph


def gradient_residue(
    problem: CoupledProblem, x_blocks: Sequence[np.ndarray], y_blocks: Sequence[np.ndarray]
) -> float:
    """``(1 / sum n_i) sum_i ||grad f_i(x_i) + B_i^T y_i||^2``."""
    total = 0.0
    for obj, block, x, y in zip(problem.objectives, problem.coupling, x_blocks, y_blocks):
        r = obj.gradient(x) + block.T @ y
        total += float(r @ r)
    return total / problem.total_dim


def infeasibility(problem: CoupledProblem, x_blocks: Sequence[np.ndarray]) -> float:
    """``(1/M) ||sum_i B_i x_i - q||^2``."""
    r = problem.constraint_residual(x_blocks)
    return float(r @ r) / problem.m_constraints


def consensus_gap(graph: Graph, y_blocks: Sequence[np.ndarray]) -> float:
    """``||A y||^2 = sum over edges of ||y_i - y_j||^2``."""
    total = 0.0
    for i, j in graph.edges:
        d = y_blocks[i] - y_blocks[j]
        total += float(d @ d)
    return total


@dataclass(frozen=True)
class KktReport:
    """Epsilon-KKT certificate of a primal point.

    Attributes:
        residue: Normalized stationarity, as in the gradient residue metric.
        infeasibility: Normalized constraint violation.
        best_dual: Least-squares dual witness.
        epsilon: Max of the two unnormalized quantities below.
        stationarity: ``sum_i ||grad f_i(x_i) + B_i^T y||^2`` at the witness.
        violation: ``||sum_i B_i x_i - q||^2``.
    """

    residue: float
    infeasibility: float
    best_dual: np.ndarray
    epsilon: float
    stationarity: float
    violation: float


def eps_kkt(problem: CoupledProblem, x_blocks: Sequence[np.ndarray]) -> KktReport:
    """Certify ``x`` as an epsilon-KKT point with the best common dual.

    The witness minimizes ``||g + B^T y||`` over y, where g stacks the local
    gradients and ``B = [B_1, ..., B_N]``; rank deficiency is handled by the
    minimum-norm least-squares solution.
    """
    grads = np.concatenate([obj.gradient(x) for obj, x in zip(problem.objectives, x_blocks)])
    coupling_t = problem.stacked_coupling().T
    witness, *_ = lstsq(coupling_t, -grads)
    r_stat = grads + coupling_t @ witness
    stationarity = float(r_stat @ r_stat)
    r_feas = problem.constraint_residual(x_blocks)
    violation = float(r_feas @ r_feas)
    return KktReport(
        residue=stationarity / problem.total_dim,
        infeasibility=violation / problem.m_constraints,
        best_dual=witness,
        epsilon=max(stationarity, violation),
        stationarity=stationarity,
        violation=violation,
    )


def training_loss(problem: CoupledProblem, x_blocks: Sequence[np.ndarray]) -> float:
    """``sum_i f_i(x_i)``."""
    return problem.objective_value(x_blocks)


def classification_accuracy(
    problem: CoupledProblem, data: VerticalDataset, x_blocks: Sequence[np.ndarray]
) -> float:
    """Share of samples in ``data`` whose class the agents' model predicts."""
    predicted = predict_classes(problem, data, x_blocks)
    return float(np.mean(predicted == data.class_indices()))
