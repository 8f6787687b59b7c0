"""Vertical-learning instances: logistic regression and a two-layer network.

The layer output ``w0`` (``w0 = X w`` for logistic regression,
``w0 = vec(X W)`` for the network) is appended to the variable of one
designated aux agent, whose coupling block gains ``-I``; the coupling
constraint ``sum_i B_i x_i = 0`` then states that ``w0`` equals the sum of the
agents' partial products.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np

from pdc_mesh.problems.checks import estimate_curvature
from pdc_mesh.problems.coupled import CoupledProblem
from pdc_mesh.problems.datasets import VerticalDataset
from pdc_mesh.problems.objectives import (
    LocalObjective,
    LogisticLossObjective,
    NonconvexPenaltyObjective,
    SeparableObjective,
    SoftmaxHeadObjective,
    ZeroObjective,
)

logger = logging.getLogger(__name__)

HEAD_CURVATURE_PAIRS = 200


def _check_aux(data: VerticalDataset, aux_agent: int) -> None:
    if not 0 <= aux_agent < data.n_agents:
        raise ValueError(f"aux_agent {aux_agent} outside 0..{data.n_agents - 1}")


# ---------------------------------------------------------------------------
# Logistic regression
# ---------------------------------------------------------------------------


def build_vertical_lr(
    data: VerticalDataset, lam: float, xi: float, aux_agent: int = 0
) -> CoupledProblem:
    """Non-convex regularized logistic regression over a feature partition.

    Agent i owns ``w_i`` with the penalty ``R_i`` and coupling ``X_i``; the
    aux agent also owns ``w0`` (length M) with the logistic loss and coupling
    ``-I_M``.

    Raises:
        ValueError: For non-binary labels, non-positive ``lam``/``xi`` or an
            invalid aux agent.
    """
    if data.is_one_hot or not np.all(np.isin(data.labels, (-1.0, 1.0))):
        raise ValueError("Vertical logistic regression needs labels in {-1, +1}")
    _check_aux(data, aux_agent)

    m = data.n_samples
    objectives: list[LocalObjective] = []
    coupling: list[np.ndarray] = []
    for i in range(data.n_agents):
        block = data.block(i)
        penalty = NonconvexPenaltyObjective(block.shape[1], lam, xi)
        if i == aux_agent:
            objectives.append(SeparableObjective([penalty, LogisticLossObjective(data.labels)]))
            coupling.append(np.hstack([block, -np.eye(m)]))
        else:
            objectives.append(penalty)
            coupling.append(block)

    return CoupledProblem(
        objectives=tuple(objectives),
        coupling=tuple(coupling),
        rhs=np.zeros(m),
        metadata={
            "kind": "vertical_lr",
            "aux_agent": aux_agent,
            "lam": lam,
            "xi": xi,
            "smooth": True,
        },
    )


def erm_objective_lr(data: VerticalDataset, lam: float, xi: float, w: np.ndarray) -> float:
    """Logistic loss of ``X w`` plus the non-convex penalty of ``w``."""
    margins = data.labels * (data.features @ w)
    penalty = NonconvexPenaltyObjective(data.n_features, lam, xi).value(w)
    return float(np.logaddexp(0.0, -margins).sum() + penalty)


# ---------------------------------------------------------------------------
# Two-layer network
# ---------------------------------------------------------------------------


def build_vertical_nn(
    data: VerticalDataset, hidden: int, aux_agent: int = 0, seed: int = 0
) -> CoupledProblem:
    """Vertical two-layer classifier.

    Agent i owns the rows ``W_i`` (``n_i x K``) of the first-layer weights,
    flattened row-major, with a zero objective and coupling
    ``X_i kron I_K``; the aux agent also owns the layer output ``w0`` (MK)
    and the head parameters, with coupling ``-I_MK`` on ``w0`` and zero on the
    head. Curvature bounds of the head are a sampled estimate and the
    instance is flagged ``smooth=False``.

    Raises:
        ValueError: If labels are not one-hot, ``hidden < 1`` or the aux agent
            is invalid.
    """
    if hidden < 1:
        raise ValueError(f"hidden must be >= 1, got {hidden}")
    if not data.is_one_hot:
        raise ValueError("Vertical network needs one-hot labels")
    _check_aux(data, aux_agent)

    m, k = data.n_samples, hidden
    rng = np.random.default_rng(seed)
    head = SoftmaxHeadObjective(data.labels, hidden)
    head = SoftmaxHeadObjective(
        data.labels, hidden, curvature=estimate_curvature(head, rng, HEAD_CURVATURE_PAIRS)
    )
    logger.debug("Sampled head curvature bounds %s", head.curvature_bounds)

    objectives: list[LocalObjective] = []
    coupling: list[np.ndarray] = []
    identity_k = np.eye(k)
    for i in range(data.n_agents):
        block = np.kron(data.block(i), identity_k)
        owner = ZeroObjective(block.shape[1])
        if i == aux_agent:
            objectives.append(SeparableObjective([owner, head]))
            coupling.append(np.hstack([block, -np.eye(m * k), np.zeros((m * k, head.n_theta))]))
        else:
            objectives.append(owner)
            coupling.append(block)

    return CoupledProblem(
        objectives=tuple(objectives),
        coupling=tuple(coupling),
        rhs=np.zeros(m * k),
        metadata={
            "kind": "vertical_nn",
            "aux_agent": aux_agent,
            "hidden": hidden,
            "n_samples": m,
            "smooth": False,
        },
    )


def erm_objective_nn(
    data: VerticalDataset, weights: np.ndarray, theta: np.ndarray
) -> float:
    """Cross-entropy of the network with first layer ``weights`` (``D x K``)."""
    head = SoftmaxHeadObjective(data.labels, weights.shape[1])
    return head.value(np.concatenate([(data.features @ weights).ravel(), theta]))


# ---------------------------------------------------------------------------
# Lifting and extraction
# ---------------------------------------------------------------------------


def assemble_vertical_point(
    problem: CoupledProblem,
    data: VerticalDataset,
    w: np.ndarray,
    theta: np.ndarray | None = None,
) -> list[np.ndarray]:
    """Lift model parameters to agent blocks with ``w0`` set consistently.

    Args:
        problem: A vertical LR or NN instance built from ``data``.
        data: The dataset.
        w: LR weights (length D) or first-layer weights (``D x K``).
        theta: Head parameters, NN only.
    """
    aux = int(problem.metadata["aux_agent"])
    if problem.metadata["kind"] == "vertical_lr":
        layer = data.features @ w
        blocks = [np.array(w[a:b], dtype=float) for a, b in data.partition]
        blocks[aux] = np.concatenate([blocks[aux], layer])
        return blocks

    if theta is None:
        raise ValueError("The network instance needs head parameters theta")
    w = np.asarray(w, dtype=float)
    layer = (data.features @ w).ravel()
    blocks = [w[a:b].ravel() for a, b in data.partition]
    blocks[aux] = np.concatenate([blocks[aux], layer, theta])
    return blocks


def extract_model(
    problem: CoupledProblem, data: VerticalDataset, x_blocks: Sequence[np.ndarray]
) -> tuple[np.ndarray, np.ndarray | None]:
    """Inverse of :func:`assemble_vertical_point`: ``(w, theta)`` from agent blocks."""
    aux = int(problem.metadata["aux_agent"])
    kind = problem.metadata["kind"]
    widths = [b - a for a, b in data.partition]
    if kind == "vertical_lr":
        parts = [np.asarray(x)[: widths[i]] for i, x in enumerate(x_blocks)]
        return np.concatenate(parts), None

    k = int(problem.metadata["hidden"])
    parts = [np.asarray(x)[: widths[i] * k].reshape(widths[i], k) for i, x in enumerate(x_blocks)]
    m = int(problem.metadata["n_samples"])
    theta = np.asarray(x_blocks[aux])[widths[aux] * k + m * k :]
    return np.vstack(parts), theta


def predict_classes(
    problem: CoupledProblem, data: VerticalDataset, x_blocks: Sequence[np.ndarray]
) -> np.ndarray:
    """Predicted class index per sample of ``data`` from the agents' model blocks."""
    w, theta = extract_model(problem, data, x_blocks)
    if theta is None:
        return (data.features @ w > 0).astype(int)
    head = SoftmaxHeadObjective(data.labels, w.shape[1])
    logits = head.logits(np.concatenate([(data.features @ w).ravel(), theta]))
    return np.argmax(logits, axis=1)
