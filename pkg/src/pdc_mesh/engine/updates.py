"""Per-agent update steps of one synchronous round.

Agent i works with the local target ``u_i = q/N + p_i - rho (L^+ y)_i`` and
the penalty weight ``w_i = 1 / (2 rho |N_i|)``. Its primal subproblem is

    f_i(x) + (p/2) ||x - z_i||^2 + (w_i/2) ||B_i x - u_i||^2

and its dual copy is ``w_i (B_i x_i - u_i)``.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from pdc_mesh.engine.fista import fista
from pdc_mesh.engine.messaging import MessageBoard, laplacian_neighbor_sum
from pdc_mesh.engine.state import AgentState, SolverConfig
from pdc_mesh.problems.coupled import CoupledProblem

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SubproblemResult:
    x: np.ndarray
    iterations: int
    residual: float
    converged: bool


# ---------------------------------------------------------------------------
# Dual consensus step
# ---------------------------------------------------------------------------


def dual_p_step(p_i: np.ndarray, board: MessageBoard, agent: int, alpha: float) -> np.ndarray:
    """``p_i + alpha * sum_{j in N_i} (y_i - y_j)`` on the round snapshot."""
    return p_i + alpha * laplacian_neighbor_sum(board, agent)


def dual_p_update(
    p_blocks: Sequence[np.ndarray], board: MessageBoard, alpha: float
) -> list[np.ndarray]:
    """Apply :func:`dual_p_step` to every agent.

    Example:
        Two agents, ``y = (1, 0)``, ``alpha = 0.1``: ``p_0`` grows by 0.1 and
        ``p_1`` shrinks by 0.1.
    """
    return [dual_p_step(p, board, i, alpha) for i, p in enumerate(p_blocks)]


# ---------------------------------------------------------------------------
# Primal subproblem
# ---------------------------------------------------------------------------


def penalty_weight(rho: float, degree: int) -> float:
    if degree < 1:
        raise ValueError("Every agent needs at least one neighbor")
    return 1.0 / (2.0 * rho * degree)


def local_target(
    problem: CoupledProblem, p_new: np.ndarray, signless_sum: np.ndarray, rho: float
) -> np.ndarray:
    """``q/N + p_i - rho (L^+ y)_i``."""
    return problem.rhs / problem.n_agents + p_new - rho * signless_sum


def subproblem_lipschitz(
    problem: CoupledProblem, agent: int, config: SolverConfig, degree: int
) -> float:
    """``gamma_i^+ + p + ||B_i||^2 / (2 rho |N_i|)``."""
    block = problem.coupling[agent]
    b_norm = float(np.linalg.norm(block, 2)) if block.size else 0.0
    gamma_plus = problem.objectives[agent].curvature_bounds[1]
    return gamma_plus + config.p + b_norm**2 * penalty_weight(config.rho, degree)


def subproblem_gradient(
    problem: CoupledProblem,
    agent: int,
    config: SolverConfig,
    x: np.ndarray,
    z: np.ndarray,
    target: np.ndarray,
    weight: float,
) -> np.ndarray:
    block = problem.coupling[agent]
    return (
        problem.objectives[agent].gradient(x)
        + config.p * (x - z)
        + weight * (block.T @ (block @ x - target))
    )


def x_update_exact(
    agent: int,
    problem: CoupledProblem,
    config: SolverConfig,
    state: AgentState,
    p_new: np.ndarray,
    signless_sum: np.ndarray,
    degree: int,
    lipschitz: float | None = None,
) -> SubproblemResult:
    """Minimize the primal subproblem with FISTA, warm started at ``x_i^r``.

    Args:
        agent: Agent index i.
        problem: Coupled problem (only agent i's data is read).
        config: Solver settings (p, rho, subsolver tolerance and budget).
        state: Agent i's state at round r.
        p_new: ``p_i^{r+1}``.
        signless_sum: ``(L^+ y^r)_i``.
        degree: ``|N_i|``.
        lipschitz: Precomputed subproblem Lipschitz constant.

    Returns:
        SubproblemResult; a solve that exhausts the budget is logged and
        returned with ``converged=False``.
    """
    weight = penalty_weight(config.rho, degree)
    target = local_target(problem, p_new, signless_sum, config.rho)
    block = problem.coupling[agent]
    objective = problem.objectives[agent]
    z = state.z
    if lipschitz is None:
        lipschitz = subproblem_lipschitz(problem, agent, config, degree)

    def grad(x: np.ndarray) -> np.ndarray:
        return subproblem_gradient(problem, agent, config, x, z, target, weight)

    def value(x: np.ndarray) -> float:
        r = block @ x - target
        d = x - z
        return objective.value(x) + 0.5 * config.p * float(d @ d) + 0.5 * weight * float(r @ r)

    result = fista(
        grad,
        state.x,
        lipschitz,
        tol=config.subsolver_tol,
        max_iter=config.inner_max_iters,
        objective=value,
    )
    if not result.converged:
        logger.warning(
            "Agent %d subproblem stopped after %d iterations with residual %.3e",
            agent,
            result.iterations,
            result.residual,
        )
    return SubproblemResult(result.x, result.iterations, result.residual, result.converged)


def x_update_inexact(
    agent: int,
    problem: CoupledProblem,
    config: SolverConfig,
    state: AgentState,
    p_new: np.ndarray,
    signless_sum: np.ndarray,
    degree: int,
) -> np.ndarray:
    """One gradient step of length ``zeta`` on the subproblem from ``x_i^r``."""
    if config.zeta is None:
        raise ValueError("The inexact update needs zeta")
    weight = penalty_weight(config.rho, degree)
    target = local_target(problem, p_new, signless_sum, config.rho)
    grad = subproblem_gradient(problem, agent, config, state.x, state.z, target, weight)
    return state.x - config.zeta * grad


# ---------------------------------------------------------------------------
# Dual copy and proximal center
# ---------------------------------------------------------------------------


def y_update(
    agent: int,
    problem: CoupledProblem,
    x_new: np.ndarray,
    p_new: np.ndarray,
    signless_sum: np.ndarray,
    rho: float,
    degree: int,
) -> np.ndarray:
    """Closed-form maximizer ``(B_i x_i - q/N - p_i + rho (L^+ y^r)_i) / (2 rho |N_i|)``."""
    target = local_target(problem, p_new, signless_sum, rho)
    return penalty_weight(rho, degree) * (problem.coupling[agent] @ x_new - target)


def z_update(z: np.ndarray, x_new: np.ndarray, beta: float) -> np.ndarray:
    """``z + beta (x_new - z)``."""
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    return z + beta * (x_new - z)
