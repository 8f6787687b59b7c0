"""Centralized solution map of the proximal counterpart at a fixed center z.

``x(z)`` minimizes ``sum_i f_i(x_i) + (p/2) ||x_i - z_i||^2`` subject to
``sum_i B_i x_i = q``; it is strongly convex when ``p > -gamma^-``, and
``x(z) = z`` exactly at KKT points of the original problem.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
from scipy.linalg import block_diag, lstsq

from pdc_mesh.engine.fista import fista
from pdc_mesh.errors import ConvergenceError, SingularSystemError
from pdc_mesh.problems.coupled import CoupledProblem
from pdc_mesh.problems.objectives import quadratic_terms

logger = logging.getLogger(__name__)


def prox_solution_map(
    problem: CoupledProblem,
    z_blocks: Sequence[np.ndarray],
    p: float,
    tol: float = 1e-10,
    penalty: float = 10.0,
    max_outer: int = 2000,
) -> tuple[list[np.ndarray], np.ndarray]:
    """Solve the proximal counterpart at ``z``.

    Quadratic instances use one dense KKT solve. Other instances run an
    augmented Lagrangian method with FISTA inner solves until the constraint
    residual and inner residual are at most ``tol``.

    Args:
        problem: Coupled problem.
        z_blocks: Proximal centers per agent.
        p: Proximal weight, ``p > -gamma^-``.
        tol: Accuracy of the iterative path.
        penalty: Augmented Lagrangian weight of the iterative path.
        max_outer: Multiplier updates allowed on the iterative path.

    Returns:
        ``(x(z) blocks, y0(z))``.

    Raises:
        ValueError: If ``p <= -gamma^-``.
        ConvergenceError: If the iterative path runs out of budget.
    """
    if p <= -problem.gamma_minus:
        raise ValueError(f"p={p} must exceed -gamma_minus={-problem.gamma_minus}")
    z = problem.concat(z_blocks)
    if problem.is_quadratic:
        return _quadratic_map(problem, z, p)
    return _augmented_lagrangian_map(problem, z, p, tol, penalty, max_outer)


def _quadratic_map(
    problem: CoupledProblem, z: np.ndarray, p: float
) -> tuple[list[np.ndarray], np.ndarray]:
    terms = [quadratic_terms(obj) for obj in problem.objectives]
    hessian = block_diag(*[q for q, _ in terms]) + p * np.eye(problem.total_dim)
    linear = np.concatenate([c for _, c in terms]) - p * z
    coupling = problem.stacked_coupling()

    n, m = problem.total_dim, problem.m_constraints
    kkt = np.block([[hessian, coupling.T], [coupling, np.zeros((m, m))]])
    rhs = np.concatenate([-linear, problem.rhs])
    solution, *_ = lstsq(kkt, rhs)
    residual = float(np.linalg.norm(kkt @ solution - rhs))
    if residual > 1e-8 * (1.0 + float(np.linalg.norm(rhs))):
        raise SingularSystemError(
            f"Proximal KKT system is inconsistent (residual {residual:.3e})",
            float(np.linalg.cond(kkt)),
        )
    return problem.split(solution[:n]), solution[n:]


def _augmented_lagrangian_map(
    problem: CoupledProblem,
    z: np.ndarray,
    p: float,
    tol: float,
    penalty: float,
    max_outer: int,
) -> tuple[list[np.ndarray], np.ndarray]:
    coupling = problem.stacked_coupling()
    b_norm_sq = float(np.linalg.norm(coupling, 2)) ** 2
    lipschitz = problem.gamma_plus + p + penalty * b_norm_sq
    y = np.zeros(problem.m_constraints)
    x = z.copy()
    residual = np.inf

    for outer in range(1, max_outer + 1):

        def grad(v: np.ndarray, y: np.ndarray = y) -> np.ndarray:
            blocks = problem.split(v)
            g = np.concatenate(
                [obj.gradient(b) for obj, b in zip(problem.objectives, blocks)]
            )
            r = coupling @ v - problem.rhs
            return g + p * (v - z) + coupling.T @ (y + penalty * r)

        inner = fista(grad, x, lipschitz, tol=tol, max_iter=50_000)
        x = inner.x
        r = coupling @ x - problem.rhs
        y = y + penalty * r
        residual = float(np.linalg.norm(r))
        if residual <= tol and inner.converged:
            logger.debug("Proximal map converged after %d multiplier updates", outer)
            return problem.split(x), y

    raise ConvergenceError("Proximal map did not converge", residual)
