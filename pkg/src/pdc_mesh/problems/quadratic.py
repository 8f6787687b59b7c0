"""Seeded quadratic test instances and their centralized KKT oracle."""

from __future__ import annotations

import logging

import numpy as np
from scipy.linalg import LinAlgError, block_diag, lu_factor, lu_solve
from scipy.stats import ortho_group

from pdc_mesh.errors import SingularSystemError
from pdc_mesh.problems.coupled import CoupledProblem
from pdc_mesh.problems.objectives import QuadraticObjective, quadratic_terms

logger = logging.getLogger(__name__)

KKT_CONDITION_LIMIT = 1e12


def build_quadratic_instance(
    seed: int,
    n_agents: int,
    n_local: int,
    m_constraints: int,
    convexity_shift: float,
) -> CoupledProblem:
    """Random quadratic instance with prescribed curvature.

    Each ``Q_i = U diag(lam) U^T`` uses a Haar-random orthogonal ``U`` and
    eigenvalues in ``[shift, shift + 1]``; the smallest eigenvalue is pinned
    to ``shift`` and (for ``n_local > 1``) the largest to ``shift + 1``, so
    the reported curvature bounds are exact. ``c_i``, ``B_i`` and ``q`` are
    standard normal.

    Args:
        seed: Seed for ``numpy.random.default_rng``.
        n_agents: Number of agents N.
        n_local: Local dimension n of every agent.
        m_constraints: Number of coupling rows M.
        convexity_shift: Lower end of the eigenvalue range.

    Returns:
        CoupledProblem with ``metadata["kind"] == "quadratic"``.
    """
    sizes = (("n_agents", n_agents), ("n_local", n_local), ("m_constraints", m_constraints))
    for name, value in sizes:
        if value < 1:
            raise ValueError(f"{name} must be positive, got {value}")

    rng = np.random.default_rng(seed)
    objectives = []
    coupling = []
    for _ in range(n_agents):
        eigs = convexity_shift + rng.uniform(0.0, 1.0, size=n_local)
        eigs[0] = convexity_shift
        if n_local > 1:
            eigs[-1] = convexity_shift + 1.0
        if n_local > 1:
            basis = ortho_group.rvs(n_local, random_state=rng)
        else:
            basis = np.ones((1, 1))
        hessian = basis @ np.diag(eigs) @ basis.T
        gamma_plus = float(np.abs(eigs).max())
        objectives.append(
            QuadraticObjective(
                hessian,
                rng.standard_normal(n_local),
                curvature=(float(eigs.min()), gamma_plus),
            )
        )
        coupling.append(rng.standard_normal((m_constraints, n_local)))

    rhs = rng.standard_normal(m_constraints)
    return CoupledProblem(
        objectives=tuple(objectives),
        coupling=tuple(coupling),
        rhs=rhs,
        metadata={"kind": "quadratic", "seed": seed, "convexity_shift": convexity_shift},
    )


def kkt_oracle_quadratic(problem: CoupledProblem) -> tuple[np.ndarray, np.ndarray]:
    """Solve the KKT system of a quadratic instance directly.

    Assembles ``[[Q, B^T], [B, 0]] [x; y] = [-c; q]`` with
    ``Q = blkdiag(Q_i)`` and ``B = [B_1, ..., B_N]``.

    Returns:
        ``(x_star, y_star)`` with ``x_star`` stacked over agents.

    Raises:
        TypeError: If some objective is not quadratic.
        SingularSystemError: If the KKT matrix is singular or badly
            conditioned.
    """
    terms = [quadratic_terms(obj) for obj in problem.objectives]
    hessian = block_diag(*[q for q, _ in terms])
    linear = np.concatenate([c for _, c in terms])
    coupling = problem.stacked_coupling()

    n, m = problem.total_dim, problem.m_constraints
    kkt = np.zeros((n + m, n + m))
    kkt[:n, :n] = hessian
    kkt[:n, n:] = coupling.T
    kkt[n:, :n] = coupling
    rhs = np.concatenate([-linear, problem.rhs])

    condition = float(np.linalg.cond(kkt))
    if not np.isfinite(condition) or condition > KKT_CONDITION_LIMIT:
        raise SingularSystemError("KKT matrix is singular", condition)
    try:
        solution = lu_solve(lu_factor(kkt), rhs)
    except LinAlgError as err:
        raise SingularSystemError(f"KKT solve failed: {err}", condition) from err

    logger.debug("KKT oracle solved a %dx%d system (cond %.3e)", n + m, n + m, condition)
    return solution[:n], solution[n:]
