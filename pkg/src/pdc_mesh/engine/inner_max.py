"""Dense reference solve of the per-round dual maximization.

For fixed ``x`` and a dual snapshot ``y^r`` the dual copies maximize

    sum_i y_i^T (B_i x_i - q/N) - mu^T A y - (rho/2) ||A y||^2
        - (rho/2) (y - y^r)^T L^+ (y - y^r),

a strongly concave quadratic with Hessian ``-rho (L^- + L^+) = -2 rho D``.
This module solves it with one dense factorization; it exists to check the
closed-form distributed update.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from pdc_mesh.errors import SingularSystemError
from pdc_mesh.problems.coupled import CoupledProblem
from pdc_mesh.topology.graph import Graph
from pdc_mesh.topology.matrices import derive_matrices

DENSE_LIMIT = 200


def brute_force_inner_max(
    x_fixed: Sequence[np.ndarray],
    y_snapshot: Sequence[np.ndarray],
    rho: float,
    graph: Graph,
    problem: CoupledProblem,
    p_blocks: Sequence[np.ndarray] | None = None,
    mu: np.ndarray | None = None,
    max_size: int = DENSE_LIMIT,
) -> list[np.ndarray]:
    """Maximize the round's dual objective exactly.

    Exactly one of ``p_blocks`` (per-agent ``A_i^T mu``) or ``mu`` (edge
    stacked) must be given.

    Raises:
        ValueError: If the dense system exceeds ``max_size`` or the dual
            inputs are inconsistent.
        SingularSystemError: If the Hessian is not positive definite.
    """
    if (p_blocks is None) == (mu is None):
        raise ValueError("Pass exactly one of p_blocks or mu")
    m = problem.m_constraints
    n = graph.n_agents
    if n * m > max_size:
        raise ValueError(f"Dense inner maximization limited to N*M <= {max_size}, got {n * m}")

    matrices = derive_matrices(graph, block_size=m)
    signed = matrices.expanded_signed_laplacian.toarray()
    signless = matrices.expanded_signless_laplacian.toarray()
    if mu is not None:
        p_vec = matrices.expanded_incidence.T @ np.asarray(mu, dtype=float)
    else:
        p_vec = np.concatenate(list(p_blocks or []))

    share = problem.rhs / n
    linear = np.concatenate(
        [b @ x - share for b, x in zip(problem.coupling, x_fixed)]
    ) - p_vec
    snapshot = np.concatenate(list(y_snapshot))

    hessian = rho * (signed + signless)
    rhs = linear + rho * (signless @ snapshot)
    try:
        factor = cho_factor(hessian)
    except LinAlgError as err:
        raise SingularSystemError(
            "Inner maximization Hessian is not positive definite", float(np.linalg.cond(hessian))
        ) from err
    solution = cho_solve(factor, rhs)
    return [solution[i * m : (i + 1) * m] for i in range(n)]
