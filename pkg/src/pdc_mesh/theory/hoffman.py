"""Hoffman-constant estimates for the dual error bounds.

Two linear systems govern the error bounds:

    M1 = [ L^-       ]          M2 = [ A^T  L^-      ]
         [ B_diag^T  ]               [ 0    A        ]
                                     [ 0    B_diag^T ]

with ``L^-`` and ``A`` expanded to blocks of size M. The direct estimate is
``sigma_max / sigma_min^2`` of a row basis; when ``B = [B_1, ..., B_N]`` has
full row rank there are also closed-form upper bounds from the graph spectrum.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, svdvals

from pdc_mesh.errors import RankDeficientCouplingError
from pdc_mesh.problems.coupled import CoupledProblem
from pdc_mesh.topology.graph import Graph
from pdc_mesh.topology.matrices import SpectralSummary, derive_matrices

logger = logging.getLogger(__name__)

RANK_RTOL = 1e-10


def row_basis(matrix: np.ndarray) -> np.ndarray:
    """Maximal set of linearly independent rows, chosen by pivoted QR."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if matrix.size == 0 or not np.any(matrix):
        raise ValueError("Hoffman estimate needs a nonzero matrix")
    _, r, pivots = qr(matrix.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.count_nonzero(diag > RANK_RTOL * diag[0]))
    return matrix[np.sort(pivots[:rank])]


def hoffman_theta(matrix: np.ndarray) -> float:
    """``sigma_max(M_bar) / sigma_min(M_bar)^2`` for a row basis ``M_bar``.

    Example:
        ``[[1, -1], [-1, 1]]`` keeps one row with singular value sqrt(2), so
        theta is ``sqrt(2) / 2``.
    """
    singular = svdvals(row_basis(matrix))
    return float(singular[0] / singular[-1] ** 2)


def assemble_m1(problem: CoupledProblem, graph: Graph) -> np.ndarray:
    matrices = derive_matrices(graph, problem.m_constraints)
    signed = matrices.expanded_signed_laplacian.toarray()
    return np.vstack([signed, problem.block_diagonal_coupling().T])


def assemble_m2(problem: CoupledProblem, graph: Graph) -> np.ndarray:
    matrices = derive_matrices(graph, problem.m_constraints)
    signed = matrices.expanded_signed_laplacian.toarray()
    incidence = matrices.expanded_incidence.toarray()
    b_diag_t = problem.block_diagonal_coupling().T
    n_mu = incidence.shape[0]
    return np.block(
        [
            [incidence.T, signed],
            [np.zeros((n_mu, n_mu)), incidence],
            [np.zeros((b_diag_t.shape[0], n_mu)), b_diag_t],
        ]
    )


@dataclass(frozen=True)
class SingularValueBounds:
    """Spectral enclosures of M1 and M2 under a full-row-rank B."""

    m1_sigma_min_lower: float
    m1_sigma_max_upper: float
    m2_sigma_min_lower: float
    m2_sigma_max_upper: float


def singular_value_bounds(
    spectra: SpectralSummary, zeta_b: float, sigma_max_bdiag: float
) -> SingularValueBounds:
    growth = 1.0 + zeta_b
    root_max = math.sqrt(spectra.sigma_max_minus)
    m1_lower = max(spectra.sigma_min_minus / growth, sigma_max_bdiag / (2.0 * growth))
    m2_lower = max(
        math.sqrt(spectra.sigma_min_minus) / growth, sigma_max_bdiag / (2.0 * growth)
    ) / (3.0 + root_max)
    return SingularValueBounds(
        m1_sigma_min_lower=m1_lower,
        m1_sigma_max_upper=spectra.sigma_max_minus + sigma_max_bdiag,
        m2_sigma_min_lower=m2_lower,
        m2_sigma_max_upper=2.0 * root_max + spectra.sigma_max_minus + sigma_max_bdiag,
    )


def stacked_norm_bound(blocks: Sequence[np.ndarray], vertical: bool = True) -> tuple[float, float]:
    """``(sigma_max of the stacked matrix, sum of block sigma_max)``.

    Blocks are stacked vertically by default and side by side otherwise; the
    first value never exceeds the second.
    """
    arrays = [np.atleast_2d(np.asarray(b, dtype=float)) for b in blocks]
    if not arrays:
        raise ValueError("Need at least one block")
    stacked = np.vstack(arrays) if vertical else np.hstack(arrays)
    actual = float(np.linalg.norm(stacked, 2))
    bound = float(sum(np.linalg.norm(b, 2) for b in arrays))
    return actual, bound


@dataclass(frozen=True)
class FullRankBounds:
    """Closed-form Hoffman bounds, valid when B has full row rank.

    Attributes:
        zeta_b: ``2 sqrt(N) sigma_max(B_diag) / sigma_min(B)``.
        theta12: Upper bound on theta1 = theta2.
        theta3: Upper bound on theta3.
        sigma_max_bdiag: Largest singular value of ``B_diag``, i.e. B_max.
        sigma_min_b: Smallest singular value of the stacked B.
        singular_values: Spectral enclosures of M1 and M2.
    """

    zeta_b: float
    theta12: float
    theta3: float
    sigma_max_bdiag: float
    sigma_min_b: float
    singular_values: SingularValueBounds


def theta_bounds_fullrank(spectra: SpectralSummary, problem: CoupledProblem) -> FullRankBounds:
    """Closed-form bounds on theta1 = theta2 and theta3.

    Raises:
        DisconnectedGraphError: If the spectra come from a disconnected graph.
        RankDeficientCouplingError: If B is not full row rank.
    """
    spectra.require_connected()
    singular = svdvals(problem.stacked_coupling())
    m = problem.m_constraints
    tol = RANK_RTOL * max(1.0, float(singular[0]) if singular.size else 0.0)
    rank = int(np.count_nonzero(singular > tol))
    if rank < m:
        raise RankDeficientCouplingError(rank, m)

    sigma_min_b = float(singular[m - 1])
    sigma_max_bdiag = problem.b_max
    zeta_b = 2.0 * math.sqrt(problem.n_agents) * sigma_max_bdiag / sigma_min_b

    growth_sq = (1.0 + zeta_b) ** 2
    s_max = spectra.sigma_max_minus
    s_min = spectra.sigma_min_minus
    root_max = math.sqrt(s_max)
    theta12 = growth_sq * s_max / s_min**2 + 4.0 * growth_sq / sigma_max_bdiag
    theta3 = (
        (2.0 * root_max + s_max) * (3.0 + root_max) ** 2 * growth_sq / s_min
        + 4.0 * growth_sq / sigma_max_bdiag * (3.0 + root_max) ** 2
    )
    return FullRankBounds(
        zeta_b=zeta_b,
        theta12=theta12,
        theta3=theta3,
        sigma_max_bdiag=sigma_max_bdiag,
        sigma_min_b=sigma_min_b,
        singular_values=singular_value_bounds(spectra, zeta_b, sigma_max_bdiag),
    )


def hoffman_estimates(problem: CoupledProblem, graph: Graph) -> tuple[float, float]:
    """Direct ``(theta1 = theta2, theta3)`` from the assembled M1 and M2."""
    theta12 = hoffman_theta(assemble_m1(problem, graph))
    theta3 = hoffman_theta(assemble_m2(problem, graph))
    logger.debug("Direct Hoffman estimates: theta12=%.6g theta3=%.6g", theta12, theta3)
    return theta12, theta3
