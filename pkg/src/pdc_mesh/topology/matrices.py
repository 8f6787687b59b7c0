"""Incidence and Laplacian matrices of an agent graph, and their spectra.

The base matrices are small integer N x N (or |E| x N) arrays. Expansions by
a block size M are built lazily as sparse Kronecker products with I_M; spectra
are always taken on the base matrices since ``kron(L, I_M)`` has the same
eigenvalues.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from pdc_mesh.errors import DisconnectedGraphError
from pdc_mesh.topology.graph import Graph

logger = logging.getLogger(__name__)

ZERO_EIG_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class GraphMatrices:
    """Derived matrices of a graph for a given block size.

    Attributes:
        graph: Source graph.
        block_size: Block size M used for the Kronecker expansions.
        incidence: ``|E| x N`` matrix with +1 at the lower and -1 at the
            higher endpoint of each edge.
        degree: Diagonal degree matrix.
        signed_laplacian: ``incidence.T @ incidence``.
        signless_laplacian: ``2 * degree - signed_laplacian``.
    """

    graph: Graph
    block_size: int
    incidence: np.ndarray
    degree: np.ndarray
    signed_laplacian: np.ndarray
    signless_laplacian: np.ndarray

    def _expand(self, base: np.ndarray) -> sp.csr_matrix:
        return sp.kron(sp.csr_matrix(base), sp.identity(self.block_size), format="csr")

    @cached_property
    def expanded_incidence(self) -> sp.csr_matrix:
        """A = incidence kron I_M."""
        return self._expand(self.incidence)

    @cached_property
    def expanded_signed_laplacian(self) -> sp.csr_matrix:
        return self._expand(self.signed_laplacian)

    @cached_property
    def expanded_signless_laplacian(self) -> sp.csr_matrix:
        return self._expand(self.signless_laplacian)

    @cached_property
    def expanded_degree(self) -> sp.csr_matrix:
        return self._expand(self.degree)

    def signed_row_block(self, agent: int) -> sp.csr_matrix:
        """Row block ``L_i^-`` of the expanded signed Laplacian."""
        m = self.block_size
        return self.expanded_signed_laplacian[agent * m : (agent + 1) * m, :]

    def signless_row_block(self, agent: int) -> sp.csr_matrix:
        """Row block ``L_i^+`` of the expanded signless Laplacian."""
        m = self.block_size
        return self.expanded_signless_laplacian[agent * m : (agent + 1) * m, :]


@dataclass(frozen=True)
class SpectralSummary:
    """Spectral quantities of the base Laplacians.

    ``sigma_min_minus`` is the smallest nonzero singular value of the signed
    Laplacian when the graph is connected and 0.0 otherwise.
    """

    lambda_max_plus: float
    sigma_min_minus: float
    sigma_max_minus: float
    connected: bool
    zero_multiplicity: int

    def require_connected(self) -> None:
        if not self.connected:
            raise DisconnectedGraphError(
                f"Graph is disconnected ({self.zero_multiplicity} zero Laplacian eigenvalues)"
            )

    def to_dict(self) -> dict[str, float | bool | int]:
        return {
            "lambda_max_plus": self.lambda_max_plus,
            "sigma_min_minus": self.sigma_min_minus,
            "sigma_max_minus": self.sigma_max_minus,
            "connected": self.connected,
            "zero_multiplicity": self.zero_multiplicity,
        }


def derive_matrices(graph: Graph, block_size: int = 1) -> GraphMatrices:
    """Compute incidence, degree and Laplacian matrices of ``graph``.

    Base matrices are integer valued; ``signless_laplacian`` is formed as
    ``2D - L`` in integer arithmetic.

    Args:
        graph: Agent graph.
        block_size: Block size M for the lazy Kronecker expansions.

    Returns:
        GraphMatrices for the graph.
    """
    if block_size < 1:
        raise ValueError(f"block_size must be >= 1, got {block_size}")

    n = graph.n_agents
    incidence = np.zeros((graph.n_edges, n), dtype=np.int64)
    for e, (i, j) in enumerate(graph.edges):
        incidence[e, i] = 1
        incidence[e, j] = -1

    degree = np.diag([graph.degree(i) for i in range(n)]).astype(np.int64)
    signed = incidence.T @ incidence
    signless = 2 * degree - signed
    return GraphMatrices(
        graph=graph,
        block_size=block_size,
        incidence=incidence,
        degree=degree,
        signed_laplacian=signed,
        signless_laplacian=signless,
    )


def spectral_summary(matrices: GraphMatrices) -> SpectralSummary:
    """Eigenvalue summary of the base signed and signless Laplacians.

    Both Laplacians are symmetric PSD, so their singular values are their
    eigenvalues. A disconnected graph is logged and reported with
    ``connected=False``; call :meth:`SpectralSummary.require_connected` to
    turn that into an error.

    Raises:
        ValueError: If the graph has fewer than two agents.
    """
    if matrices.graph.n_agents < 2:
        raise ValueError(f"Spectra need at least two agents, got {matrices.graph.n_agents}")
    signed_eigs = np.linalg.eigvalsh(matrices.signed_laplacian.astype(float))
    signless_eigs = np.linalg.eigvalsh(matrices.signless_laplacian.astype(float))

    sigma_max = float(max(signed_eigs.max(initial=0.0), 0.0))
    tol = ZERO_EIG_RTOL * max(1.0, sigma_max)
    zero_multiplicity = int(np.count_nonzero(signed_eigs <= tol))
    connected = zero_multiplicity == 1

    if connected:
        positive = signed_eigs[signed_eigs > tol]
        sigma_min = float(positive.min()) if positive.size else 0.0
    else:
        logger.warning(
            "Disconnected graph: signed Laplacian has %d zero eigenvalues", zero_multiplicity
        )
        sigma_min = 0.0

    return SpectralSummary(
        lambda_max_plus=float(max(signless_eigs.max(initial=0.0), 0.0)),
        sigma_min_minus=sigma_min,
        sigma_max_minus=sigma_max,
        connected=connected,
        zero_multiplicity=zero_multiplicity,
    )
