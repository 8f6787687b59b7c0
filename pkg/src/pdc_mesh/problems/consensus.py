"""Consensus reformulation of a finite sum over a connected graph."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from pdc_mesh.errors import DisconnectedGraphError
from pdc_mesh.problems.coupled import CoupledProblem
from pdc_mesh.problems.objectives import LocalObjective
from pdc_mesh.topology.graph import Graph
from pdc_mesh.topology.matrices import derive_matrices


def build_consensus_instance(objectives: Sequence[LocalObjective], graph: Graph) -> CoupledProblem:
    """Write ``min sum_i f_i(x)`` as a coupled problem with ``x_1 = ... = x_N``.

    The coupling matrix is ``incidence kron I_n``; agent i owns its column
    block and ``q = 0``, so the constraint holds exactly when all blocks
    agree.

    Raises:
        ValueError: If the objectives do not share a dimension or their count
            does not match the graph.
        DisconnectedGraphError: If the graph is disconnected.
    """
    if len(objectives) != graph.n_agents:
        raise ValueError(f"{len(objectives)} objectives for a {graph.n_agents}-agent graph")
    dims = {obj.dim for obj in objectives}
    if len(dims) != 1:
        raise ValueError(f"Consensus objectives must share one dimension, got {sorted(dims)}")
    if not graph.is_connected():
        raise DisconnectedGraphError("Consensus needs a connected graph")

    n = dims.pop()
    incidence = derive_matrices(graph, block_size=n).expanded_incidence.toarray()
    coupling = tuple(incidence[:, i * n : (i + 1) * n] for i in range(graph.n_agents))
    return CoupledProblem(
        objectives=tuple(objectives),
        coupling=coupling,
        rhs=np.zeros(graph.n_edges * n),
        metadata={"kind": "consensus"},
    )
