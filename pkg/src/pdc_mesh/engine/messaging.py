"""Round snapshot of broadcast dual copies with neighbor-only access."""

from __future__ import annotations

import threading
from collections.abc import Sequence

import numpy as np

from pdc_mesh.errors import LocalityViolation
from pdc_mesh.topology.graph import Graph


class MessageBoard:
    """Holds ``y^r`` for one round; agents read it through :meth:`receive`.

    The snapshot arrays are read-only copies, so stage updates can never
    observe partially updated values. With ``audit=True`` every read is
    counted and a read of a non-neighbor raises ``LocalityViolation``.
    """

    def __init__(self, graph: Graph, duals: Sequence[np.ndarray], audit: bool = False) -> None:
        if len(duals) != graph.n_agents:
            raise ValueError(f"{len(duals)} dual blocks for {graph.n_agents} agents")
        self.graph = graph
        self.audit = audit
        self.reads = 0
        self.violations = 0
        self._lock = threading.Lock()
        snapshot = []
        for y in duals:
            frozen = np.array(y, dtype=float, copy=True)
            frozen.flags.writeable = False
            snapshot.append(frozen)
        self._duals = tuple(snapshot)

    def receive(self, reader: int, sender: int) -> np.ndarray:
        """Return ``y_sender`` as seen by ``reader``."""
        if self.audit:
            allowed = sender == reader or self.graph.is_neighbor(reader, sender)
            with self._lock:
                self.reads += 1
                if not allowed:
                    self.violations += 1
            if not allowed:
                raise LocalityViolation(reader, sender)
        return self._duals[sender]


def laplacian_neighbor_sum(board: MessageBoard, agent: int) -> np.ndarray:
    """``sum_{j in N_i} (y_i - y_j)``, row block i of ``L^- y``."""
    own = board.receive(agent, agent)
    total = np.zeros_like(own)
    for j in board.graph.neighbors(agent):
        total += own - board.receive(agent, j)
    return total


def signless_neighbor_sum(board: MessageBoard, agent: int) -> np.ndarray:
    """``sum_{j in N_i} (y_i + y_j)``, row block i of ``L^+ y``.

    Example:
        Two agents with ``y = (2, 3)``: agent 0 gets 5.
    """
    own = board.receive(agent, agent)
    total = np.zeros_like(own)
    for j in board.graph.neighbors(agent):
        total += own + board.receive(agent, j)
    return total
