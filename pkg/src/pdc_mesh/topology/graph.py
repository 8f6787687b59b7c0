"""Undirected agent graphs.

A ``Graph`` is immutable once built. Its edge list is kept in lexicographic
order so that incidence rows and edge-indexed duals are reproducible.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import networkx as nx
import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph over agents ``0..n_agents-1``.

    Attributes:
        n_agents: Number of agents N.
        edges: Canonically ordered pairs ``(i, j)`` with ``i < j``.
    """

    n_agents: int
    edges: tuple[tuple[int, int], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.n_agents < 1:
            raise ValueError(f"n_agents must be positive, got {self.n_agents}")
        seen: set[tuple[int, int]] = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"Self-loop on agent {i}")
            if not (0 <= i < j < self.n_agents):
                raise ValueError(f"Edge ({i}, {j}) is not canonical for {self.n_agents} agents")
            if (i, j) in seen:
                raise ValueError(f"Duplicate edge ({i}, {j})")
            seen.add((i, j))
        if list(self.edges) != sorted(self.edges):
            raise ValueError("Edge list must be sorted lexicographically")

    @classmethod
    def from_edges(cls, n_agents: int, edges: Iterable[tuple[int, int]]) -> Graph:
        """Build a graph from unordered pairs, canonicalizing and sorting them."""
        canonical = {(min(i, j), max(i, j)) for i, j in edges}
        return cls(n_agents=n_agents, edges=tuple(sorted(canonical)))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def _adjacency(self) -> tuple[tuple[int, ...], ...]:
        adjacency: list[list[int]] = [[] for _ in range(self.n_agents)]
        for i, j in self.edges:
            adjacency[i].append(j)
            adjacency[j].append(i)
        return tuple(tuple(sorted(nbrs)) for nbrs in adjacency)

    @cached_property
    def _neighbor_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(nbrs) for nbrs in self._adjacency)

    def neighbors(self, agent: int) -> tuple[int, ...]:
        """Sorted neighbor indices of ``agent``."""
        return self._adjacency[agent]

    def is_neighbor(self, agent: int, other: int) -> bool:
        return other in self._neighbor_sets[agent]

    def degree(self, agent: int) -> int:
        return len(self._adjacency[agent])

    @property
    def max_degree(self) -> int:
        return max((len(nbrs) for nbrs in self._adjacency), default=0)

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n_agents))
        g.add_edges_from(self.edges)
        return g

    def is_connected(self) -> bool:
        return bool(nx.is_connected(self.to_networkx()))


def build_cycle(n_agents: int) -> Graph:
    """Build the N-cycle ``0-1-...-(N-1)-0``.

    Args:
        n_agents: Number of agents, at least 3.

    Returns:
        The cycle graph with canonically ordered edges.

    Raises:
        ValueError: If ``n_agents < 3``.

    Example:
        >>> build_cycle(3).edges
        ((0, 1), (0, 2), (1, 2))
    """
    if n_agents < 3:
        raise ValueError(f"A cycle needs at least 3 agents, got {n_agents}")
    pairs = [(k, k + 1) for k in range(n_agents - 1)]
    pairs.append((0, n_agents - 1))
    return Graph.from_edges(n_agents, pairs)


def build_random_connected(n_agents: int, edge_prob: float, seed: int) -> Graph:
    """Sample an Erdos-Renyi graph and augment it until connected.

    Every pair ``i < j`` is kept with probability ``edge_prob``. If the sample
    is disconnected, edges ``(perm[k], perm[k+1])`` along a seeded random
    permutation are added until it is connected.

    Args:
        n_agents: Number of agents.
        edge_prob: Independent edge probability in ``[0, 1]``.
        seed: Seed for ``numpy.random.default_rng``.

    Returns:
        A connected graph; the same arguments always give the same edge list.
    """
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError(f"edge_prob must lie in [0, 1], got {edge_prob}")
    rng = np.random.default_rng(seed)
    nxg = nx.Graph()
    nxg.add_nodes_from(range(n_agents))
    for i in range(n_agents):
        for j in range(i + 1, n_agents):
            if rng.random() < edge_prob:
                nxg.add_edge(i, j)

    if not nx.is_connected(nxg):
        perm = rng.permutation(n_agents)
        added = 0
        for k in range(n_agents - 1):
            a, b = int(perm[k]), int(perm[k + 1])
            if not nxg.has_edge(a, b):
                nxg.add_edge(a, b)
                added += 1
            if nx.is_connected(nxg):
                break
        logger.debug("Added %d augmentation edges to connect %d agents", added, n_agents)

    return Graph.from_edges(n_agents, nxg.edges())


# ---------------------------------------------------------------------------
# Edge-list files
# ---------------------------------------------------------------------------


def write_edge_list(graph: Graph, path: Path) -> None:
    """Write ``agents N`` followed by one ``i j`` line per edge."""
    lines = [f"agents {graph.n_agents}"]
    lines.extend(f"{i} {j}" for i, j in graph.edges)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_edge_list(path: Path) -> Graph:
    """Parse an edge-list file written by :func:`write_edge_list`.

    Blank lines and ``#`` comments are skipped.

    Raises:
        FileNotFoundError: If the file does not exist.
        ValueError: If the header is missing or a line is malformed.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Edge-list file not found: {path}")

    n_agents: int | None = None
    pairs: list[tuple[int, int]] = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n_agents is None:
            if len(parts) != 2 or parts[0] != "agents":
                raise ValueError(f"{path}:{lineno}: expected header 'agents N'")
            n_agents = int(parts[1])
            continue
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'i j', got {line!r}")
        pairs.append((int(parts[0]), int(parts[1])))

    if n_agents is None:
        raise ValueError(f"{path}: empty edge-list file")
    return Graph.from_edges(n_agents, pairs)
