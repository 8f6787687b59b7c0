"""Linearly coupled problem: minimize sum_i f_i(x_i) s.t. sum_i B_i x_i = q."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np
from scipy.linalg import block_diag

from pdc_mesh.problems.objectives import LocalObjective


def _readonly(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=float, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class CoupledProblem:
    """An instance of the linearly coupled problem.

    Attributes:
        objectives: One local objective per agent.
        coupling: Per-agent blocks ``B_i`` of shape ``M x n_i``.
        rhs: Right-hand side ``q`` of length M.
        metadata: Free-form builder information (instance kind, aux agent,
            smoothness flags).
        b_max: ``max_i ||B_i||_2``, computed at construction.
    """

    objectives: tuple[LocalObjective, ...]
    coupling: tuple[np.ndarray, ...]
    rhs: np.ndarray
    metadata: Mapping[str, Any] = field(default_factory=dict)
    b_max: float = field(init=False)

    def __post_init__(self) -> None:
        objectives = tuple(self.objectives)
        coupling = tuple(_readonly(np.atleast_2d(b)) for b in self.coupling)
        rhs = _readonly(np.atleast_1d(self.rhs))

        if not objectives:
            raise ValueError("A coupled problem needs at least one agent")
        if len(objectives) != len(coupling):
            raise ValueError(
                f"{len(objectives)} objectives but {len(coupling)} coupling blocks"
            )
        m = rhs.size
        for i, (obj, block) in enumerate(zip(objectives, coupling)):
            if block.shape[0] != m:
                raise ValueError(f"B_{i} has {block.shape[0]} rows, expected {m}")
            if block.shape[1] != obj.dim:
                raise ValueError(
                    f"B_{i} has {block.shape[1]} columns but f_{i} has dimension {obj.dim}"
                )
            lo, hi = obj.curvature_bounds
            if lo > hi:
                raise ValueError(f"f_{i} has gamma_minus {lo} > gamma_plus {hi}")

        object.__setattr__(self, "objectives", objectives)
        object.__setattr__(self, "coupling", coupling)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "metadata", dict(self.metadata))
        object.__setattr__(self, "b_max", compute_b_max(coupling))

    # -- shape --------------------------------------------------------------

    @property
    def n_agents(self) -> int:
        return len(self.objectives)

    @property
    def m_constraints(self) -> int:
        return int(self.rhs.size)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(obj.dim for obj in self.objectives)

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(v) for v in np.cumsum((0, *self.dims)))

    # -- curvature ----------------------------------------------------------

    @property
    def gamma_minus(self) -> float:
        return min(obj.curvature_bounds[0] for obj in self.objectives)

    @property
    def gamma_plus(self) -> float:
        return max(obj.curvature_bounds[1] for obj in self.objectives)

    @property
    def is_quadratic(self) -> bool:
        return all(obj.is_quadratic for obj in self.objectives)

    # -- assembled matrices ---------------------------------------------------

    def stacked_coupling(self) -> np.ndarray:
        """``B = [B_1, ..., B_N]`` of shape ``M x sum(n_i)``."""
        return np.hstack(self.coupling)

    def block_diagonal_coupling(self) -> np.ndarray:
        """``blkdiag(B_1, ..., B_N)`` of shape ``NM x sum(n_i)``."""
        return block_diag(*self.coupling)

    # -- block helpers --------------------------------------------------------

    def split(self, x: np.ndarray) -> list[np.ndarray]:
        """Split a stacked primal vector into per-agent blocks."""
        x = np.asarray(x, dtype=float)
        if x.size != self.total_dim:
            raise ValueError(f"Expected vector of size {self.total_dim}, got {x.size}")
        return [x[a:b].copy() for a, b in zip(self.offsets[:-1], self.offsets[1:])]

    @staticmethod
    def concat(blocks: Sequence[np.ndarray]) -> np.ndarray:
        return np.concatenate([np.asarray(b, dtype=float).ravel() for b in blocks])

    def constraint_residual(self, x_blocks: Sequence[np.ndarray]) -> np.ndarray:
        """``sum_i B_i x_i - q``."""
        total = -np.array(self.rhs)
        for block, x in zip(self.coupling, x_blocks):
            total = total + block @ x
        return total

    def objective_value(self, x_blocks: Sequence[np.ndarray]) -> float:
        return float(sum(obj.value(x) for obj, x in zip(self.objectives, x_blocks)))

    def permuted(self, order: Sequence[int]) -> CoupledProblem:
        """The same problem with agents relabeled so new agent k is old ``order[k]``."""
        if sorted(order) != list(range(self.n_agents)):
            raise ValueError(f"{order!r} is not a permutation of the agents")
        return CoupledProblem(
            objectives=tuple(self.objectives[k] for k in order),
            coupling=tuple(self.coupling[k] for k in order),
            rhs=self.rhs,
            metadata=self.metadata,
        )


def compute_b_max(coupling: Sequence[np.ndarray]) -> float:
    """Largest spectral norm among the coupling blocks."""
    return max((float(np.linalg.norm(b, 2)) if b.size else 0.0 for b in coupling), default=0.0)
