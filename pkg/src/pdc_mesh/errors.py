"""Exception hierarchy for pdc-mesh.

Every error raised on purpose by the package derives from ``PdcMeshError``.
Subclasses also inherit the closest builtin so callers that already catch
``ValueError`` or ``RuntimeError`` keep working.
"""

from __future__ import annotations

from typing import Any


class PdcMeshError(Exception):
    """Base class for all pdc-mesh errors."""


class ConfigError(PdcMeshError, ValueError):
    """Invalid experiment configuration or solver settings."""


class DisconnectedGraphError(PdcMeshError, ValueError):
    """The agent graph is not connected."""


class RankDeficientCouplingError(PdcMeshError, ValueError):
    """The assembled coupling matrix B is not full row rank."""

    def __init__(self, rank: int, rows: int) -> None:
        super().__init__(f"Coupling matrix has rank {rank} < {rows} rows")
        self.rank = rank
        self.rows = rows


class SingularSystemError(PdcMeshError, RuntimeError):
    """A dense linear system is singular or not positive definite."""

    def __init__(self, message: str, condition: float = float("inf")) -> None:
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class ConvergenceError(PdcMeshError, RuntimeError):
    """An iterative oracle exhausted its budget."""

    def __init__(self, message: str, residual: float) -> None:
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


class SolverAbort(PdcMeshError, RuntimeError):
    """A non-finite value appeared in an agent iterate."""

    def __init__(self, agent: int, round_index: int, field: str, trace: Any = None) -> None:
        super().__init__(f"Non-finite {field} at agent {agent} in round {round_index}")
        self.agent = agent
        self.round_index = round_index
        self.field = field
        self.trace = trace


class LocalityViolation(PdcMeshError, RuntimeError):
    """An agent read state of an agent that is not its neighbor."""

    def __init__(self, reader: int, sender: int) -> None:
        super().__init__(f"Agent {reader} read the state of non-neighbor {sender}")
        self.reader = reader
        self.sender = sender
