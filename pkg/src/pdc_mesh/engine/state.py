"""Agent state, solver settings and the per-round trace."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Literal, Optional

import numpy as np

from pdc_mesh.errors import ConfigError

Mode = Literal["exact_pdc", "inexact_ipdc"]
MODES: tuple[str, ...] = ("exact_pdc", "inexact_ipdc")
INIT_MODES: tuple[str, ...] = ("uniform", "zeros")


@dataclass
class AgentState:
    """Mutable iterate block of one agent.

    Attributes:
        x: Primal block.
        y: Local copy of the dual variable.
        p: Accumulated dual consensus term, ``A_i^T mu``.
        z: Proximal center.
    """

    x: np.ndarray
    y: np.ndarray
    p: np.ndarray
    z: np.ndarray

    def copy(self) -> AgentState:
        return AgentState(self.x.copy(), self.y.copy(), self.p.copy(), self.z.copy())

    def is_finite(self) -> Optional[str]:
        """Name of the first non-finite field, or None."""
        for name in ("x", "y", "p", "z"):
            if not np.all(np.isfinite(getattr(self, name))):
                return name
        return None


@dataclass
class SolverConfig:
    """Algorithm parameters.

    Attributes:
        mode: ``exact_pdc`` (subproblems solved by FISTA) or ``inexact_ipdc``
            (one gradient step per round).
        p: Proximal weight.
        alpha: Dual step size.
        beta: Proximal-center step, in (0, 1].
        rho: Augmented Lagrangian penalty.
        zeta: Gradient step, required for ``inexact_ipdc``.
        subsolver_tol: Normalized prox-gradient tolerance of FISTA.
        inner_max_iters: FISTA iteration budget per solve.
        max_rounds: Outer round budget.
        seed: Seed of the initial point.
        record_phi: Evaluate the potential function each round (quadratic
            instances only).
        tol_residue: Gradient residue threshold of the stopping test.
        tol_infeasibility: Infeasibility threshold; the run stops early once
            both thresholds hold (0 disables early stopping).
        init: ``uniform`` on [-1, 1] or ``zeros`` for x0 = z0 and y0.
        threads: Worker threads per stage; 1 runs agents inline.
        guard: Audit neighbor reads and fail on non-neighbor access.
    """

    mode: str = "exact_pdc"
    p: float = 0.01
    alpha: float = 0.01
    beta: float = 0.1
    rho: float = 0.01
    zeta: Optional[float] = None
    subsolver_tol: float = 1e-5
    inner_max_iters: int = 10_000
    max_rounds: int = 1000
    seed: int = 0
    record_phi: bool = False
    tol_residue: float = 0.0
    tol_infeasibility: float = 0.0
    init: str = "uniform"
    threads: int = 1
    guard: bool = False

    def validate(self) -> None:
        """Raise ConfigError for inconsistent settings."""
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        for name in ("p", "alpha", "rho", "subsolver_tol"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive, got {value!r}")
        if not 0.0 < self.beta <= 1.0:
            raise ConfigError(f"beta must lie in (0, 1], got {self.beta}")
        if self.mode == "inexact_ipdc":
            if self.zeta is None or self.zeta <= 0:
                raise ConfigError("inexact_ipdc needs a positive zeta")
        elif self.zeta is not None:
            raise ConfigError(f"zeta is only used by inexact_ipdc, got it with mode {self.mode!r}")
        if self.max_rounds < 1 or self.inner_max_iters < 1:
            raise ConfigError("max_rounds and inner_max_iters must be >= 1")
        if self.tol_residue < 0 or self.tol_infeasibility < 0:
            raise ConfigError("Stopping tolerances must be non-negative")
        if self.init not in INIT_MODES:
            raise ConfigError(f"init must be one of {INIT_MODES}, got {self.init!r}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


TRACE_COLUMNS: tuple[str, ...] = (
    "round",
    "grad_residue",
    "infeasibility",
    "consensus_gap",
    "dx",
    "dy",
    "dz",
    "inner_iters",
    "phi",
)


@dataclass(frozen=True)
class RoundRecord:
    """Diagnostics after one completed round (rounds count from 1)."""

    round: int
    grad_residue: float
    infeasibility: float
    consensus_gap: float
    dx: float
    dy: float
    dz: float
    inner_iters: int
    phi: Optional[float] = None

    def as_row(self) -> tuple[Any, ...]:
        return tuple(getattr(self, name) for name in TRACE_COLUMNS)


@dataclass
class IterationTrace:
    """Round records plus the final agent states of one run."""

    records: list[RoundRecord] = field(default_factory=list)
    final_states: list[AgentState] = field(default_factory=list)
    stopped_by: str = "max_rounds"
    inner_solves: int = 0
    inner_solves_converged: int = 0
    locality_reads: int = 0
    locality_violations: int = 0

    def append(self, record: RoundRecord) -> None:
        if self.records and record.round <= self.records[-1].round:
            raise ValueError(
                f"Round {record.round} does not follow round {self.records[-1].round}"
            )
        self.records.append(record)

    @property
    def rounds(self) -> int:
        return len(self.records)

    @property
    def last(self) -> RoundRecord:
        if not self.records:
            raise IndexError("Trace has no records")
        return self.records[-1]

    def column(self, name: str) -> np.ndarray:
        """Values of one trace column; missing phi values become NaN."""
        if name not in TRACE_COLUMNS:
            raise KeyError(name)
        values = [getattr(r, name) for r in self.records]
        return np.array([np.nan if v is None else v for v in values], dtype=float)

    @property
    def stopping_rule_share(self) -> float:
        """Fraction of inner solves that ended on the tolerance test."""
        if self.inner_solves == 0:
            return 1.0
        return self.inner_solves_converged / self.inner_solves

    def final_blocks(self, field_name: str) -> list[np.ndarray]:
        return [getattr(s, field_name).copy() for s in self.final_states]

    def mean_dual(self) -> np.ndarray:
        """Average of the agents' dual copies."""
        return np.mean([s.y for s in self.final_states], axis=0)
