"""Aggregation of iteration traces across repeats and sweep points."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
from scipy.stats import linregress

from pdc_mesh.engine.state import IterationTrace, RoundRecord

_NUMERIC = ("grad_residue", "infeasibility", "consensus_gap", "dx", "dy", "dz")


def _padded(trace: IterationTrace, name: str, length: int) -> np.ndarray:
    values = trace.column(name)
    if values.size == 0:
        raise ValueError("Cannot aggregate an empty trace")
    if values.size < length:
        values = np.concatenate([values, np.full(length - values.size, values[-1])])
    return values


def mean_trace(traces: Sequence[IterationTrace]) -> list[RoundRecord]:
    """Per-round averages across repeats.

    Runs that stopped early contribute their last record to every later
    round. ``phi`` is averaged only when every run recorded it.
    """
    if not traces:
        raise ValueError("Need at least one trace")
    length = max(t.rounds for t in traces)
    columns = {
        name: np.mean([_padded(t, name, length) for t in traces], axis=0) for name in _NUMERIC
    }
    inner = np.mean([_padded(t, "inner_iters", length) for t in traces], axis=0)
    phi: Optional[np.ndarray] = None
    if all(t.rounds and t.last.phi is not None for t in traces):
        phi = np.mean([_padded(t, "phi", length) for t in traces], axis=0)

    return [
        RoundRecord(
            round=r + 1,
            grad_residue=float(columns["grad_residue"][r]),
            infeasibility=float(columns["infeasibility"][r]),
            consensus_gap=float(columns["consensus_gap"][r]),
            dx=float(columns["dx"][r]),
            dy=float(columns["dy"][r]),
            dz=float(columns["dz"][r]),
            inner_iters=int(round(inner[r])),
            phi=None if phi is None else float(phi[r]),
        )
        for r in range(length)
    ]


def best_iterate_curve(trace: IterationTrace) -> np.ndarray:
    """``min_{t <= r} (residue(t) + infeasibility(t))`` for every round r."""
    combined = trace.column("grad_residue") + trace.column("infeasibility")
    return np.minimum.accumulate(combined)


@dataclass(frozen=True)
class RateFit:
    """Log-log regression of a curve against the round index.

    Attributes:
        slope: Fitted exponent; -1 means an O(1/r) decay.
        intercept: Fitted log-value at round 1.
        residual: Root-mean-square residual of the fit in log space.
        points: Number of rounds used.
    """

    slope: float
    intercept: float
    residual: float
    points: int


def fit_loglog_rate(values: np.ndarray, start: int = 10, stop: Optional[int] = None) -> RateFit:
    """Fit ``log(values[r-1])`` against ``log(r)`` for rounds in ``[start, stop]``.

    Non-positive values are dropped before the fit.

    Raises:
        ValueError: If fewer than two usable points remain.
    """
    values = np.asarray(values, dtype=float)
    stop = values.size if stop is None else min(stop, values.size)
    rounds = np.arange(start, stop + 1)
    window = values[start - 1 : stop]
    keep = window > 0
    if np.count_nonzero(keep) < 2:
        raise ValueError("Need at least two positive values to fit a slope")
    log_r, log_v = np.log(rounds[keep]), np.log(window[keep])
    fit = linregress(log_r, log_v)
    residual = log_v - (fit.intercept + fit.slope * log_r)
    return RateFit(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        residual=float(np.sqrt(np.mean(residual**2))),
        points=int(log_r.size),
    )


def summarize(trace: IterationTrace) -> dict[str, Any]:
    """Final metrics and counters of one run."""
    last = trace.last
    return {
        "rounds": trace.rounds,
        "stopped_by": trace.stopped_by,
        "grad_residue": last.grad_residue,
        "infeasibility": last.infeasibility,
        "consensus_gap": last.consensus_gap,
        "best_kkt": float(best_iterate_curve(trace)[-1]),
        "inner_solves": trace.inner_solves,
        "stopping_rule_share": trace.stopping_rule_share,
        "locality_violations": trace.locality_violations,
    }


def terminal_values(traces: Sequence[IterationTrace], name: str) -> float:
    """Mean over repeats of a column's last value."""
    return float(np.mean([t.column(name)[-1] for t in traces]))
