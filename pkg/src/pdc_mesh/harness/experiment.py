"""Repeated runs and parameter sweeps with their output files."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from pdc_mesh.config import ExperimentConfig
from pdc_mesh.diagnostics.metrics import classification_accuracy, training_loss
from pdc_mesh.engine.runner import Observer, run
from pdc_mesh.engine.state import IterationTrace, RoundRecord
from pdc_mesh.errors import SolverAbort
from pdc_mesh.harness.builders import BuiltInstance, build_experiment
from pdc_mesh.stats.aggregate import mean_trace, summarize, terminal_values
from pdc_mesh.storage.trace_writer import RunWriter
from pdc_mesh.topology.graph import Graph

logger = logging.getLogger(__name__)


@dataclass
class ExperimentResult:
    """Traces of every repeat and their per-round mean."""

    traces: list[IterationTrace]
    mean: list[RoundRecord]
    summary: dict[str, Any]
    output_dir: Optional[Path] = None


@dataclass
class SweepResult:
    param: str
    points: dict[float, ExperimentResult] = field(default_factory=dict)
    output_dir: Optional[Path] = None

    def rows(self) -> list[tuple[float, int, float, float]]:
        """``(param_value, round, mean_grad_residue, mean_infeasibility)`` rows."""
        return [
            (value, record.round, record.grad_residue, record.infeasibility)
            for value, result in self.points.items()
            for record in result.mean
        ]


def _run_summary(
    built: BuiltInstance, trace: IterationTrace, seed: int, wall_time: float
) -> dict[str, Any]:
    summary = summarize(trace)
    summary["seed"] = seed
    summary["wall_time"] = wall_time
    if built.train is not None and trace.final_states:
        x_blocks = trace.final_blocks("x")
        summary["training_loss"] = training_loss(built.problem, x_blocks)
        summary["train_accuracy"] = classification_accuracy(built.problem, built.train, x_blocks)
        if built.test is not None:
            summary["test_accuracy"] = classification_accuracy(
                built.problem, built.test, x_blocks
            )
    return summary


def run_experiment(
    config: ExperimentConfig,
    out_dir: Optional[Path] = None,
    observer: Optional[Observer] = None,
    prebuilt: Optional[tuple[Graph, BuiltInstance]] = None,
    **solver_changes: Any,
) -> ExperimentResult:
    """Run ``config.repeat`` seeded repeats and write their files.

    Run k starts from seed ``config.seed + k``. With ``out_dir`` set, each
    run's trace and final state are written as soon as it finishes, followed
    by the mean trace and ``summary.json``.

    Args:
        config: Validated experiment configuration.
        out_dir: Output directory; None keeps everything in memory.
        observer: Per-round callback passed to every run.
        prebuilt: Graph and instance to reuse instead of building them.
        **solver_changes: Overrides of solver settings, used by sweeps.

    Raises:
        SolverAbort: A run diverged. Its partial trace and a summary naming
            the failing run are written before the exception propagates.
    """
    graph, built = prebuilt if prebuilt is not None else build_experiment(config)
    writer = RunWriter(out_dir) if out_dir is not None else None

    traces: list[IterationTrace] = []
    runs: list[dict[str, Any]] = []
    started = time.perf_counter()
    for index, seed in enumerate(config.run_seeds()):
        solver_config = config.solver.to_solver_config(seed, **solver_changes)
        run_start = time.perf_counter()
        try:
            trace = run(built.problem, graph, solver_config, observer=observer)
        except SolverAbort as err:
            logger.error("Run %d (seed %d) aborted: %s", index, seed, err)
            if writer is not None:
                writer.write_trace(index, err.trace)
                writer.write_summary(
                    {
                        "config": config.to_dict(),
                        "solver_changes": solver_changes,
                        "runs": runs,
                        "aborted": {
                            "run": index,
                            "seed": seed,
                            "agent": err.agent,
                            "round": err.round_index,
                            "field": err.field,
                            "rounds_completed": err.trace.rounds,
                        },
                    }
                )
            raise
        wall_time = time.perf_counter() - run_start
        traces.append(trace)
        runs.append(_run_summary(built, trace, seed, wall_time))
        if writer is not None:
            writer.write_trace(index, trace)
            writer.write_final_state(index, trace)

    mean = mean_trace(traces)
    summary: dict[str, Any] = {
        "config": config.to_dict(),
        "solver_changes": solver_changes,
        "instance": dict(built.problem.metadata),
        "n_agents": graph.n_agents,
        "n_edges": graph.n_edges,
        "repeat": config.repeat,
        "wall_time": time.perf_counter() - started,
        "rounds": max(t.rounds for t in traces),
        "mean_final": {
            "grad_residue": terminal_values(traces, "grad_residue"),
            "infeasibility": terminal_values(traces, "infeasibility"),
            "consensus_gap": terminal_values(traces, "consensus_gap"),
        },
        "runs": runs,
    }
    if writer is not None:
        writer.write_mean_trace(mean)
        writer.write_summary(summary)
        logger.info("Wrote %d run(s) to %s", len(traces), writer.base_dir)
    return ExperimentResult(traces, mean, summary, writer.base_dir if writer else None)


def run_sweep(config: ExperimentConfig, out_dir: Optional[Path] = None) -> SweepResult:
    """Run the experiment once per value of ``config.sweep.param``.

    Every value gets its own ``<param>_<value>/`` directory; the root holds
    ``sweep_<param>.csv`` and a summary of terminal values. The graph and
    instance are built once and shared by all values.

    Raises:
        ValueError: If the config has no sweep parameter.
    """
    param = config.sweep.param
    if param is None:
        raise ValueError("Config has no sweep.param")
    prebuilt = build_experiment(config)
    writer = RunWriter(out_dir) if out_dir is not None else None
    result = SweepResult(param=param, output_dir=writer.base_dir if writer else None)

    for value in config.sweep.values:
        logger.info("Sweep %s=%g", param, value)
        child = writer.child(param, value).base_dir if writer is not None else None
        result.points[value] = run_experiment(
            config, child, prebuilt=prebuilt, **{param: value}
        )

    if writer is not None:
        writer.write_sweep(param, result.rows())
        writer.write_summary(
            {
                "param": param,
                "values": list(config.sweep.values),
                "terminal": {
                    str(value): point.summary["mean_final"]
                    for value, point in result.points.items()
                },
            }
        )
    return result
