"""Experiment harness: builders, repeated runs, sweeps and check suites."""

from pdc_mesh.harness.builders import BuiltInstance, build_experiment, build_graph, build_instance
from pdc_mesh.harness.checks import SUITES, CheckReport, CheckResult, run_check
from pdc_mesh.harness.experiment import (
    ExperimentResult,
    SweepResult,
    run_experiment,
    run_sweep,
)

__all__ = [
    "SUITES",
    "BuiltInstance",
    "CheckReport",
    "CheckResult",
    "ExperimentResult",
    "SweepResult",
    "build_experiment",
    "build_graph",
    "build_instance",
    "run_check",
    "run_experiment",
    "run_sweep",
]
