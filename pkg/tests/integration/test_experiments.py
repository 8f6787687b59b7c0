"""Integration tests: full runs through the CLI, output files and check suites."""

import json
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest
from click.testing import CliRunner

from pdc_mesh.cli import main
from pdc_mesh.harness.checks import RATE_SLOPE_BOUND, run_check
from pdc_mesh.storage.trace_writer import read_state_snapshot, read_sweep_csv, read_trace_csv

pytestmark = pytest.mark.integration

QUAD = (
    "--set",
    "instance.n_agents=4",
    "--set",
    "instance.n_local=3",
    "--set",
    "instance.m_constraints=2",
    "--set",
    "solver.p=1",
    "--set",
    "solver.rho=1",
    "--set",
    "solver.alpha=0.1",
    "--set",
    "solver.beta=0.5",
    "--set",
    "solver.max_rounds=60",
)


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def workdir(tmp_path: Path, monkeypatch: pytest.MonkeyPatch):
    monkeypatch.chdir(tmp_path)
    with patch("pdc_mesh.config.Path.home", return_value=tmp_path / "home"):
        yield tmp_path


def _invoke(runner: CliRunner, *args: str) -> None:
    result = runner.invoke(main, list(args))
    assert result.exit_code == 0, result.output


class TestRunFlow:
    def test_quadratic_run_files(self, runner, workdir):
        out = workdir / "quad"
        _invoke(runner, "run", "-o", str(out), "--set", "repeat=3", *QUAD)

        traces = [read_trace_csv(out / f"run_{k:03d}.csv") for k in range(3)]
        assert all(len(trace) == 60 for trace in traces)
        for trace in traces:
            assert trace[-1].grad_residue < trace[0].grad_residue
        mean = read_trace_csv(out / "mean_trace.csv")
        expected = np.mean([trace[-1].grad_residue for trace in traces])
        assert mean[-1].grad_residue == pytest.approx(expected)

        states = read_state_snapshot(out / "final_state_002.txt")
        assert len(states) == 4
        assert all(state.x.shape == (3,) and state.y.shape == (2,) for state in states)

        summary = json.loads((out / "summary.json").read_text())
        assert summary["n_agents"] == 4
        assert summary["n_edges"] == 4
        assert [run["seed"] for run in summary["runs"]] == [0, 1, 2]

    def test_consensus_agents_agree(self, runner, workdir):
        out = workdir / "consensus"
        _invoke(
            runner,
            "run",
            "-o",
            str(out),
            "--set",
            "instance.kind=consensus",
            *QUAD,
            "--set",
            "solver.max_rounds=1000",
        )
        trace = read_trace_csv(out / "run_000.csv")
        assert trace[0].consensus_gap > 0.0
        assert trace[-1].consensus_gap < 0.1 * trace[0].consensus_gap

    def test_vertical_lr_run(self, runner, workdir):
        out = workdir / "lr"
        _invoke(
            runner,
            "run",
            "-o",
            str(out),
            "--set",
            "instance.kind=vertical_lr",
            "--set",
            "instance.n_features=12",
            "--set",
            "instance.n_samples=30",
            "--set",
            "instance.n_agents=3",
            "--set",
            "solver.p=1",
            "--set",
            "solver.rho=1",
            "--set",
            "solver.alpha=0.1",
            "--set",
            "solver.beta=0.5",
            "--set",
            "solver.max_rounds=20",
        )
        summary = json.loads((out / "summary.json").read_text())
        run_summary = summary["runs"][0]
        assert np.isfinite(run_summary["training_loss"])
        assert 0.0 <= run_summary["train_accuracy"] <= 1.0
        assert summary["instance"]["kind"] == "vertical_lr"
        states = read_state_snapshot(out / "final_state_000.txt")
        assert len(states) == 3
        assert sum(state.x.size for state in states) == 12 + 30
        assert states[summary["instance"]["aux_agent"]].y.shape == (30,)

    def test_sweep_flow(self, runner, workdir):
        out = workdir / "sweep"
        _invoke(
            runner,
            "sweep",
            "-o",
            str(out),
            "--param",
            "beta",
            "--values",
            "0.25,0.5,1.0",
            *QUAD,
            "--set",
            "solver.max_rounds=20",
        )
        rows = read_sweep_csv(out / "sweep_beta.csv")
        assert len(rows) == 60
        assert sorted({row[0] for row in rows}) == [0.25, 0.5, 1.0]
        for value in ("0.25", "0.5", "1.0"):
            summary = json.loads((out / f"beta_{value}" / "summary.json").read_text())
            assert summary["solver_changes"] == {"beta": float(value)}


class TestDeterminism:
    def test_repeated_runs_are_byte_identical(self, runner, workdir):
        for name in ("first", "second"):
            _invoke(runner, "run", "-o", str(workdir / name), "--seed", "11", *QUAD)
        for name in ("run_000.csv", "final_state_000.txt", "mean_trace.csv"):
            first = (workdir / "first" / name).read_bytes()
            assert first == (workdir / "second" / name).read_bytes(), name

    def test_threads_do_not_change_results(self, runner, workdir):
        _invoke(runner, "run", "-o", str(workdir / "one"), "--threads", "1", *QUAD)
        _invoke(runner, "run", "-o", str(workdir / "four"), "--threads", "4", *QUAD)
        for name in ("run_000.csv", "final_state_000.txt"):
            one = (workdir / "one" / name).read_bytes()
            assert one == (workdir / "four" / name).read_bytes(), name


@pytest.mark.slow
class TestCheckSuites:
    def test_bounds(self):
        report = run_check("bounds", n_instances=50)
        assert report.passed, [r.name for r in report.failures()]

    def test_oracles(self):
        report = run_check("oracles", n_instances=50, kkt_instances=20)
        assert report.passed, [r.name for r in report.failures()]
        names = [r.name for r in report.results]
        assert "IPDC limit matches PDC in (z, mean y)" in names
        assert "IPDC limit is an eps-KKT point" in names

    def test_descent_with_certified_steps(self):
        report = run_check("descent")
        assert report.passed, [r.name for r in report.failures()]

    def test_rate(self):
        report = run_check("rate")
        assert report.passed, [r.name for r in report.failures()]
        assert report.results[0].value <= RATE_SLOPE_BOUND
