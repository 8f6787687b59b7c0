"""Unit tests for the CLI module."""

import json
from pathlib import Path
from unittest.mock import patch

import pytest
from click.testing import CliRunner

from pdc_mesh.cli import main
from pdc_mesh.errors import SolverAbort
from pdc_mesh.harness.checks import CheckReport, CheckResult
from pdc_mesh.topology.graph import build_cycle, write_edge_list

SMALL_RUN = (
    "--set",
    "instance.n_agents=3",
    "--set",
    "instance.n_local=2",
    "--set",
    "instance.m_constraints=2",
    "--set",
    "solver.max_rounds=4",
    "--set",
    "solver.alpha=0.1",
    "--set",
    "solver.beta=0.5",
)


@pytest.fixture
def runner() -> CliRunner:
    """Create a Click CLI test runner."""
    return CliRunner()


@pytest.fixture
def workdir(tmp_path: Path, monkeypatch: pytest.MonkeyPatch):
    """Working directory without any pdc-mesh.yml in reach."""
    monkeypatch.chdir(tmp_path)
    with patch("pdc_mesh.config.Path.home", return_value=tmp_path / "home"):
        yield tmp_path


def _json_block(output: str) -> dict:
    return json.loads(output[output.index("{") : output.rindex("}") + 1])


class TestMain:
    def test_help(self, runner):
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        for command in ("run", "sweep", "check", "bounds", "spectra", "init"):
            assert command in result.output

    def test_version(self, runner):
        result = runner.invoke(main, ["--version"])
        assert result.exit_code == 0
        assert "pdc-mesh" in result.output


class TestRunCommand:
    def test_writes_output(self, runner, workdir):
        out = workdir / "runs" / "quad"
        result = runner.invoke(main, ["run", "--out", str(out), "--seed", "3", *SMALL_RUN])
        assert result.exit_code == 0, result.output
        assert "run 000 seed=3 rounds=4" in result.output
        assert "mean grad_residue=" in result.output
        assert "Output written to:" in result.output
        summary = json.loads((out / "summary.json").read_text())
        assert summary["config"]["solver"]["max_rounds"] == 4
        assert (out / "run_000.csv").exists()

    def test_config_file(self, runner, workdir):
        config = workdir / "experiment.yml"
        config.write_text("repeat: 2\nsolver:\n  max_rounds: 2\n")
        out = workdir / "out"
        result = runner.invoke(main, ["run", "-c", str(config), "-o", str(out)])
        assert result.exit_code == 0, result.output
        assert "run 001" in result.output
        assert (out / "run_001.csv").exists()

    def test_missing_config_file(self, runner, workdir):
        result = runner.invoke(main, ["run", "-c", str(workdir / "absent.yml")])
        assert result.exit_code == 2
        assert "not found" in result.output

    def test_malformed_set(self, runner, workdir):
        result = runner.invoke(main, ["run", "--set", "solver.alpha"])
        assert result.exit_code == 2
        assert "KEY=VALUE" in result.output

    def test_invalid_value(self, runner, workdir):
        result = runner.invoke(main, ["run", "--set", "solver.beta=2"])
        assert result.exit_code == 2
        assert "beta" in result.output

    @patch("pdc_mesh.harness.experiment.run_experiment")
    def test_abort_exits_one(self, mock_run, runner, workdir):
        mock_run.side_effect = SolverAbort(agent=1, round_index=7, field="y")
        result = runner.invoke(main, ["run", "-o", str(workdir / "out")])
        assert result.exit_code == 1
        assert "solver aborted at round 7 (agent 1, non-finite y)" in result.output

    @patch("pdc_mesh.harness.experiment.run_experiment")
    def test_value_error_while_solving_exits_one(self, mock_run, runner, workdir):
        mock_run.side_effect = ValueError("array must not contain infs or NaNs")
        result = runner.invoke(main, ["run", "-o", str(workdir / "out")])
        assert result.exit_code == 1
        assert "infs or NaNs" in result.output

    def test_unbuildable_instance_exits_two(self, runner, workdir):
        result = runner.invoke(
            main,
            [
                "run",
                "-o",
                str(workdir / "out"),
                "--set",
                "instance.kind=vertical_lr",
                "--set",
                "instance.n_features=2",
            ],
        )
        assert result.exit_code == 2
        assert "Cannot build the experiment" in result.output


class TestSweepCommand:
    def test_param_and_values(self, runner, workdir):
        out = workdir / "sweep"
        result = runner.invoke(
            main,
            ["sweep", "-o", str(out), "--param", "alpha", "--values", "0.05,0.1", *SMALL_RUN],
        )
        assert result.exit_code == 0, result.output
        assert "alpha=0.05" in result.output
        assert "alpha=0.1" in result.output
        assert (out / "sweep_alpha.csv").exists()
        assert (out / "alpha_0.05" / "mean_trace.csv").exists()

    def test_needs_param(self, runner, workdir):
        result = runner.invoke(main, ["sweep", *SMALL_RUN])
        assert result.exit_code == 2
        assert "sweep.param" in result.output


class TestCheckCommand:
    def test_spectra_suite(self, runner):
        result = runner.invoke(main, ["check", "spectra"])
        assert result.exit_code == 0, result.output
        report = _json_block(result.output)
        assert report["suite"] == "spectra"
        assert report["passed"] is True

    @patch("pdc_mesh.harness.checks.run_check")
    def test_failure_exits_three(self, mock_check, runner):
        report = CheckReport("bounds")
        report.add(CheckResult("a2 dual error bound", False, value=0.5, bound=0.0))
        mock_check.return_value = report
        result = runner.invoke(main, ["check", "bounds", "--instances", "3"])
        assert result.exit_code == 3
        assert "a2 dual error bound" in result.output
        mock_check.assert_called_once_with("bounds", n_instances=3)

    @patch("pdc_mesh.harness.checks.run_check")
    def test_descent_options(self, mock_check, runner):
        mock_check.return_value = CheckReport("descent")
        result = runner.invoke(main, ["check", "descent", "--alpha", "0.5"])
        assert result.exit_code == 0
        mock_check.assert_called_once_with("descent", alpha=0.5, beta=None)

    def test_unknown_suite(self, runner):
        result = runner.invoke(main, ["check", "everything"])
        assert result.exit_code != 0


class TestBoundsCommand:
    def test_text(self, runner, workdir):
        result = runner.invoke(
            main, ["bounds", "--set", "solver.alpha=0.1", "--set", "solver.beta=1.0"]
        )
        assert result.exit_code == 0, result.output
        assert "sigma1:" in result.output
        assert "beta_max:" in result.output
        assert "verdict (exact_pdc): outside regime" in result.output
        assert "[violated] beta < beta_max" in result.output

    def test_json(self, runner, workdir):
        result = runner.invoke(main, ["bounds", "--format", "json", "--theta-mode", "direct"])
        assert result.exit_code == 0, result.output
        data = _json_block(result.output)
        assert data["sheet"]["theta_source"] == "direct"
        assert "inside" in data["verdict"]


class TestSpectraCommand:
    def test_cycle_text(self, runner):
        result = runner.invoke(main, ["spectra", "--kind", "cycle", "-n", "4"])
        assert result.exit_code == 0, result.output
        assert "n_edges: 4" in result.output
        assert "lambda_max_plus: " in result.output
        assert "connected: True" in result.output

    def test_edge_file_json(self, runner, tmp_path):
        path = tmp_path / "graph.txt"
        write_edge_list(build_cycle(6), path)
        result = runner.invoke(main, ["spectra", "--edges", str(path), "--format", "json"])
        assert result.exit_code == 0, result.output
        data = json.loads(result.output)
        assert data["n_agents"] == 6
        assert data["zero_multiplicity"] == 1
        assert data["sigma_min_minus"] == pytest.approx(1.0)

    def test_needs_a_graph(self, runner):
        result = runner.invoke(main, ["spectra"])
        assert result.exit_code == 2

    def test_too_few_agents_exit_two(self, runner):
        result = runner.invoke(main, ["spectra", "--kind", "cycle", "-n", "2"])
        assert result.exit_code == 2
        assert "--agents or --edges" in result.output


class TestInitCommand:
    def test_creates_file(self, runner, tmp_path):
        output = tmp_path / "pdc-mesh.yml"
        result = runner.invoke(main, ["init", "-o", str(output)])
        assert result.exit_code == 0
        assert "Config file generated" in result.output
        assert "solver:" in output.read_text()

    def test_existing_file(self, runner, tmp_path):
        output = tmp_path / "pdc-mesh.yml"
        output.write_text("repeat: 1\n")
        result = runner.invoke(main, ["init", "-o", str(output)])
        assert result.exit_code == 2
        assert "already exists" in result.output
        assert output.read_text() == "repeat: 1\n"
