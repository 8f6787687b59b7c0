"""Command-line interface for pdc-mesh."""

from __future__ import annotations

import json
import logging
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Optional

import click

from pdc_mesh import __version__
from pdc_mesh.config import ExperimentConfig, load_config
from pdc_mesh.errors import (
    ConfigError,
    DisconnectedGraphError,
    PdcMeshError,
    RankDeficientCouplingError,
    SolverAbort,
)
from pdc_mesh.storage.trace_writer import format_value

EXIT_ABORT = 1
EXIT_CONFIG = 2
EXIT_CHECK = 3

INPUT_ERRORS = (ConfigError, DisconnectedGraphError, RankDeficientCouplingError, FileNotFoundError)


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Map library errors to the documented exit codes.

    Input faults exit with 2. Any other library error, and a plain
    ``ValueError`` raised while solving, exits with 1.
    """
    try:
        yield
    except SolverAbort as e:
        click.echo(
            f"Error: solver aborted at round {e.round_index} "
            f"(agent {e.agent}, non-finite {e.field})",
            err=True,
        )
        raise SystemExit(EXIT_ABORT) from None
    except INPUT_ERRORS as e:
        click.echo(f"Error: {e}", err=True)
        raise SystemExit(EXIT_CONFIG) from None
    except (PdcMeshError, ValueError) as e:
        click.echo(f"Error: {e}", err=True)
        raise SystemExit(EXIT_ABORT) from None


@contextmanager
def _reading_inputs() -> Iterator[None]:
    """Report a plain ``ValueError`` raised while reading inputs as a ConfigError."""
    try:
        yield
    except PdcMeshError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from e


def _parse_sets(pairs: tuple[str, ...]) -> dict[str, str]:
    overrides = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--set expects KEY=VALUE, got {pair!r}")
        overrides[key.strip()] = value.strip()
    return overrides


def _load(
    config_path: Optional[str],
    out: Optional[str] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    sets: tuple[str, ...] = (),
    **extra: Any,
) -> ExperimentConfig:
    overrides: dict[str, Any] = {"output_dir": out, "seed": seed, "threads": threads}
    overrides.update(extra)
    overrides.update(_parse_sets(sets))
    return load_config(config_path, overrides)


def _common_options(func: Any) -> Any:
    """``--config``, ``--out``, ``--seed``, ``--threads`` and ``--set``."""
    options = [
        click.option(
            "--config",
            "-c",
            "config_path",
            type=click.Path(),
            default=None,
            help="Config file (YAML or JSON). Defaults to ./pdc-mesh.yml.",
        ),
        click.option(
            "--out",
            "-o",
            type=click.Path(),
            default=None,
            help="Output directory; overrides output_dir.",
        ),
        click.option("--seed", type=int, default=None, help="Base seed of the initial points."),
        click.option(
            "--threads",
            type=int,
            default=None,
            help="Worker threads per stage (env: PDC_MESH_THREADS).",
        ),
        click.option(
            "--set",
            "sets",
            multiple=True,
            metavar="KEY=VALUE",
            help="Override a config key, e.g. solver.alpha=0.1. Repeatable.",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@click.group()
@click.version_option(version=__version__, prog_name="pdc-mesh")
@click.option("--verbose", "-v", count=True, help="Log progress (-v) or details (-vv) to stderr.")
def main(verbose: int) -> None:
    """pdc-mesh - decentralized optimization over agent graphs."""
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@main.command("run")
@_common_options
def run_cmd(
    config_path: Optional[str],
    out: Optional[str],
    seed: Optional[int],
    threads: Optional[int],
    sets: tuple[str, ...],
) -> None:
    """Run the configured experiment.

    Writes one trace CSV and final-state snapshot per repeat, the mean trace
    and summary.json to the output directory.

    Examples:
        pdc-mesh run --config pdc-mesh.yml --out runs/quad
        pdc-mesh run --set instance.kind=consensus --set solver.max_rounds=200
    """
    from pdc_mesh.harness.experiment import run_experiment

    with _exit_codes():
        config = _load(config_path, out, seed, threads, sets)
        result = run_experiment(config, Path(config.output_dir))

    for index, summary in enumerate(result.summary["runs"]):
        click.echo(
            f"run {index:03d} seed={summary['seed']} rounds={summary['rounds']} "
            f"grad_residue={format_value(summary['grad_residue'])} "
            f"infeasibility={format_value(summary['infeasibility'])}"
        )
    final = result.summary["mean_final"]
    click.echo(
        f"mean grad_residue={format_value(final['grad_residue'])} "
        f"infeasibility={format_value(final['infeasibility'])}"
    )
    click.echo(f"Output written to: {result.output_dir}")


@main.command()
@_common_options
@click.option("--param", default=None, help="Parameter to sweep (alpha, beta, p, rho, zeta).")
@click.option("--values", default=None, help="Comma-separated sweep values.")
def sweep(
    config_path: Optional[str],
    out: Optional[str],
    seed: Optional[int],
    threads: Optional[int],
    sets: tuple[str, ...],
    param: Optional[str],
    values: Optional[str],
) -> None:
    """Run the experiment once per sweep value.

    Examples:
        pdc-mesh sweep --param alpha --values 1e-4,1e-3,1e-2,1e-1
    """
    from pdc_mesh.harness.experiment import run_sweep

    with _exit_codes():
        config = _load(
            config_path, out, seed, threads, sets, **{"sweep.param": param, "sweep.values": values}
        )
        if config.sweep.param is None:
            raise ConfigError("sweep needs sweep.param (or --param)")
        result = run_sweep(config, Path(config.output_dir))

    for value, point in result.points.items():
        final = point.summary["mean_final"]
        click.echo(
            f"{result.param}={format_value(value)} "
            f"grad_residue={format_value(final['grad_residue'])} "
            f"infeasibility={format_value(final['infeasibility'])}"
        )
    click.echo(f"Output written to: {result.output_dir}")


@main.command()
@click.argument("suite", type=click.Choice(["spectra", "bounds", "oracles", "descent", "rate"]))
@click.option("--alpha", type=float, default=None, help="Dual step of the descent suite.")
@click.option("--beta", type=float, default=None, help="Center step of the descent suite.")
@click.option("--instances", type=int, default=None, help="Random instances (bounds, oracles).")
def check(
    suite: str, alpha: Optional[float], beta: Optional[float], instances: Optional[int]
) -> None:
    """Run a verification suite and print a JSON report.

    Exits with status 3 if any check fails. Descent runs outside the proven
    parameter regime are reported as warnings.

    Examples:
        pdc-mesh check spectra
        pdc-mesh check descent --alpha 0.5
    """
    from pdc_mesh.harness.checks import run_check

    options: dict[str, Any] = {}
    if suite == "descent":
        options.update(alpha=alpha, beta=beta)
    if instances is not None and suite in ("bounds", "oracles"):
        options["n_instances"] = instances

    with _exit_codes():
        report = run_check(suite, **options)

    click.echo(json.dumps(report.to_dict(), indent=2, default=format_value))
    if not report.passed:
        names = ", ".join(r.name for r in report.failures())
        click.echo(f"Error: {suite} checks failed: {names}", err=True)
        raise SystemExit(EXIT_CHECK)


@main.command()
@_common_options
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.option(
    "--theta-mode",
    type=click.Choice(["auto", "direct", "bound"]),
    default="auto",
    help="Hoffman constants from direct estimates, closed-form bounds, or both.",
)
def bounds(
    config_path: Optional[str],
    out: Optional[str],
    seed: Optional[int],
    threads: Optional[int],
    sets: tuple[str, ...],
    fmt: str,
    theta_mode: str,
) -> None:
    """Print the constant sheet and regime verdict of the configured instance.

    Uses solver.p, solver.rho, solver.alpha, solver.beta and solver.zeta.

    Examples:
        pdc-mesh bounds --set solver.alpha=0.001 --format json
    """
    from pdc_mesh.harness.builders import build_experiment
    from pdc_mesh.theory.regime import build_constant_sheet, check_regime

    with _exit_codes():
        config = _load(config_path, out, seed, threads, sets)
        graph, built = build_experiment(config)
        solver = config.solver.to_solver_config(config.seed)
        sheet = build_constant_sheet(
            built.problem,
            graph,
            solver.p,
            solver.rho,
            zeta=solver.zeta,
            theta_mode=theta_mode,
            alpha=solver.alpha,
            beta=solver.beta,
        )
        verdict = check_regime(sheet, solver)

    if fmt == "json":
        click.echo(
            json.dumps(
                {"sheet": sheet.to_dict(), "verdict": verdict.to_dict()},
                indent=2,
                default=format_value,
            )
        )
        return

    for key, value in sheet.to_dict().items():
        if key == "notes":
            continue
        click.echo(f"{key}: {format_value(value)}")
    for note in sheet.notes:
        click.echo(f"note: {note}")
    status = "inside regime" if verdict.inside else "outside regime"
    click.echo(f"\nverdict ({verdict.mode}): {status}")
    for condition in verdict.conditions:
        mark = "ok" if condition.satisfied else "violated"
        click.echo(
            f"  [{mark}] {condition.name}: {format_value(condition.value)} "
            f"vs {format_value(condition.bound)}"
        )


@main.command()
@click.option("--edges", type=click.Path(exists=True), default=None, help="Edge-list file.")
@click.option("--kind", type=click.Choice(["cycle", "random"]), default="cycle")
@click.option("--agents", "-n", type=int, default=None, help="Number of agents.")
@click.option("--edge-prob", type=float, default=0.3, help="Edge probability (random).")
@click.option("--graph-seed", type=int, default=0, help="Seed of the random graph.")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def spectra(
    edges: Optional[str],
    kind: str,
    agents: Optional[int],
    edge_prob: float,
    graph_seed: int,
    fmt: str,
) -> None:
    """Print the Laplacian spectra of a graph.

    Examples:
        pdc-mesh spectra --kind cycle -n 10
        pdc-mesh spectra --edges graph.txt --format json
    """
    from pdc_mesh.topology.graph import build_cycle, build_random_connected, read_edge_list
    from pdc_mesh.topology.matrices import derive_matrices, spectral_summary

    with _exit_codes(), _reading_inputs():
        if edges is not None:
            graph = read_edge_list(Path(edges))
        elif agents is None:
            raise ConfigError("spectra needs --agents or --edges")
        elif kind == "cycle":
            graph = build_cycle(agents)
        else:
            graph = build_random_connected(agents, edge_prob, graph_seed)
        summary = spectral_summary(derive_matrices(graph))

    data: dict[str, Any] = {"n_agents": graph.n_agents, "n_edges": graph.n_edges}
    data.update(summary.to_dict())
    if fmt == "json":
        click.echo(json.dumps(data, indent=2, default=format_value))
        return
    for key, value in data.items():
        click.echo(f"{key}: {format_value(value)}")


@main.command()
@click.option(
    "--output",
    "-o",
    type=click.Path(),
    default="./pdc-mesh.yml",
    help="Output path for the config file.",
)
def init(output: str) -> None:
    """Generate a default pdc-mesh.yml configuration file."""
    from pdc_mesh.config import generate_default_config

    output_path = Path(output)
    if output_path.exists():
        click.echo(f"Config file already exists: {output_path}", err=True)
        raise SystemExit(EXIT_CONFIG)

    output_path.write_text(generate_default_config(), encoding="utf-8")
    click.echo(f"Config file generated: {output_path}")


if __name__ == "__main__":
    main()
