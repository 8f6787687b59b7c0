"""Experiment configuration for pdc-mesh.

Supports loading from pdc-mesh.yml files (YAML or JSON), environment
variables, and CLI arguments with a clear precedence order:
CLI args > env vars > config file > defaults.

Sections may be nested or written as flat dotted keys
(``solver.alpha: 0.01``); both forms can be mixed in one file.
"""

from __future__ import annotations

import contextlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

from pdc_mesh.engine.state import INIT_MODES, MODES, SolverConfig
from pdc_mesh.errors import ConfigError

logger = logging.getLogger(__name__)

INSTANCE_KINDS: tuple[str, ...] = ("quadratic", "consensus", "vertical_lr", "vertical_nn")
GRAPH_KINDS: tuple[str, ...] = ("cycle", "random", "file")
SWEEP_PARAMS: tuple[str, ...] = ("alpha", "beta", "p", "rho", "zeta")

# Desk-scale instances for the logistic-regression and neural-network studies.
PRESETS: dict[str, dict[str, Any]] = {
    "lr_desk": {
        "kind": "vertical_lr",
        "n_agents": 25,
        "n_features": 500,
        "n_samples": 100,
        "lam": 0.01,
        "xi": 0.5,
    },
    "nn_desk": {
        "kind": "vertical_nn",
        "n_agents": 8,
        "n_features": 32,
        "n_samples": 200,
        "n_classes": 3,
        "hidden": 8,
    },
}

_OPTIONAL_FLOATS = frozenset({"zeta"})


@dataclass
class InstanceConfig:
    """Problem instance settings.

    Attributes:
        kind: quadratic | consensus | vertical_lr | vertical_nn.
        preset: lr_desk | nn_desk; fills the fields below before explicit keys.
        seed: Seed of the synthetic instance (independent of the run seeds).
        n_agents: Number of agents N.
        n_local: Local dimension of quadratic and consensus agents.
        m_constraints: Coupling rows M of quadratic instances.
        convexity_shift: Smallest Hessian eigenvalue of quadratic agents.
        n_samples: Rows of synthetic vertical datasets.
        n_features: Total features, split evenly over the agents.
        n_classes: Classes of the NN dataset.
        hidden: Hidden width K of the NN.
        lam: Weight of the nonconvex LR penalty.
        xi: Sharpness of the nonconvex LR penalty.
        separation: Class separation of synthetic data.
        test_fraction: Held-out share for NN test accuracy.
        data_file: CSV dataset replacing the synthetic one.
        partition_file: Feature partition of ``data_file``.
    """

    kind: str = "quadratic"
    preset: Optional[str] = None
    seed: int = 0
    n_agents: int = 4
    n_local: int = 3
    m_constraints: int = 3
    convexity_shift: float = 1.0
    n_samples: int = 100
    n_features: int = 20
    n_classes: int = 2
    hidden: int = 8
    lam: float = 0.01
    xi: float = 0.5
    separation: float = 1.0
    test_fraction: float = 0.25
    data_file: Optional[str] = None
    partition_file: Optional[str] = None


@dataclass
class GraphConfig:
    """Agent graph settings; the agent count comes from the instance."""

    kind: str = "cycle"  # cycle | random | file
    edge_prob: float = 0.3
    seed: int = 0
    path: Optional[str] = None


@dataclass
class SolverSettings:
    """Solver parameters shared by every repeat (the seed is per repeat)."""

    mode: str = "exact_pdc"
    p: float = 0.01
    alpha: float = 0.01
    beta: float = 0.1
    rho: float = 0.01
    zeta: Optional[float] = None
    subsolver_tol: float = 1e-5
    inner_max_iters: int = 10_000
    max_rounds: int = 1000
    record_phi: bool = False
    tol_residue: float = 0.0
    tol_infeasibility: float = 0.0
    init: str = "uniform"
    threads: int = 1
    guard: bool = False

    def to_solver_config(self, seed: int, **changes: Any) -> SolverConfig:
        """SolverConfig for one run, with optional parameter overrides."""
        values = asdict(self)
        values.update(changes)
        return SolverConfig(seed=seed, **values)


@dataclass
class SweepConfig:
    param: Optional[str] = None
    values: list[float] = field(default_factory=list)


@dataclass
class ExperimentConfig:
    """Main configuration of an experiment.

    Attributes:
        instance: Problem instance settings.
        graph: Agent graph settings.
        solver: Solver parameters.
        sweep: Optional parameter sweep.
        repeat: Number of runs; run k uses seed ``seed + k``.
        seed: Base seed of the initial points.
        output_dir: Directory for traces and summaries.
    """

    instance: InstanceConfig = field(default_factory=InstanceConfig)
    graph: GraphConfig = field(default_factory=GraphConfig)
    solver: SolverSettings = field(default_factory=SolverSettings)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    repeat: int = 1
    seed: int = 0
    output_dir: str = "runs"

    def run_seeds(self) -> list[int]:
        return [self.seed + k for k in range(self.repeat)]

    def validate(self) -> None:
        """Raise ConfigError for invalid settings."""
        if self.instance.kind not in INSTANCE_KINDS:
            raise ConfigError(
                f"instance.kind must be one of {INSTANCE_KINDS}, got {self.instance.kind!r}"
            )
        if self.instance.n_agents < 2:
            raise ConfigError("instance.n_agents must be >= 2")
        if self.graph.kind not in GRAPH_KINDS:
            raise ConfigError(f"graph.kind must be one of {GRAPH_KINDS}, got {self.graph.kind!r}")
        if self.graph.kind == "file" and not self.graph.path:
            raise ConfigError("graph.kind 'file' needs graph.path")
        if self.graph.kind == "cycle" and self.instance.n_agents < 3:
            raise ConfigError("A cycle needs at least 3 agents")
        if self.repeat < 1:
            raise ConfigError(f"repeat must be >= 1, got {self.repeat}")
        if self.solver.mode not in MODES:
            raise ConfigError(f"solver.mode must be one of {MODES}, got {self.solver.mode!r}")
        if self.solver.init not in INIT_MODES:
            raise ConfigError(f"solver.init must be one of {INIT_MODES}")
        if self.sweep.param is not None:
            if self.sweep.param not in SWEEP_PARAMS:
                raise ConfigError(
                    f"sweep.param must be one of {SWEEP_PARAMS}, got {self.sweep.param!r}"
                )
            if not self.sweep.values:
                raise ConfigError("sweep.values must not be empty")
            if any(v <= 0 for v in self.sweep.values):
                raise ConfigError("sweep.values must be positive")
        # Remaining solver checks run at every sweep point.
        points = [{self.sweep.param: v} for v in self.sweep.values] if self.sweep.param else [{}]
        for changes in points:
            self.solver.to_solver_config(self.seed, **changes).validate()

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _find_config_file(start_dir: Path | None = None) -> Path | None:
    """Search for pdc-mesh.yml in standard locations.

    Search order:
    1. ./pdc-mesh.yml (current or specified directory)
    2. ~/.pdc-mesh.yml (user home)
    """
    if start_dir is None:
        start_dir = Path.cwd()

    local_config = start_dir / "pdc-mesh.yml"
    if local_config.exists():
        return local_config

    home_config = Path.home() / ".pdc-mesh.yml"
    if home_config.exists():
        return home_config

    return None


def _load_yaml_file(path: Path) -> dict[str, Any]:
    """Load a YAML (or JSON) config file into a dictionary."""
    if path.suffix.lower() == ".json":
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
        return data if isinstance(data, dict) else {}

    try:
        import yaml
    except ImportError as err:
        raise ImportError(
            "PyYAML is required for config file support. Install with: pip install pyyaml"
        ) from err

    with open(path, encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as err:
            raise ConfigError(f"Cannot parse {path}: {err}") from err

    return data if isinstance(data, dict) else {}


def _expand_dotted(data: dict[str, Any]) -> dict[str, Any]:
    """Turn ``{"solver.alpha": 0.1}`` into ``{"solver": {"alpha": 0.1}}``."""
    expanded: dict[str, Any] = {}
    for key, value in data.items():
        if isinstance(value, dict):
            value = _expand_dotted(value)
        head, _, rest = str(key).partition(".")
        if rest:
            value = _expand_dotted({rest: value})
        if isinstance(value, dict) and isinstance(expanded.get(head), dict):
            expanded[head].update(value)
        else:
            expanded[head] = value
    return expanded


def _coerce(name: str, current: Any, value: Any) -> Any:
    """Convert a raw value to the type of the field's current value."""
    if value is None:
        return None
    try:
        if isinstance(current, bool):
            if isinstance(value, str):
                return value.strip().lower() in ("1", "true", "yes", "on")
            return bool(value)
        if isinstance(current, int):
            return int(value)
        if isinstance(current, float) or name in _OPTIONAL_FLOATS:
            return float(value)
        if isinstance(current, list):
            items = value if isinstance(value, (list, tuple)) else str(value).split(",")
            return [float(v) for v in items]
    except (TypeError, ValueError) as err:
        raise ConfigError(f"Invalid value for {name}: {value!r}") from err
    return str(value)


def _fill(target: Any, data: dict[str, Any], section: str) -> None:
    names = {f.name for f in fields(target)}
    for key, value in data.items():
        if key not in names:
            logger.warning("Ignoring unknown config key %s%s", section, key)
            continue
        setattr(target, key, _coerce(key, getattr(target, key), value))


def _dict_to_config(data: dict[str, Any]) -> ExperimentConfig:
    """Convert a (possibly dotted) dictionary to ExperimentConfig."""
    data = _expand_dotted(data)
    config = ExperimentConfig()

    instance_data = dict(data.pop("instance", None) or {})
    preset = instance_data.get("preset")
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"Unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        instance_data = {**PRESETS[preset], **instance_data}
        if preset == "lr_desk":
            config.graph.kind = "random"
            config.graph.edge_prob = 0.2
    _fill(config.instance, instance_data, "instance.")

    for section in ("graph", "solver", "sweep"):
        section_data = data.pop(section, None) or {}
        if not isinstance(section_data, dict):
            raise ConfigError(f"Section {section!r} must be a mapping")
        _fill(getattr(config, section), section_data, f"{section}.")

    _fill(config, {k: v for k, v in data.items() if not isinstance(v, dict)}, "")
    for key, value in data.items():
        if isinstance(value, dict):
            logger.warning("Ignoring unknown config section %s", key)
    return config


def _apply_env_vars(config: ExperimentConfig) -> ExperimentConfig:
    """Override config values from PDC_MESH_* environment variables.

    Supported env vars:
        PDC_MESH_THREADS
        PDC_MESH_SEED
        PDC_MESH_OUTPUT_DIR
    """
    if val := os.environ.get("PDC_MESH_OUTPUT_DIR"):
        config.output_dir = val
    if val := os.environ.get("PDC_MESH_THREADS"):
        with contextlib.suppress(ValueError):
            config.solver.threads = int(val)
    if val := os.environ.get("PDC_MESH_SEED"):
        with contextlib.suppress(ValueError):
            config.seed = int(val)
    return config


def _apply_override(config: ExperimentConfig, key: str, value: Any) -> None:
    if key == "threads":
        key = "solver.threads"
    target: Any = config
    *path, name = key.split(".")
    for part in path:
        target = getattr(target, part, None)
        if target is None:
            logger.warning("Ignoring unknown override %s", key)
            return
    if not hasattr(target, name):
        logger.warning("Ignoring unknown override %s", key)
        return
    setattr(target, name, _coerce(name, getattr(target, name), value))


def load_config(
    config_path: str | None = None,
    cli_overrides: dict[str, Any] | None = None,
) -> ExperimentConfig:
    """Load configuration with full precedence chain.

    Precedence (highest to lowest):
    1. CLI arguments (cli_overrides; dotted keys reach nested sections)
    2. Environment variables (PDC_MESH_*)
    3. Config file (pdc-mesh.yml)
    4. Defaults

    Args:
        config_path: Explicit path to config file. If None, auto-discovers.
        cli_overrides: Dictionary of CLI argument overrides.

    Returns:
        Fully resolved and validated ExperimentConfig.

    Raises:
        ConfigError: If an explicit path is missing or a value is invalid.
    """
    config = ExperimentConfig()

    path = Path(config_path) if config_path else _find_config_file()
    if config_path and (path is None or not path.exists()):
        raise ConfigError(f"Config file not found: {config_path}")
    if path and path.exists():
        logger.info("Loading config from %s", path)
        config = _dict_to_config(_load_yaml_file(path))

    config = _apply_env_vars(config)

    if cli_overrides:
        for key, value in cli_overrides.items():
            if value is not None:
                _apply_override(config, key, value)

    config.validate()
    return config


def generate_default_config() -> str:
    """Generate default pdc-mesh.yml content.

    Returns:
        YAML string with default configuration and comments.
    """
    return """# pdc-mesh experiment configuration
# Place this file as ./pdc-mesh.yml or ~/.pdc-mesh.yml
# Sections may also be written with dotted keys, e.g. "solver.alpha: 0.01".

instance:
  kind: quadratic        # quadratic | consensus | vertical_lr | vertical_nn
  # preset: lr_desk      # lr_desk | nn_desk fill the sizes below
  seed: 0                # seed of the synthetic instance
  n_agents: 4
  n_local: 3             # local dimension (quadratic, consensus)
  m_constraints: 3       # coupling rows (quadratic)
  convexity_shift: 1.0   # smallest Hessian eigenvalue (quadratic, consensus)
  n_samples: 100         # vertical datasets
  n_features: 20
  n_classes: 2
  hidden: 8              # NN hidden width
  lam: 0.01              # LR penalty weight
  xi: 0.5                # LR penalty sharpness
  test_fraction: 0.25    # NN held-out share
  # data_file: data.csv
  # partition_file: partition.txt

graph:
  kind: cycle            # cycle | random | file
  edge_prob: 0.3         # random graphs
  seed: 0
  # path: edges.txt      # file graphs

solver:
  mode: exact_pdc        # exact_pdc | inexact_ipdc
  p: 0.01
  alpha: 0.01
  beta: 0.1
  rho: 0.01
  # zeta: 0.1            # required for inexact_ipdc
  subsolver_tol: 1.0e-5
  inner_max_iters: 10000
  max_rounds: 1000
  record_phi: false      # quadratic instances only
  tol_residue: 0.0       # early stop when both tolerances hold (0 disables)
  tol_infeasibility: 0.0
  init: uniform          # uniform | zeros
  threads: 1
  guard: false           # audit neighbor-only reads

sweep:
  # param: alpha         # alpha | beta | p | rho | zeta
  values: []

repeat: 1                # run k uses seed + k
seed: 0
output_dir: runs
"""
