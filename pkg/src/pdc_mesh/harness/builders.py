"""Graph and problem instances built from an :class:`ExperimentConfig`."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from pdc_mesh.config import ExperimentConfig, GraphConfig, InstanceConfig
from pdc_mesh.errors import ConfigError, PdcMeshError
from pdc_mesh.problems.consensus import build_consensus_instance
from pdc_mesh.problems.coupled import CoupledProblem
from pdc_mesh.problems.datasets import (
    VerticalDataset,
    read_dataset_csv,
    read_partition,
    synthesize_vertical_dataset,
)
from pdc_mesh.problems.quadratic import build_quadratic_instance
from pdc_mesh.problems.vertical import build_vertical_lr, build_vertical_nn
from pdc_mesh.topology.graph import Graph, build_cycle, build_random_connected, read_edge_list

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BuiltInstance:
    """A problem plus the data it was built from.

    Attributes:
        problem: The coupled problem handed to the solver.
        train: Training data of vertical instances.
        test: Held-out data of the network instance.
    """

    problem: CoupledProblem
    train: Optional[VerticalDataset] = None
    test: Optional[VerticalDataset] = None


def build_graph(graph_config: GraphConfig, n_agents: int) -> Graph:
    """Cycle, seeded random graph, or edge-list file.

    Raises:
        ConfigError: If a file graph's agent count differs from ``n_agents``.
    """
    if graph_config.kind == "cycle":
        return build_cycle(n_agents)
    if graph_config.kind == "random":
        return build_random_connected(n_agents, graph_config.edge_prob, graph_config.seed)
    if graph_config.path is None:
        raise ConfigError("graph.kind 'file' needs graph.path")
    graph = read_edge_list(Path(graph_config.path))
    if graph.n_agents != n_agents:
        raise ConfigError(
            f"{graph_config.path} has {graph.n_agents} agents, instance has {n_agents}"
        )
    return graph


def _load_dataset(settings: InstanceConfig, one_hot: bool) -> VerticalDataset:
    if settings.data_file:
        partition = None
        if settings.partition_file:
            partition = read_partition(Path(settings.partition_file))
        data = read_dataset_csv(
            Path(settings.data_file),
            partition=partition,
            n_agents=settings.n_agents,
            one_hot=one_hot,
        )
        if data.n_agents != settings.n_agents:
            raise ConfigError(
                f"Partition has {data.n_agents} agents, instance.n_agents is {settings.n_agents}"
            )
        return data
    return synthesize_vertical_dataset(
        settings.n_samples,
        settings.n_features,
        settings.n_agents,
        settings.seed,
        n_classes=settings.n_classes if one_hot else 2,
        one_hot=one_hot,
        separation=settings.separation,
    )


def build_instance(config: ExperimentConfig, graph: Graph) -> BuiltInstance:
    """Build the configured problem instance on ``graph``.

    Quadratic and consensus agents share ``instance.seed``; vertical
    instances draw synthetic data from it unless ``instance.data_file`` is
    set. The network instance holds out ``test_fraction`` of the rows.
    """
    settings = config.instance
    kind = settings.kind
    logger.debug("Building %s instance with %d agents", kind, settings.n_agents)

    if kind == "quadratic":
        problem = build_quadratic_instance(
            settings.seed,
            settings.n_agents,
            settings.n_local,
            settings.m_constraints,
            settings.convexity_shift,
        )
        return BuiltInstance(problem)

    if kind == "consensus":
        local = build_quadratic_instance(
            settings.seed, settings.n_agents, settings.n_local, 1, settings.convexity_shift
        )
        return BuiltInstance(build_consensus_instance(local.objectives, graph))

    if kind == "vertical_lr":
        data = _load_dataset(settings, one_hot=False)
        return BuiltInstance(build_vertical_lr(data, settings.lam, settings.xi), train=data)

    if kind == "vertical_nn":
        data = _load_dataset(settings, one_hot=True)
        train, test = data.train_test_split(settings.test_fraction, settings.seed)
        problem = build_vertical_nn(train, settings.hidden, seed=settings.seed)
        return BuiltInstance(problem, train=train, test=test)

    raise ConfigError(f"Unknown instance kind {kind!r}")


def build_experiment(config: ExperimentConfig) -> tuple[Graph, BuiltInstance]:
    """Build the graph and the problem instance of ``config``.

    Raises:
        ConfigError: Also for plain ``ValueError``s raised by the graph,
            dataset and problem builders.
    """
    try:
        graph = build_graph(config.graph, config.instance.n_agents)
        return graph, build_instance(config, graph)
    except PdcMeshError:
        raise
    except ValueError as err:
        raise ConfigError(f"Cannot build the experiment: {err}") from err
