"""Shared fixtures: small instances, graphs and solver settings."""

from __future__ import annotations

import numpy as np
import pytest

from pdc_mesh.engine.state import SolverConfig
from pdc_mesh.problems.coupled import CoupledProblem
from pdc_mesh.problems.objectives import QuadraticObjective
from pdc_mesh.problems.quadratic import build_quadratic_instance
from pdc_mesh.topology.graph import Graph, build_cycle

PRACTICAL = {"p": 1.0, "rho": 1.0, "alpha": 0.1, "beta": 0.5}


def scalar_problem(n_agents: int = 2, rhs: float = 0.0) -> CoupledProblem:
    """``f_i(x) = x^2 / 2`` with ``B_i = [1]`` and a scalar right-hand side."""
    return CoupledProblem(
        objectives=tuple(QuadraticObjective(np.eye(1), np.zeros(1)) for _ in range(n_agents)),
        coupling=tuple(np.ones((1, 1)) for _ in range(n_agents)),
        rhs=np.array([rhs]),
    )


@pytest.fixture
def pair_graph() -> Graph:
    return Graph.from_edges(2, [(0, 1)])


@pytest.fixture
def cycle4() -> Graph:
    return build_cycle(4)


@pytest.fixture
def pair_problem() -> CoupledProblem:
    return scalar_problem()


@pytest.fixture
def quad_problem() -> CoupledProblem:
    """Strongly convex 4-agent instance with n=3 and M=2."""
    return build_quadratic_instance(0, 4, 3, 2, 1.0)


@pytest.fixture
def practical_config() -> SolverConfig:
    return SolverConfig(max_rounds=50, subsolver_tol=1e-10, **PRACTICAL)
