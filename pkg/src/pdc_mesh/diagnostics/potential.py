"""Potential-function diagnostics on quadratic instances.

With ``f_i(x) = 0.5 x^T Q_i x + c_i^T x`` and ``H_i = Q_i + p I`` (positive
definite when ``p > -gamma^-``), the local dual function is

    phi_i(y, z) = min_x f_i(x) + (p/2) ||x - z||^2 + y^T B_i x
                = -0.5 b^T H_i^{-1} b + (p/2) ||z||^2,   b = c_i - p z + B_i^T y,

so the augmented Lagrangian in y is a concave quadratic and its maximum
``d(mu; z)`` comes from one dense solve.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, block_diag, cho_factor, cho_solve, lstsq

from pdc_mesh.errors import SingularSystemError
from pdc_mesh.problems.coupled import CoupledProblem
from pdc_mesh.problems.objectives import quadratic_terms
from pdc_mesh.topology.graph import Graph
from pdc_mesh.topology.matrices import derive_matrices

logger = logging.getLogger(__name__)

DUAL_RESIDUAL_RTOL = 1e-8


class ShadowDual:
    """Explicit edge dual ``mu`` advanced by ``mu += alpha A y``.

    ``p_blocks()`` reproduces the agents' accumulated ``p_i = A_i^T mu``.
    """

    def __init__(self, graph: Graph, block_size: int) -> None:
        self.graph = graph
        self.mu = np.zeros((graph.n_edges, block_size))

    def advance(self, y_blocks: Sequence[np.ndarray], alpha: float) -> None:
        for e, (i, j) in enumerate(self.graph.edges):
            self.mu[e] += alpha * (y_blocks[i] - y_blocks[j])

    def p_blocks(self) -> list[np.ndarray]:
        p = [np.zeros(self.mu.shape[1]) for _ in range(self.graph.n_agents)]
        for e, (i, j) in enumerate(self.graph.edges):
            p[i] += self.mu[e]
            p[j] -= self.mu[e]
        return p

    def snapshot(self) -> np.ndarray:
        return self.mu.copy()


@dataclass(frozen=True)
class PhiState:
    """Snapshot needed to evaluate the potential at round r."""

    x: Sequence[np.ndarray]
    y: Sequence[np.ndarray]
    y_prev: Sequence[np.ndarray]
    mu: np.ndarray
    z: Sequence[np.ndarray]


@dataclass(frozen=True)
class PhiComponents:
    g_value: float
    g_tilde: float
    l_rho: float
    dual_d: float
    phi: float


def _edge_terms(graph: Graph, mu: np.ndarray, y: Sequence[np.ndarray]) -> tuple[float, float]:
    """``(mu^T A y, ||A y||^2)``."""
    coupling = 0.0
    gap = 0.0
    for e, (i, j) in enumerate(graph.edges):
        d = y[i] - y[j]
        coupling += float(mu[e] @ d)
        gap += float(d @ d)
    return coupling, gap


def _signless_norm(graph: Graph, v: Sequence[np.ndarray]) -> float:
    """``v^T L^+ v = sum over edges of ||v_i + v_j||^2``."""
    total = 0.0
    for i, j in graph.edges:
        s = v[i] + v[j]
        total += float(s @ s)
    return total


class QuadraticDualModel:
    """Per-agent factorizations of ``H_i = Q_i + p I``."""

    def __init__(self, problem: CoupledProblem, p: float) -> None:
        if not problem.is_quadratic:
            raise TypeError("Potential diagnostics need a quadratic instance")
        self.problem = problem
        self.p = p
        self._terms = [quadratic_terms(obj) for obj in problem.objectives]
        self._factors = []
        for i, (q, _) in enumerate(self._terms):
            h = q + p * np.eye(q.shape[0])
            try:
                self._factors.append(cho_factor(h))
            except LinAlgError as err:
                raise SingularSystemError(
                    f"Q_{i} + pI is not positive definite; need p > -gamma_minus",
                    float(np.linalg.cond(h)),
                ) from err

    def _b(self, i: int, y: np.ndarray, z: np.ndarray) -> np.ndarray:
        _, c = self._terms[i]
        return c - self.p * z + self.problem.coupling[i].T @ y

    def phi_local(self, i: int, y: np.ndarray, z: np.ndarray) -> float:
        b = self._b(i, y, z)
        return float(-0.5 * b @ cho_solve(self._factors[i], b) + 0.5 * self.p * (z @ z))

    def primal_minimizer(self, i: int, y: np.ndarray, z: np.ndarray) -> np.ndarray:
        return -cho_solve(self._factors[i], self._b(i, y, z))

    def dual_quadratic(
        self, graph: Graph, mu: np.ndarray, z: Sequence[np.ndarray], rho: float
    ) -> tuple[np.ndarray, np.ndarray]:
        """``(P, h)`` with ``L_rho(y) = -0.5 y^T P y + h^T y + const``."""
        problem = self.problem
        m = problem.m_constraints
        share = problem.rhs / problem.n_agents
        blocks = []
        linear = []
        p_from_mu = ShadowDual(graph, m)
        p_from_mu.mu = np.asarray(mu, dtype=float).reshape(graph.n_edges, m)
        p_blocks = p_from_mu.p_blocks()
        for i, b in enumerate(problem.coupling):
            _, c = self._terms[i]
            blocks.append(b @ cho_solve(self._factors[i], b.T))
            shifted = c - self.p * z[i]
            linear.append(-b @ cho_solve(self._factors[i], shifted) - share - p_blocks[i])

        signed = derive_matrices(graph, m).expanded_signed_laplacian.toarray()
        return block_diag(*blocks) + rho * signed, np.concatenate(linear)


def augmented_lagrangian(
    model: QuadraticDualModel,
    graph: Graph,
    y: Sequence[np.ndarray],
    mu: np.ndarray,
    z: Sequence[np.ndarray],
    rho: float,
) -> float:
    """``sum_i (phi_i(y_i, z_i) - y_i^T q/N) - mu^T A y - (rho/2) ||A y||^2``."""
    share = model.problem.rhs / model.problem.n_agents
    local = sum(model.phi_local(i, y[i], z[i]) - float(y[i] @ share) for i in range(len(y)))
    coupling, gap = _edge_terms(graph, mu, y)
    return local - coupling - 0.5 * rho * gap


def dual_maximizer(
    model: QuadraticDualModel, graph: Graph, mu: np.ndarray, z: Sequence[np.ndarray], rho: float
) -> list[np.ndarray]:
    """Minimum-norm maximizer of the augmented Lagrangian over y.

    Raises:
        SingularSystemError: If the maximization is unbounded, i.e. ``h`` is
            not in the range of ``P``.
    """
    hess, lin = model.dual_quadratic(graph, mu, z, rho)
    solution, *_ = lstsq(hess, lin)
    residual = float(np.linalg.norm(hess @ solution - lin))
    if residual > DUAL_RESIDUAL_RTOL * (1.0 + float(np.linalg.norm(lin))):
        raise SingularSystemError(
            f"Dual maximization is unbounded (residual {residual:.3e})",
            float(np.linalg.cond(hess)),
        )
    m = model.problem.m_constraints
    return [solution[i * m : (i + 1) * m] for i in range(graph.n_agents)]


def dual_solution_projection(
    problem: CoupledProblem,
    graph: Graph,
    mu: np.ndarray,
    z: Sequence[np.ndarray],
    y: Sequence[np.ndarray],
    rho: float,
    p: float,
) -> list[np.ndarray]:
    """Project ``y`` onto the maximizer set of the augmented Lagrangian at ``(mu, z)``."""
    model = QuadraticDualModel(problem, p)
    hess, lin = model.dual_quadratic(graph, mu, z, rho)
    y_vec = np.concatenate(list(y))
    correction, *_ = lstsq(hess, hess @ y_vec - lin)
    projected = y_vec - correction
    m = problem.m_constraints
    return [projected[i * m : (i + 1) * m] for i in range(graph.n_agents)]


def phi_eval_quadratic(
    problem: CoupledProblem,
    graph: Graph,
    state: PhiState,
    rho: float,
    p: float,
    model: QuadraticDualModel | None = None,
) -> PhiComponents:
    """Evaluate ``Phi = G~ - 2 L_rho + 2 d`` and its parts at one state.

    Args:
        problem: Quadratic instance.
        graph: Agent graph.
        state: Iterates, previous dual copies and explicit edge dual.
        rho: Penalty parameter.
        p: Proximal weight.
        model: Reusable factorizations for repeated evaluation.
    """
    if model is None:
        model = QuadraticDualModel(problem, p)
    share = problem.rhs / problem.n_agents
    coupling_term, gap = _edge_terms(graph, state.mu, state.y)

    primal = 0.0
    for i, (obj, block) in enumerate(zip(problem.objectives, problem.coupling)):
        x, y, z = state.x[i], state.y[i], state.z[i]
        d = x - z
        primal += obj.value(x) + 0.5 * p * float(d @ d) + float(y @ (block @ x)) - float(y @ share)
    g_value = primal - coupling_term - 0.5 * rho * gap

    step = [y - yp for y, yp in zip(state.y, state.y_prev)]
    g_tilde = g_value + gap + 0.5 * rho * _signless_norm(graph, step)

    l_rho = augmented_lagrangian(model, graph, state.y, state.mu, state.z, rho)
    y_star = dual_maximizer(model, graph, state.mu, state.z, rho)
    dual_d = augmented_lagrangian(model, graph, y_star, state.mu, state.z, rho)
    if dual_d < l_rho - 1e-9 * (1.0 + abs(l_rho)):
        logger.warning("Weak duality violated: d=%.6e < L_rho=%.6e", dual_d, l_rho)

    return PhiComponents(
        g_value=g_value,
        g_tilde=g_tilde,
        l_rho=l_rho,
        dual_d=dual_d,
        phi=g_tilde - 2.0 * l_rho + 2.0 * dual_d,
    )
