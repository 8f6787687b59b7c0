"""Synchronous-round simulator for PDC and IPDC.

Each round runs four stages (dual consensus, primal, dual copy, proximal
center). A stage maps over all agents and completes before the next one
starts; cross-agent reads only touch the round's ``y`` snapshot held by a
:class:`MessageBoard`.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, TypeVar

import numpy as np

from pdc_mesh.diagnostics.metrics import consensus_gap, gradient_residue, infeasibility
from pdc_mesh.diagnostics.potential import (
    PhiState,
    QuadraticDualModel,
    ShadowDual,
    phi_eval_quadratic,
)
from pdc_mesh.engine.messaging import MessageBoard, signless_neighbor_sum
from pdc_mesh.engine.state import AgentState, IterationTrace, RoundRecord, SolverConfig
from pdc_mesh.engine.updates import (
    SubproblemResult,
    dual_p_step,
    subproblem_lipschitz,
    x_update_exact,
    x_update_inexact,
    y_update,
    z_update,
)
from pdc_mesh.errors import ConfigError, DisconnectedGraphError, SolverAbort
from pdc_mesh.problems.coupled import CoupledProblem
from pdc_mesh.topology.graph import Graph

logger = logging.getLogger(__name__)

T = TypeVar("T")

Observer = Callable[[RoundRecord, Sequence[AgentState]], None]


def initial_states(
    problem: CoupledProblem, config: SolverConfig
) -> list[AgentState]:
    """Seeded starting point with ``x0 = z0`` and ``p0 = 0``."""
    rng = np.random.default_rng(config.seed)
    m = problem.m_constraints
    states = []
    for n_i in problem.dims:
        if config.init == "zeros":
            x = np.zeros(n_i)
            y = np.zeros(m)
        else:
            x = rng.uniform(-1.0, 1.0, size=n_i)
            y = rng.uniform(-1.0, 1.0, size=m)
        states.append(AgentState(x=x, y=y, p=np.zeros(m), z=x.copy()))
    return states


def _check_inputs(problem: CoupledProblem, graph: Graph, config: SolverConfig) -> None:
    config.validate()
    if graph.n_agents != problem.n_agents:
        raise ValueError(
            f"Graph has {graph.n_agents} agents but the problem has {problem.n_agents}"
        )
    if not graph.is_connected():
        raise DisconnectedGraphError("The agent graph must be connected")
    isolated = [i for i in range(graph.n_agents) if graph.degree(i) < 1]
    if isolated:
        raise ConfigError(f"Agents without neighbors: {isolated}")
    if config.p <= -problem.gamma_minus:
        logger.warning(
            "p=%.3g does not exceed -gamma_minus=%.3g; subproblems may be non-convex",
            config.p,
            -problem.gamma_minus,
        )
    if config.record_phi and not problem.is_quadratic:
        raise ConfigError("record_phi needs a quadratic instance")


class _StageRunner:
    """Maps a per-agent function over all agents, inline or on a thread pool."""

    def __init__(self, n_agents: int, threads: int) -> None:
        self.n_agents = n_agents
        self._pool: Optional[ThreadPoolExecutor] = None
        if threads > 1:
            self._pool = ThreadPoolExecutor(max_workers=threads, thread_name_prefix="pdc-agent")

    def map(self, func: Callable[[int], T]) -> list[T]:
        if self._pool is None:
            return [func(i) for i in range(self.n_agents)]
        return list(self._pool.map(func, range(self.n_agents)))

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)


def _max_step(new: Sequence[np.ndarray], old: Sequence[np.ndarray]) -> float:
    return max(float(np.linalg.norm(a - b)) for a, b in zip(new, old))


def _first_non_finite(states: Sequence[AgentState]) -> Optional[tuple[int, str]]:
    for i, state in enumerate(states):
        bad = state.is_finite()
        if bad is not None:
            return i, bad
    return None


def run(
    problem: CoupledProblem,
    graph: Graph,
    config: SolverConfig,
    observer: Optional[Observer] = None,
    states: Optional[list[AgentState]] = None,
) -> IterationTrace:
    """Run PDC (``exact_pdc``) or IPDC (``inexact_ipdc``) for up to ``max_rounds``.

    Args:
        problem: Coupled problem, one block per agent.
        graph: Connected agent graph matching the problem's agents.
        config: Solver settings.
        observer: Called after every round with its record and the states.
        states: Starting states; defaults to :func:`initial_states`.

    Returns:
        IterationTrace with one record per completed round.

    Raises:
        ConfigError: Invalid settings.
        DisconnectedGraphError: The graph is not connected.
        SolverAbort: An iterate became NaN or infinite.
        LocalityViolation: With ``guard`` on, an agent read a non-neighbor.
    """
    _check_inputs(problem, graph, config)
    n = problem.n_agents
    degrees = [graph.degree(i) for i in range(n)]
    if states is None:
        states = initial_states(problem, config)
    else:
        states = [s.copy() for s in states]

    lipschitz = [subproblem_lipschitz(problem, i, config, degrees[i]) for i in range(n)]
    exact = config.mode == "exact_pdc"

    shadow: Optional[ShadowDual] = None
    model: Optional[QuadraticDualModel] = None
    if config.record_phi:
        shadow = ShadowDual(graph, problem.m_constraints)
        model = QuadraticDualModel(problem, config.p)

    trace = IterationTrace()
    stages = _StageRunner(n, config.threads)
    started = time.perf_counter()
    logger.info(
        "Starting %s: %d agents, %d edges, M=%d, max_rounds=%d",
        config.mode,
        n,
        graph.n_edges,
        problem.m_constraints,
        config.max_rounds,
    )

    try:
        for r in range(1, config.max_rounds + 1):
            board = MessageBoard(graph, [s.y for s in states], audit=config.guard)

            p_new = stages.map(lambda i: dual_p_step(states[i].p, board, i, config.alpha))
            signless = stages.map(lambda i: signless_neighbor_sum(board, i))

            if exact:
                solved: list[SubproblemResult] = stages.map(
                    lambda i: x_update_exact(
                        i, problem, config, states[i], p_new[i], signless[i], degrees[i],
                        lipschitz=lipschitz[i],
                    )
                )
                x_new = [res.x for res in solved]
                inner_iters = sum(res.iterations for res in solved)
                trace.inner_solves += n
                trace.inner_solves_converged += sum(1 for res in solved if res.converged)
            else:
                x_new = stages.map(
                    lambda i: x_update_inexact(
                        i, problem, config, states[i], p_new[i], signless[i], degrees[i]
                    )
                )
                inner_iters = 0

            y_new = stages.map(
                lambda i: y_update(
                    i, problem, x_new[i], p_new[i], signless[i], config.rho, degrees[i]
                )
            )
            z_new = stages.map(lambda i: z_update(states[i].z, x_new[i], config.beta))

            old = states
            states = [
                AgentState(x=x_new[i], y=y_new[i], p=p_new[i], z=z_new[i]) for i in range(n)
            ]
            trace.locality_reads += board.reads
            trace.locality_violations += board.violations

            bad = _first_non_finite(states)
            if bad is not None:
                agent, field_name = bad
                trace.final_states = [s.copy() for s in old]
                trace.stopped_by = "abort"
                raise SolverAbort(agent, r, field_name, trace)

            phi = None
            if shadow is not None and model is not None:
                shadow.advance([s.y for s in old], config.alpha)
                phi_state = PhiState(
                    x=x_new,
                    y=y_new,
                    y_prev=[s.y for s in old],
                    mu=shadow.snapshot(),
                    z=z_new,
                )
                phi = phi_eval_quadratic(problem, graph, phi_state, config.rho, config.p, model).phi

            record = RoundRecord(
                round=r,
                grad_residue=gradient_residue(problem, x_new, y_new),
                infeasibility=infeasibility(problem, x_new),
                consensus_gap=consensus_gap(graph, y_new),
                dx=_max_step(x_new, [s.x for s in old]),
                dy=_max_step(y_new, [s.y for s in old]),
                dz=_max_step(z_new, [s.z for s in old]),
                inner_iters=inner_iters,
                phi=phi,
            )
            trace.append(record)
            logger.debug(
                "Round %d: residue=%.3e infeasibility=%.3e gap=%.3e",
                r,
                record.grad_residue,
                record.infeasibility,
                record.consensus_gap,
            )
            if observer is not None:
                observer(record, states)

            if _tolerances_met(record, config):
                trace.stopped_by = "tolerance"
                break
    finally:
        stages.close()

    trace.final_states = [s.copy() for s in states]
    logger.info(
        "Finished after %d rounds (%s) in %.2fs: residue=%.3e infeasibility=%.3e",
        trace.rounds,
        trace.stopped_by,
        time.perf_counter() - started,
        trace.last.grad_residue,
        trace.last.infeasibility,
    )
    return trace


def _tolerances_met(record: RoundRecord, config: SolverConfig) -> bool:
    if config.tol_residue <= 0 and config.tol_infeasibility <= 0:
        return False
    return (
        record.grad_residue <= config.tol_residue
        and record.infeasibility <= config.tol_infeasibility
    )
