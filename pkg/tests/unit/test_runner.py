"""Tests for the synchronous round simulator."""

import numpy as np
import pytest

from pdc_mesh.diagnostics.metrics import eps_kkt
from pdc_mesh.diagnostics.potential import ShadowDual
from pdc_mesh.engine.runner import initial_states, run
from pdc_mesh.engine.state import SolverConfig
from pdc_mesh.errors import ConfigError, DisconnectedGraphError, SolverAbort
from pdc_mesh.problems.consensus import build_consensus_instance
from pdc_mesh.problems.coupled import CoupledProblem
from pdc_mesh.problems.objectives import LogisticLossObjective, QuadraticObjective
from pdc_mesh.problems.quadratic import kkt_oracle_quadratic
from pdc_mesh.topology.graph import Graph
from tests.conftest import PRACTICAL


class TestInitialStates:
    def test_center_starts_at_primal_and_p_at_zero(self, quad_problem):
        states = initial_states(quad_problem, SolverConfig(seed=3))
        for state in states:
            np.testing.assert_array_equal(state.x, state.z)
            np.testing.assert_array_equal(state.p, np.zeros(2))
            assert np.all(np.abs(state.x) <= 1.0)

    def test_seeded(self, quad_problem):
        a = initial_states(quad_problem, SolverConfig(seed=5))
        b = initial_states(quad_problem, SolverConfig(seed=5))
        for s, t in zip(a, b):
            np.testing.assert_array_equal(s.x, t.x)
            np.testing.assert_array_equal(s.y, t.y)

    def test_zeros(self, quad_problem):
        states = initial_states(quad_problem, SolverConfig(init="zeros"))
        assert all(not s.x.any() and not s.y.any() for s in states)


class TestRun:
    def test_one_record_per_round(self, quad_problem, cycle4, practical_config):
        trace = run(quad_problem, cycle4, practical_config)
        assert trace.rounds == 50
        assert [r.round for r in trace.records] == list(range(1, 51))
        assert trace.stopped_by == "max_rounds"
        assert len(trace.final_states) == 4
        assert trace.inner_solves == 4 * 50

    @pytest.mark.slow
    def test_reaches_kkt_point(self, quad_problem, cycle4):
        config = SolverConfig(
            max_rounds=5000,
            subsolver_tol=1e-12,
            tol_residue=1e-18,
            tol_infeasibility=1e-18,
            **PRACTICAL,
        )
        trace = run(quad_problem, cycle4, config)
        x_blocks = trace.final_blocks("x")
        x_star, _ = kkt_oracle_quadratic(quad_problem)
        np.testing.assert_allclose(quad_problem.concat(x_blocks), x_star, atol=1e-5)
        assert eps_kkt(quad_problem, x_blocks).epsilon <= 1e-8
        assert trace.last.grad_residue <= 1e-8

    def test_consensus_on_identical_objectives(self, cycle4):
        objective = QuadraticObjective(np.array([[2.0]]), np.array([-2.0]))
        problem = build_consensus_instance([objective] * 4, cycle4)
        config = SolverConfig(max_rounds=2000, subsolver_tol=1e-12, **PRACTICAL)
        trace = run(problem, cycle4, config)
        for x in trace.final_blocks("x"):
            assert x[0] == pytest.approx(1.0, abs=1e-4)
        assert trace.last.consensus_gap <= 1e-6

    def test_inexact_mode(self, quad_problem, cycle4):
        config = SolverConfig(mode="inexact_ipdc", zeta=0.1, max_rounds=300, **PRACTICAL)
        trace = run(quad_problem, cycle4, config)
        residue = trace.column("grad_residue")
        assert residue[-1] < residue[0]
        np.testing.assert_array_equal(trace.column("inner_iters"), np.zeros(300))
        assert trace.inner_solves == 0
        assert trace.stopping_rule_share == 1.0

    @pytest.mark.slow
    @pytest.mark.parametrize("zeta", [0.05, 0.1, 0.3])
    def test_inexact_limit_matches_exact_limit(self, quad_problem, cycle4, zeta):
        exact = SolverConfig(max_rounds=5000, subsolver_tol=1e-12, **PRACTICAL)
        inexact = SolverConfig(mode="inexact_ipdc", zeta=zeta, max_rounds=5000, **PRACTICAL)
        pdc = run(quad_problem, cycle4, exact)
        ipdc = run(quad_problem, cycle4, inexact)
        for a, b in zip(pdc.final_blocks("z"), ipdc.final_blocks("z")):
            np.testing.assert_allclose(b, a, atol=1e-5)
        np.testing.assert_allclose(ipdc.mean_dual(), pdc.mean_dual(), atol=1e-5)
        assert eps_kkt(quad_problem, ipdc.final_blocks("x")).epsilon <= 1e-6

    def test_threads_do_not_change_the_trace(self, quad_problem, cycle4, practical_config):
        serial = run(quad_problem, cycle4, practical_config)
        practical_config.threads = 2
        threaded = run(quad_problem, cycle4, practical_config)
        for column in ("grad_residue", "infeasibility", "consensus_gap", "dx", "dy", "dz"):
            np.testing.assert_array_equal(serial.column(column), threaded.column(column))
        for a, b in zip(serial.final_blocks("x"), threaded.final_blocks("x")):
            np.testing.assert_array_equal(a, b)

    def test_guard_counts_reads_without_violations(self, quad_problem, cycle4, practical_config):
        practical_config.guard = True
        practical_config.max_rounds = 5
        trace = run(quad_problem, cycle4, practical_config)
        assert trace.locality_violations == 0
        assert trace.locality_reads > 0

    @pytest.mark.slow
    def test_guard_over_a_full_run(self, quad_problem, cycle4):
        config = SolverConfig(max_rounds=1000, guard=True, **PRACTICAL)
        trace = run(quad_problem, cycle4, config)
        assert trace.rounds == 1000
        assert trace.locality_violations == 0
        assert trace.locality_reads >= 1000 * 4 * 2

    def test_tolerances_stop_early(self, pair_problem, pair_graph):
        config = SolverConfig(tol_residue=10.0, tol_infeasibility=10.0, **PRACTICAL)
        trace = run(pair_problem, pair_graph, config)
        assert trace.rounds == 1
        assert trace.stopped_by == "tolerance"

    def test_records_potential_on_quadratic_instances(self, quad_problem, cycle4, practical_config):
        practical_config.record_phi = True
        practical_config.max_rounds = 10
        trace = run(quad_problem, cycle4, practical_config)
        assert np.all(np.isfinite(trace.column("phi")))

    def test_phi_missing_without_recording(self, pair_problem, pair_graph, practical_config):
        practical_config.max_rounds = 3
        trace = run(pair_problem, pair_graph, practical_config)
        assert np.all(np.isnan(trace.column("phi")))

    def test_caller_states_are_not_mutated(self, quad_problem, cycle4, practical_config):
        states = initial_states(quad_problem, practical_config)
        before = [s.x.copy() for s in states]
        run(quad_problem, cycle4, practical_config, states=states)
        for s, x in zip(states, before):
            np.testing.assert_array_equal(s.x, x)

    def test_observer_sees_accumulated_edge_dual(self, quad_problem, cycle4, practical_config):
        practical_config.max_rounds = 20
        states = initial_states(quad_problem, practical_config)
        shadow = ShadowDual(cycle4, 2)
        previous = {"y": [s.y.copy() for s in states]}
        seen = []

        def observer(record, current):
            shadow.advance(previous["y"], practical_config.alpha)
            for p_shadow, state in zip(shadow.p_blocks(), current):
                np.testing.assert_allclose(p_shadow, state.p, atol=1e-12)
            previous["y"] = [s.y.copy() for s in current]
            seen.append(record.round)

        run(quad_problem, cycle4, practical_config, observer=observer, states=states)
        assert seen == list(range(1, 21))


class TestRunErrors:
    def test_non_finite_iterate_aborts(self, pair_graph):
        problem = CoupledProblem(
            objectives=(
                QuadraticObjective(np.eye(1), np.array([np.nan])),
                QuadraticObjective(np.eye(1), np.zeros(1)),
            ),
            coupling=(np.ones((1, 1)), np.ones((1, 1))),
            rhs=np.zeros(1),
        )
        config = SolverConfig(mode="inexact_ipdc", zeta=0.1, max_rounds=5, **PRACTICAL)
        with pytest.raises(SolverAbort) as excinfo:
            run(problem, pair_graph, config)
        err = excinfo.value
        assert (err.agent, err.round_index, err.field) == (0, 1, "x")
        assert err.trace.stopped_by == "abort"
        assert err.trace.rounds == 0
        assert all(s.is_finite() is None for s in err.trace.final_states)

    def test_potential_needs_quadratic_instance(self, pair_graph):
        problem = CoupledProblem(
            objectives=(LogisticLossObjective(np.ones(1)), LogisticLossObjective(-np.ones(1))),
            coupling=(np.ones((1, 1)), np.ones((1, 1))),
            rhs=np.zeros(1),
        )
        config = SolverConfig(record_phi=True, **PRACTICAL)
        with pytest.raises(ConfigError, match="quadratic"):
            run(problem, pair_graph, config)

    def test_disconnected_graph(self, quad_problem):
        graph = Graph.from_edges(4, [(0, 1), (2, 3)])
        with pytest.raises(DisconnectedGraphError):
            run(quad_problem, graph, SolverConfig(**PRACTICAL))

    def test_agent_count_mismatch(self, quad_problem, pair_graph):
        with pytest.raises(ValueError, match="agents"):
            run(quad_problem, pair_graph, SolverConfig(**PRACTICAL))

    def test_invalid_settings(self, quad_problem, cycle4):
        with pytest.raises(ConfigError, match="beta"):
            run(quad_problem, cycle4, SolverConfig(p=1.0, rho=1.0, alpha=0.1, beta=0.0))

    def test_inexact_without_zeta(self, quad_problem, cycle4):
        with pytest.raises(ConfigError, match="zeta"):
            run(quad_problem, cycle4, SolverConfig(mode="inexact_ipdc", **PRACTICAL))

    def test_exact_mode_with_zeta(self, quad_problem, cycle4):
        with pytest.raises(ConfigError, match="zeta"):
            run(quad_problem, cycle4, SolverConfig(zeta=0.1, **PRACTICAL))
