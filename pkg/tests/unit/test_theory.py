"""Tests for the analysis constants, Hoffman estimates and regime checks."""

import math

import numpy as np
import pytest

from pdc_mesh.engine.state import SolverConfig
from pdc_mesh.errors import ConfigError, DisconnectedGraphError, RankDeficientCouplingError
from pdc_mesh.problems.coupled import CoupledProblem
from pdc_mesh.problems.objectives import QuadraticObjective
from pdc_mesh.problems.quadratic import build_quadratic_instance
from pdc_mesh.theory.constants import (
    dual_curvature,
    error_constants,
    kappa,
    perturbation_constants,
)
from pdc_mesh.theory.hoffman import (
    assemble_m1,
    assemble_m2,
    hoffman_estimates,
    hoffman_theta,
    row_basis,
    stacked_norm_bound,
    theta_bounds_fullrank,
)
from pdc_mesh.theory.regime import build_constant_sheet, check_regime
from pdc_mesh.topology.graph import Graph, build_random_connected
from pdc_mesh.topology.matrices import derive_matrices, spectral_summary
from tests.conftest import scalar_problem


class TestPerturbationConstants:
    def test_worked_example(self):
        sigma = perturbation_constants(2.0, 1.0, 1.0, 1.0)
        assert sigma.sigma1 == pytest.approx(8 / 3)
        assert sigma.sigma2 == pytest.approx(4 / 3)
        assert sigma.sigma3 == pytest.approx(2 / 3)
        assert sigma.sigma4 is None

    def test_inexact_constant(self):
        assert perturbation_constants(2.0, 1.0, 1.0, 1.0, zeta=1 / 3).sigma4 == pytest.approx(4.0)

    def test_needs_strong_convexity(self):
        with pytest.raises(ValueError, match="gamma_minus"):
            perturbation_constants(1.0, -1.0, 1.0, 1.0)

    def test_rejects_non_positive_zeta(self):
        with pytest.raises(ValueError, match="zeta"):
            perturbation_constants(2.0, 1.0, 1.0, 1.0, zeta=0.0)


class TestErrorConstants:
    def test_unit_thetas(self):
        errors = error_constants(2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
        assert dual_curvature(2.0, 1.0, 1.0, 1.0) == pytest.approx(10 / 3)
        assert errors.a2 == pytest.approx(100 / 9 + 2)
        assert errors.a1 == pytest.approx(59 / 30)
        assert errors.a4 == pytest.approx(59 / 9)
        assert errors.a5 is None and errors.a6 is None

    def test_no_coupling(self):
        errors = error_constants(2.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.5, 1.0, zeta=0.5)
        sigma3 = 2.0 / 3.0
        assert errors.a3 == pytest.approx(1.5**2 * 3.0**2 * sigma3**2)
        assert errors.a5 == 0.0
        assert errors.a6 == 0.0

    def test_rejects_negative_theta(self):
        with pytest.raises(ValueError, match="Hoffman"):
            error_constants(2.0, 1.0, 1.0, 1.0, 1.0, -1.0, 1.0, 1.0)

    def test_rejects_non_positive_rho(self):
        with pytest.raises(ValueError, match="rho"):
            error_constants(2.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0)


class TestKappa:
    def test_curvature_dominates(self):
        assert kappa(1.0, 2.0, 3, 1.0) == 10.0

    def test_coupling_dominates(self):
        assert kappa(1.0, 0.0, 100, 1.0) == 100.0


class TestHoffman:
    def test_rank_one_laplacian(self):
        matrix = np.array([[1.0, -1.0], [-1.0, 1.0]])
        assert row_basis(matrix).shape == (1, 2)
        assert hoffman_theta(matrix) == pytest.approx(math.sqrt(2) / 2)

    def test_identity(self):
        assert hoffman_theta(np.eye(3)) == pytest.approx(1.0)

    def test_scaling(self):
        matrix = np.array([[1.0, -1.0], [-1.0, 1.0]])
        assert hoffman_theta(2 * matrix) == pytest.approx(hoffman_theta(matrix) / 2)

    def test_rejects_zero_matrix(self):
        with pytest.raises(ValueError):
            hoffman_theta(np.zeros((2, 2)))

    def test_system_shapes(self, pair_graph):
        problem = scalar_problem()
        assert assemble_m1(problem, pair_graph).shape == (4, 2)
        assert assemble_m2(problem, pair_graph).shape == (5, 3)

    def test_direct_estimate_below_closed_form(self, pair_graph):
        problem = scalar_problem()
        theta12, theta3 = hoffman_estimates(problem, pair_graph)
        bounds = theta_bounds_fullrank(spectral_summary(derive_matrices(pair_graph)), problem)
        assert 0 < theta12 <= bounds.theta12
        assert 0 < theta3 <= bounds.theta3

    def test_stacked_norm_bound(self):
        rng = np.random.default_rng(0)
        blocks = [rng.standard_normal((3, 2)) for _ in range(4)]
        for vertical in (True, False):
            actual, bound = stacked_norm_bound(blocks, vertical=vertical)
            assert actual <= bound + 1e-12


class TestFullRankBounds:
    def test_pair_of_scalars(self, pair_graph):
        spectra = spectral_summary(derive_matrices(pair_graph))
        bounds = theta_bounds_fullrank(spectra, scalar_problem())
        assert bounds.zeta_b == pytest.approx(2.0)
        assert bounds.theta12 == pytest.approx(40.5)
        assert bounds.sigma_min_b == pytest.approx(math.sqrt(2))

    def test_upper_singular_value_bounds_hold(self):
        for seed in range(5):
            graph = build_random_connected(5, 0.5, seed)
            problem = build_quadratic_instance(seed, 5, 2, 2, 1.0)
            spectra = spectral_summary(derive_matrices(graph))
            bounds = theta_bounds_fullrank(spectra, problem).singular_values
            m1 = np.linalg.norm(assemble_m1(problem, graph), 2)
            m2 = np.linalg.norm(assemble_m2(problem, graph), 2)
            assert m1 <= bounds.m1_sigma_max_upper + 1e-9
            assert m2 <= bounds.m2_sigma_max_upper + 1e-9

    def test_rank_deficient_coupling(self, pair_graph):
        problem = build_quadratic_instance(0, 2, 1, 3, 1.0)
        with pytest.raises(RankDeficientCouplingError) as excinfo:
            theta_bounds_fullrank(spectral_summary(derive_matrices(pair_graph)), problem)
        assert excinfo.value.rank == 2
        assert excinfo.value.rows == 3

    def test_disconnected_graph(self):
        graph = Graph.from_edges(4, [(0, 1), (2, 3)])
        spectra = spectral_summary(derive_matrices(graph))
        with pytest.raises(DisconnectedGraphError):
            theta_bounds_fullrank(spectra, scalar_problem(n_agents=4))


class TestConstantSheet:
    def test_direct_source_within_dense_limit(self, quad_problem, cycle4):
        sheet = build_constant_sheet(quad_problem, cycle4, p=1.0, rho=1.0)
        assert sheet.theta_source == "direct"
        assert sheet.theta1 == sheet.theta2
        assert sheet.fullrank is not None
        assert 0 < sheet.beta_max < 1
        assert sheet.alpha_max_pdc <= 1.0 / 5.0
        data = sheet.to_dict()
        for key in ("sigma1", "a1", "theta12_direct", "theta12_bound", "kappa", "beta_max"):
            assert key in data

    def test_bound_source_beyond_dense_limit(self, quad_problem, cycle4):
        sheet = build_constant_sheet(quad_problem, cycle4, p=1.0, rho=1.0, dense_limit=1)
        assert sheet.theta_source == "bound"
        assert sheet.theta_direct is None
        assert any("skipped" in note for note in sheet.notes)

    def test_direct_mode_beyond_dense_limit(self, quad_problem, cycle4):
        with pytest.raises(ConfigError, match="dense limit"):
            build_constant_sheet(
                quad_problem, cycle4, p=1.0, rho=1.0, theta_mode="direct", dense_limit=1
            )

    def test_bound_mode_needs_full_row_rank(self, pair_graph):
        problem = build_quadratic_instance(0, 2, 1, 3, 1.0)
        with pytest.raises(ConfigError, match="full row rank"):
            build_constant_sheet(problem, pair_graph, p=1.0, rho=1.0, theta_mode="bound")
        sheet = build_constant_sheet(problem, pair_graph, p=1.0, rho=1.0)
        assert sheet.theta_source == "direct"
        assert any("unavailable" in note for note in sheet.notes)

    def test_unknown_theta_mode(self, quad_problem, cycle4):
        with pytest.raises(ConfigError, match="theta_mode"):
            build_constant_sheet(quad_problem, cycle4, p=1.0, rho=1.0, theta_mode="guess")

    def test_no_coupling_gives_zero_beta_cap(self, pair_graph):
        problem = CoupledProblem(
            objectives=(QuadraticObjective(np.eye(1), np.zeros(1)),) * 2,
            coupling=(np.zeros((1, 1)), np.zeros((1, 1))),
            rhs=np.zeros(1),
        )
        sheet = build_constant_sheet(problem, pair_graph, p=1.0, rho=1.0)
        assert sheet.beta_max == 0.0

    def test_descent_constants(self, quad_problem, cycle4):
        sheet = build_constant_sheet(
            quad_problem, cycle4, p=1.0, rho=1.0, alpha=0.1, beta=0.5
        )
        assert sheet.descent is not None
        assert sheet.descent.c1 == pytest.approx(0.25)
        assert sheet.descent.c4 is None

    def test_inexact_region(self, quad_problem, cycle4):
        sheet = build_constant_sheet(quad_problem, cycle4, p=1.0, rho=1.0, zeta=0.1)
        ipdc = sheet.steps.ipdc
        assert ipdc is not None
        assert ipdc.zeta_min == pytest.approx(0.5)
        assert ipdc.zeta_max <= 2.0 / 3.0
        assert ipdc.rho_ok
        assert sheet.sigma.sigma4 is not None


class TestCheckRegime:
    def test_inside(self, quad_problem, cycle4):
        sheet = build_constant_sheet(quad_problem, cycle4, p=1.0, rho=1.0)
        config = SolverConfig(
            p=1.0, rho=1.0, alpha=sheet.alpha_max_pdc / 2, beta=sheet.beta_max / 2
        )
        verdict = check_regime(sheet, config)
        assert verdict.inside
        assert verdict.failed() == []
        assert [c.name for c in verdict.conditions] == [
            "p > -gamma_minus",
            "beta < beta_max",
            "alpha <= alpha_max",
        ]

    def test_outside_with_full_step(self, quad_problem, cycle4):
        sheet = build_constant_sheet(quad_problem, cycle4, p=1.0, rho=1.0)
        verdict = check_regime(sheet, SolverConfig(p=1.0, rho=1.0, alpha=0.1, beta=1.0))
        assert not verdict.inside
        assert "beta < beta_max" in [c.name for c in verdict.failed()]
        assert verdict.to_dict()["inside"] is False

    def test_inexact_large_zeta(self, quad_problem, cycle4):
        sheet = build_constant_sheet(quad_problem, cycle4, p=1.0, rho=1.0, zeta=1e6)
        config = SolverConfig(mode="inexact_ipdc", zeta=1e6, p=1.0, rho=1.0)
        names = [c.name for c in check_regime(sheet, config).failed()]
        assert "zeta < zeta_max" in names
        assert "zeta > zeta_min" not in names

    def test_parameter_mismatch(self, quad_problem, cycle4):
        sheet = build_constant_sheet(quad_problem, cycle4, p=1.0, rho=1.0)
        with pytest.raises(ConfigError, match="different p or rho"):
            check_regime(sheet, SolverConfig(p=2.0, rho=1.0))

    def test_inexact_needs_zeta_sheet(self, quad_problem, cycle4):
        sheet = build_constant_sheet(quad_problem, cycle4, p=1.0, rho=1.0)
        config = SolverConfig(mode="inexact_ipdc", zeta=0.1, p=1.0, rho=1.0)
        with pytest.raises(ConfigError, match="zeta"):
            check_regime(sheet, config)
