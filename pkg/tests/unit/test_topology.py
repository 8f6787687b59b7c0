"""Tests for pdc_mesh.topology."""

import math

import numpy as np
import pytest

from pdc_mesh.errors import DisconnectedGraphError
from pdc_mesh.topology.graph import (
    Graph,
    build_cycle,
    build_random_connected,
    read_edge_list,
    write_edge_list,
)
from pdc_mesh.topology.matrices import derive_matrices, spectral_summary


class TestGraph:
    """Graph construction and validation."""

    def test_from_edges_canonicalizes_and_sorts(self):
        graph = Graph.from_edges(4, [(3, 2), (1, 0), (0, 3)])
        assert graph.edges == ((0, 1), (0, 3), (2, 3))

    def test_from_edges_drops_duplicate_pairs(self):
        graph = Graph.from_edges(3, [(0, 1), (1, 0)])
        assert graph.n_edges == 1

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError, match="Self-loop"):
            Graph(3, ((1, 1),))

    def test_rejects_out_of_range_edge(self):
        with pytest.raises(ValueError, match="not canonical"):
            Graph(3, ((0, 3),))

    def test_rejects_unsorted_edges(self):
        with pytest.raises(ValueError, match="sorted"):
            Graph(3, ((1, 2), (0, 1)))

    def test_rejects_empty_agent_set(self):
        with pytest.raises(ValueError):
            Graph(0)

    def test_neighbors_and_degree(self):
        graph = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
        assert graph.neighbors(0) == (1, 2, 3)
        assert graph.neighbors(2) == (0,)
        assert graph.degree(0) == 3
        assert graph.max_degree == 3
        assert graph.is_neighbor(1, 0)
        assert not graph.is_neighbor(1, 2)

    def test_is_connected(self):
        assert Graph.from_edges(3, [(0, 1), (1, 2)]).is_connected()
        assert not Graph.from_edges(4, [(0, 1), (2, 3)]).is_connected()


class TestBuildCycle:
    def test_triangle(self):
        graph = build_cycle(3)
        assert graph.edges == ((0, 1), (0, 2), (1, 2))
        assert all(graph.degree(i) == 2 for i in range(3))

    def test_four_cycle_has_degree_two(self):
        graph = build_cycle(4)
        assert graph.n_edges == 4
        assert {graph.degree(i) for i in range(4)} == {2}

    def test_needs_three_agents(self):
        with pytest.raises(ValueError, match="at least 3"):
            build_cycle(2)


class TestBuildRandomConnected:
    def test_two_agents_full_probability(self):
        assert build_random_connected(2, 1.0, 0).edges == ((0, 1),)

    def test_deterministic_for_fixed_seed(self):
        first = build_random_connected(25, 0.3, 7)
        second = build_random_connected(25, 0.3, 7)
        assert first.edges == second.edges

    def test_zero_probability_is_augmented_to_connected(self):
        graph = build_random_connected(25, 0.0, 1)
        assert graph.is_connected()
        assert graph.n_edges >= 24

    def test_rejects_invalid_probability(self):
        with pytest.raises(ValueError, match="edge_prob"):
            build_random_connected(5, 1.5, 0)


class TestEdgeListFiles:
    def test_write_then_read(self, tmp_path):
        graph = build_random_connected(8, 0.4, 3)
        path = tmp_path / "edges.txt"
        write_edge_list(graph, path)
        assert read_edge_list(path) == graph

    def test_comments_and_blank_lines_are_skipped(self, tmp_path):
        path = tmp_path / "edges.txt"
        path.write_text("# ring\nagents 3\n\n0 1  # first\n2 1\n0 2\n")
        assert read_edge_list(path).edges == ((0, 1), (0, 2), (1, 2))

    def test_missing_header(self, tmp_path):
        path = tmp_path / "edges.txt"
        path.write_text("0 1\n")
        with pytest.raises(ValueError, match="header"):
            read_edge_list(path)

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "edges.txt"
        path.write_text("agents 3\n0 1 2\n")
        with pytest.raises(ValueError, match="expected 'i j'"):
            read_edge_list(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_edge_list(tmp_path / "absent.txt")


class TestDeriveMatrices:
    def test_two_node_path(self, pair_graph):
        matrices = derive_matrices(pair_graph)
        np.testing.assert_array_equal(matrices.incidence, [[1, -1]])
        np.testing.assert_array_equal(matrices.signed_laplacian, [[1, -1], [-1, 1]])
        np.testing.assert_array_equal(matrices.signless_laplacian, [[1, 1], [1, 1]])

    def test_four_cycle_signed_laplacian(self, cycle4):
        signed = derive_matrices(cycle4).signed_laplacian
        np.testing.assert_array_equal(np.diag(signed), [2, 2, 2, 2])
        assert signed[0, 1] == signed[0, 3] == -1
        assert signed[0, 2] == 0
        np.testing.assert_allclose(np.linalg.eigvalsh(signed), [0, 2, 2, 4], atol=1e-12)

    def test_laplacian_identities(self):
        for seed in range(5):
            m = derive_matrices(build_random_connected(9, 0.3, seed))
            np.testing.assert_array_equal(m.signed_laplacian, m.incidence.T @ m.incidence)
            np.testing.assert_array_equal(
                m.signed_laplacian + m.signless_laplacian, 2 * m.degree
            )

    def test_block_expansion(self, cycle4):
        matrices = derive_matrices(cycle4, block_size=2)
        expanded = matrices.expanded_signed_laplacian.toarray()
        assert expanded.shape == (8, 8)
        np.testing.assert_array_equal(expanded[0:2, 0:2], 2 * np.eye(2))
        np.testing.assert_array_equal(expanded[0:2, 2:4], -np.eye(2))
        assert matrices.expanded_incidence.shape == (8, 8)

    def test_row_blocks(self, cycle4):
        matrices = derive_matrices(cycle4, block_size=2)
        block = matrices.signless_row_block(1).toarray()
        np.testing.assert_array_equal(
            block, matrices.expanded_signless_laplacian.toarray()[2:4]
        )

    def test_rejects_zero_block_size(self, cycle4):
        with pytest.raises(ValueError):
            derive_matrices(cycle4, block_size=0)


class TestSpectralSummary:
    def test_cycle_of_four(self, cycle4):
        summary = spectral_summary(derive_matrices(cycle4))
        assert summary.lambda_max_plus == pytest.approx(4.0)
        assert summary.sigma_max_minus == pytest.approx(4.0)
        assert summary.connected
        assert summary.zero_multiplicity == 1

    def test_cycle_of_six_min_singular_value(self):
        summary = spectral_summary(derive_matrices(build_cycle(6)))
        assert summary.sigma_min_minus == pytest.approx(1.0, abs=1e-12)

    def test_cycle_of_eight_min_singular_value(self):
        summary = spectral_summary(derive_matrices(build_cycle(8)))
        expected = 2.0 - 2.0 * math.cos(math.pi / 4.0)
        assert summary.sigma_min_minus == pytest.approx(expected, abs=1e-12)
        assert summary.sigma_min_minus == pytest.approx(0.585786, abs=1e-6)

    def test_lambda_max_bounded_by_twice_max_degree(self):
        for seed in range(5):
            graph = build_random_connected(10, 0.3, seed)
            summary = spectral_summary(derive_matrices(graph))
            assert summary.lambda_max_plus <= 2 * graph.max_degree + 1e-9

    def test_disconnected_graph(self):
        graph = Graph.from_edges(4, [(0, 1), (2, 3)])
        summary = spectral_summary(derive_matrices(graph))
        assert not summary.connected
        assert summary.zero_multiplicity == 2
        assert summary.sigma_min_minus == 0.0
        with pytest.raises(DisconnectedGraphError):
            summary.require_connected()

    def test_single_agent_is_rejected(self):
        with pytest.raises(ValueError, match="two agents"):
            spectral_summary(derive_matrices(Graph.from_edges(1, [])))

    def test_pair_is_connected_with_positive_gap(self, pair_graph):
        summary = spectral_summary(derive_matrices(pair_graph))
        assert summary.connected
        assert summary.sigma_min_minus == pytest.approx(2.0)

    def test_to_dict_keys(self, cycle4):
        data = spectral_summary(derive_matrices(cycle4)).to_dict()
        assert set(data) == {
            "lambda_max_plus",
            "sigma_min_minus",
            "sigma_max_minus",
            "connected",
            "zero_multiplicity",
        }
