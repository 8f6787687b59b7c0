"""Tests for pdc_mesh.stats.aggregate module."""

import numpy as np
import pytest

from pdc_mesh.engine.state import IterationTrace, RoundRecord
from pdc_mesh.stats.aggregate import (
    best_iterate_curve,
    fit_loglog_rate,
    mean_trace,
    summarize,
    terminal_values,
)


def make_trace(residues, infeasibility=None, inner=2, phi=None):
    trace = IterationTrace()
    infeasibility = infeasibility or [0.0] * len(residues)
    for r, (g, f) in enumerate(zip(residues, infeasibility), start=1):
        trace.append(
            RoundRecord(
                round=r,
                grad_residue=g,
                infeasibility=f,
                consensus_gap=0.0,
                dx=0.0,
                dy=0.0,
                dz=0.0,
                inner_iters=inner,
                phi=None if phi is None else phi[r - 1],
            )
        )
    return trace


class TestMeanTrace:
    def test_pads_short_runs_with_last_record(self):
        records = mean_trace([make_trace([3.0, 2.0, 1.0], inner=4), make_trace([1.0, 1.0])])
        assert [r.round for r in records] == [1, 2, 3]
        assert [r.grad_residue for r in records] == [2.0, 1.5, 1.0]
        assert [r.inner_iters for r in records] == [3, 3, 3]

    def test_phi_needs_every_run(self):
        with_phi = make_trace([1.0, 1.0], phi=[4.0, 2.0])
        records = mean_trace([with_phi, make_trace([1.0, 1.0])])
        assert all(r.phi is None for r in records)
        records = mean_trace([with_phi, make_trace([1.0, 1.0], phi=[2.0, 0.0])])
        assert [r.phi for r in records] == [3.0, 1.0]

    def test_single_trace_is_unchanged(self):
        trace = make_trace([0.5, 0.25])
        assert mean_trace([trace]) == trace.records

    def test_rejects_no_traces(self):
        with pytest.raises(ValueError):
            mean_trace([])

    def test_rejects_empty_trace(self):
        with pytest.raises(ValueError, match="empty"):
            mean_trace([IterationTrace()])


class TestBestIterateCurve:
    def test_running_minimum(self):
        trace = make_trace([3.0, 1.0, 2.0], infeasibility=[0.0, 0.0, 0.5])
        np.testing.assert_array_equal(best_iterate_curve(trace), [3.0, 1.0, 1.0])


class TestFitLogLogRate:
    def test_inverse_decay(self):
        values = 1.0 / np.arange(1, 201)
        fit = fit_loglog_rate(values)
        assert fit.slope == pytest.approx(-1.0)
        assert fit.intercept == pytest.approx(0.0, abs=1e-9)
        assert fit.residual == pytest.approx(0.0, abs=1e-9)
        assert fit.points == 191

    def test_window(self):
        values = 5.0 * np.arange(1, 101, dtype=float) ** -2
        fit = fit_loglog_rate(values, start=20, stop=60)
        assert fit.slope == pytest.approx(-2.0)
        assert fit.points == 41

    def test_zeros_are_dropped(self):
        values = 1.0 / np.arange(1, 51)
        values[30:] = 0.0
        assert fit_loglog_rate(values).points == 21

    def test_needs_two_points(self):
        with pytest.raises(ValueError, match="two positive"):
            fit_loglog_rate(np.zeros(50))


class TestSummarize:
    def test_keys_and_values(self):
        trace = make_trace([2.0, 0.5], infeasibility=[1.0, 0.25])
        trace.stopped_by = "tolerance"
        trace.inner_solves = 8
        trace.inner_solves_converged = 6
        summary = summarize(trace)
        assert summary["rounds"] == 2
        assert summary["stopped_by"] == "tolerance"
        assert summary["grad_residue"] == 0.5
        assert summary["best_kkt"] == 0.75
        assert summary["stopping_rule_share"] == 0.75
        assert summary["locality_violations"] == 0

    def test_terminal_values(self):
        traces = [make_trace([1.0, 0.2]), make_trace([1.0, 0.4, 0.6])]
        assert terminal_values(traces, "grad_residue") == pytest.approx(0.4)
