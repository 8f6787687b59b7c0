"""Trace aggregation and rate fitting."""

from pdc_mesh.stats.aggregate import (
    RateFit,
    best_iterate_curve,
    fit_loglog_rate,
    mean_trace,
    summarize,
    terminal_values,
)

__all__ = [
    "RateFit",
    "best_iterate_curve",
    "fit_loglog_rate",
    "mean_trace",
    "summarize",
    "terminal_values",
]
