"""Numerical checks for local objectives: finite differences and curvature."""

from __future__ import annotations

import numpy as np

from pdc_mesh.problems.objectives import LocalObjective


def finite_diff_check(obj: LocalObjective, point: np.ndarray, step: float = 1e-5) -> float:
    """Worst coordinate-wise error between the gradient and central differences.

    The error of coordinate j is ``|g_j - d_j| / max(1, |g_j|, |d_j|)``, i.e.
    relative for large entries and absolute below one.

    Args:
        obj: Objective to check.
        point: Evaluation point.
        step: Central difference step, positive.

    Returns:
        The largest error over all coordinates.
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    point = np.asarray(point, dtype=float)
    grad = obj.gradient(point)
    worst = 0.0
    shifted = point.copy()
    for j in range(point.size):
        shifted[j] = point[j] + step
        upper = obj.value(shifted)
        shifted[j] = point[j] - step
        lower = obj.value(shifted)
        shifted[j] = point[j]
        approx = (upper - lower) / (2.0 * step)
        scale = max(1.0, abs(grad[j]), abs(approx))
        worst = max(worst, abs(grad[j] - approx) / scale)
    return worst


def _sample_pairs(
    obj: LocalObjective, rng: np.random.Generator, n_pairs: int, scale: float
) -> list[tuple[np.ndarray, np.ndarray]]:
    pairs = []
    for _ in range(n_pairs):
        x = scale * rng.standard_normal(obj.dim)
        d = rng.standard_normal(obj.dim) * scale * rng.uniform(1e-3, 1.0)
        pairs.append((d, obj.gradient(x + d) - obj.gradient(x)))
    return pairs


def certify_curvature(
    obj: LocalObjective, rng: np.random.Generator, n_pairs: int = 1000, scale: float = 1.0
) -> float:
    """Largest violation of the curvature enclosure on sampled pairs.

    For each pair ``(x, x + d)`` the two slacks
    ``gamma_minus ||d||^2 - <g(x+d) - g(x), d>`` and
    ``||g(x+d) - g(x)|| - gamma_plus ||d||`` are computed; a positive
    return value is a violation.
    """
    lo, hi = obj.curvature_bounds
    worst = -np.inf
    for d, dg in _sample_pairs(obj, rng, n_pairs, scale):
        monotone_slack = lo * float(d @ d) - float(dg @ d)
        lipschitz_slack = float(np.linalg.norm(dg)) - hi * float(np.linalg.norm(d))
        worst = max(worst, monotone_slack, lipschitz_slack)
    return float(worst)


def estimate_curvature(
    obj: LocalObjective, rng: np.random.Generator, n_pairs: int = 200, scale: float = 1.0
) -> tuple[float, float]:
    """Sampled ``(gamma_minus, gamma_plus)`` for objectives without closed-form bounds."""
    lower, upper = np.inf, 0.0
    for d, dg in _sample_pairs(obj, rng, n_pairs, scale):
        norm_sq = float(d @ d)
        if norm_sq == 0.0:
            continue
        lower = min(lower, float(dg @ d) / norm_sq)
        upper = max(upper, float(np.linalg.norm(dg)) / np.sqrt(norm_sq))
    if not np.isfinite(lower):
        lower = 0.0
    return (min(lower, upper), upper)
