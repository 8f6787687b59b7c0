"""Accelerated gradient (FISTA) solver for smooth local subproblems."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

Vector = np.ndarray


@dataclass(frozen=True)
class FistaResult:
    """Outcome of one FISTA solve.

    Attributes:
        x: Final iterate.
        iterations: Gradient evaluations used.
        residual: Normalized prox-gradient norm at the last tested point.
        converged: True when ``residual <= tol`` ended the solve.
        restarts: Number of momentum restarts.
    """

    x: Vector
    iterations: int
    residual: float
    converged: bool
    restarts: int = 0


def prox_gradient_residual(x: Vector, grad: Vector, lipschitz: float) -> float:
    """``||x - (x - grad / L)|| / max(1, ||x||)``."""
    return float(np.linalg.norm(grad) / lipschitz / max(1.0, float(np.linalg.norm(x))))


def fista(
    gradient: Callable[[Vector], Vector],
    x0: Vector,
    lipschitz: float,
    tol: float = 1e-5,
    max_iter: int = 10_000,
    objective: Optional[Callable[[Vector], float]] = None,
) -> FistaResult:
    """Minimize a smooth function with constant step ``1/L``.

    Uses the momentum sequence ``t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2``. When
    ``objective`` is given, momentum is reset whenever the objective
    increases. The solve stops at the first extrapolation point whose
    normalized prox-gradient residual is at most ``tol``; the returned
    iterate is the gradient step taken from that point.

    Args:
        gradient: Gradient callable.
        x0: Warm start.
        lipschitz: Gradient Lipschitz constant L (> 0).
        tol: Stopping tolerance on the normalized prox-gradient residual.
        max_iter: Iteration budget.
        objective: Optional objective callable enabling restarts.

    Returns:
        FistaResult. ``converged`` is False if the budget ran out.

    Example:
        >>> res = fista(lambda x: 2 * (x - 1.0), np.zeros(1), lipschitz=2.0)
        >>> bool(abs(res.x[0] - 1.0) < 1e-6)
        True
    """
    if lipschitz <= 0:
        raise ValueError(f"lipschitz must be positive, got {lipschitz}")

    step = 1.0 / lipschitz
    x = np.array(x0, dtype=float)
    y = x.copy()
    t = 1.0
    f_prev = objective(x) if objective is not None else math.inf
    restarts = 0
    residual = math.inf

    for k in range(1, max_iter + 1):
        g = gradient(y)
        residual = prox_gradient_residual(y, g, lipschitz)
        x_next = y - step * g
        if residual <= tol:
            return FistaResult(x_next, k, residual, True, restarts)

        if objective is not None:
            f_next = objective(x_next)
            if f_next > f_prev and t > 1.0:
                # Drop momentum and retry from the last accepted point.
                t = 1.0
                y = x.copy()
                restarts += 1
                continue
            f_prev = f_next

        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = x_next + ((t - 1.0) / t_next) * (x_next - x)
        x, t = x_next, t_next

    return FistaResult(x, max_iter, residual, False, restarts)
