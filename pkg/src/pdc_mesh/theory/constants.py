"""Closed-form constants of the convergence analysis.

All functions are pure. Curvature enters through ``gamma_minus`` and
``gamma_plus``; every constant needs ``p > -gamma_minus``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, Optional


def _require_strong_convexity(p: float, gamma_minus: float) -> float:
    shift = p + gamma_minus
    if shift <= 0:
        raise ValueError(f"p={p} must exceed -gamma_minus={-gamma_minus}")
    return shift


def dual_curvature(p: float, gamma_minus: float, gamma_plus: float, rho: float) -> float:
    """``1/(p + gamma^-) + rho^2 (p + gamma^+)``, shared by a1, a2 and a5."""
    shift = _require_strong_convexity(p, gamma_minus)
    return 1.0 / shift + rho**2 * (p + gamma_plus)


@dataclass(frozen=True)
class PerturbationConstants:
    """Sensitivity of the local minimizers to changes in y and z.

    ``sigma4`` only exists for the inexact algorithm, where it depends on the
    gradient step ``zeta``.
    """

    sigma1: float
    sigma2: float
    sigma3: float
    sigma4: Optional[float] = None


def perturbation_constants(
    p: float,
    gamma_minus: float,
    gamma_plus: float,
    b_max: float,
    zeta: Optional[float] = None,
) -> PerturbationConstants:
    """Compute sigma1 to sigma3, and sigma4 when ``zeta`` is given.

    Example:
        ``p=2, gamma^+=gamma^-=1, B_max=1`` gives ``(8/3, 4/3, 2/3)``.

    Raises:
        ValueError: If ``p <= -gamma^-`` or ``zeta <= 0``.
    """
    shift = _require_strong_convexity(p, gamma_minus)
    growth = p + gamma_plus + 1.0
    sigma4 = None
    if zeta is not None:
        if zeta <= 0:
            raise ValueError(f"zeta must be positive, got {zeta}")
        sigma4 = 1.0 + 3.0 / (zeta * shift)
    return PerturbationConstants(
        sigma1=p * growth / shift,
        sigma2=b_max * growth / shift,
        sigma3=p / shift,
        sigma4=sigma4,
    )


@dataclass(frozen=True)
class ErrorConstants:
    """Error-bound constants; ``a5`` and ``a6`` need ``sigma4``."""

    a1: float
    a2: float
    a3: float
    a4: float
    a5: Optional[float] = None
    a6: Optional[float] = None


def error_constants(
    p: float,
    gamma_minus: float,
    gamma_plus: float,
    b_max: float,
    rho: float,
    theta1: float,
    theta2: float,
    theta3: float,
    zeta: Optional[float] = None,
) -> ErrorConstants:
    """Compute a1 to a4, and a5, a6 when ``zeta`` is given.

    ``a1`` is evaluated exactly in its printed ratio form.

    Raises:
        ValueError: If ``p <= -gamma^-``, ``rho <= 0`` or a theta is negative.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if min(theta1, theta2, theta3) < 0:
        raise ValueError("Hoffman constants must be non-negative")
    shift = _require_strong_convexity(p, gamma_minus)
    c = dual_curvature(p, gamma_minus, gamma_plus, rho)
    sigma = perturbation_constants(p, gamma_minus, gamma_plus, b_max, zeta)

    a1 = (theta1**2 / (2.0 * rho) * c**2 + rho) / c
    a2 = theta1**4 / rho**2 * c**2 + 2.0 * theta1**2
    a3 = theta2**2 * ((p + gamma_plus) ** 2 * sigma.sigma3**2 + b_max**2 * sigma.sigma3**2 / rho**2)
    a4 = (
        0.5 * (theta3**2 / shift + rho**2 * theta3**2 * (p + gamma_plus)) ** 2
        + theta3**2 / rho**2
    )
    a5 = a6 = None
    if sigma.sigma4 is not None:
        a5 = b_max**2 * sigma.sigma4**2 / (c * rho)
        a6 = 2.0 * theta1**2 * b_max**2 * sigma.sigma4**2 / rho**2
    return ErrorConstants(a1=a1, a2=a2, a3=a3, a4=a4, a5=a5, a6=a6)


def kappa(p: float, gamma_plus: float, n_agents: int, b_max: float) -> float:
    """KKT scaling factor ``max{2 (p^2 + gamma+^2), N B_max^2}``."""
    return max(2.0 * (p**2 + gamma_plus**2), n_agents * b_max**2)


@dataclass(frozen=True)
class DescentConstants:
    """Coefficients of the potential-descent inequality; informational only."""

    c1: float
    c2: float
    c3: float
    c4: Optional[float] = None

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def descent_constants(
    sigma: PerturbationConstants,
    errors: ErrorConstants,
    *,
    p: float,
    rho: float,
    gamma_minus: float,
    gamma_plus: float,
    b_max: float,
    lambda_max: float,
    alpha: float,
    beta: float,
    zeta: Optional[float] = None,
) -> DescentConstants:
    """Evaluate C1 to C3, and C4 for the inexact algorithm.

    Uses the descent-proof choice ``delta = 20 p sigma2^2 a2 lambda_max^2 / rho``.
    Terms whose denominator vanishes (no coupling, or zero Hoffman constant)
    are dropped.
    """
    lam_sq = lambda_max**2
    weight = sigma.sigma2**2 * errors.a2 * lam_sq

    c1 = (rho - 5.0 * alpha) / 2.0
    c2 = rho - (2.0 * alpha * errors.a1 + rho / (5.0 * lam_sq)) * lam_sq if lam_sq > 0 else rho

    delta = 20.0 * p * weight / rho
    coupling_term = (
        rho * (sigma.sigma1**2 + 2.0 * sigma.sigma2**2 * errors.a3) / (10.0 * p * weight)
        if weight > 0
        else math.inf
    )
    c3 = p * (-0.5 + 1.0 / beta - delta - coupling_term)

    c4 = None
    if zeta is not None and sigma.sigma4 is not None:
        a5 = errors.a5 or 0.0
        a6 = errors.a6 or 0.0
        scale = errors.a2 * lam_sq
        inexact_term = (rho - 0.5) * a6 / (5.0 * scale) if scale > 0 else 0.0
        c4 = (
            1.0 / zeta
            - (gamma_plus - gamma_minus) / 2.0
            - 2.0 * alpha * a5
            - inexact_term
            - b_max**2 * sigma.sigma4**2 / 2.0
        )
    return DescentConstants(c1=c1, c2=c2, c3=c3, c4=c4)
