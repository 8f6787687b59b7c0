"""Admissible step sizes and the constant sheet of an instance.

:func:`build_constant_sheet` gathers every constant for a problem, graph and
parameter choice; :func:`check_regime` tells whether concrete solver settings
lie inside the region where descent of the potential is proven.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

from pdc_mesh.engine.state import SolverConfig
from pdc_mesh.errors import ConfigError, RankDeficientCouplingError
from pdc_mesh.problems.coupled import CoupledProblem
from pdc_mesh.theory.constants import (
    DescentConstants,
    ErrorConstants,
    PerturbationConstants,
    descent_constants,
    error_constants,
    kappa,
    perturbation_constants,
)
from pdc_mesh.theory.hoffman import FullRankBounds, hoffman_estimates, theta_bounds_fullrank
from pdc_mesh.topology.graph import Graph
from pdc_mesh.topology.matrices import SpectralSummary, derive_matrices, spectral_summary

logger = logging.getLogger(__name__)

THETA_MODES: tuple[str, ...] = ("auto", "direct", "bound")
DENSE_HOFFMAN_LIMIT = 600


def _ratio(numerator: float, denominator: float) -> float:
    """``numerator / denominator`` with an infinite cap for non-positive denominators."""
    return numerator / denominator if denominator > 0 else math.inf


@dataclass(frozen=True)
class IpdcConditions:
    """Parameter region of the inexact algorithm.

    Attributes:
        rho_ok: Whether ``rho > 1/2``.
        p_min: Strict lower bound on p.
        zeta_min: Strict lower bound on zeta, ``1 / (p + gamma^-)``.
        zeta_max: Strict upper bound on zeta.
        alpha_max: Strict upper bound on alpha at the given zeta.
    """

    rho_ok: bool
    p_min: float
    zeta_min: float
    zeta_max: float
    alpha_max: float

    @property
    def zeta_interval_empty(self) -> bool:
        return self.zeta_min >= self.zeta_max


@dataclass(frozen=True)
class StepBounds:
    alpha_max: float
    beta_max: float
    ipdc: Optional[IpdcConditions] = None


def step_bounds(
    sigma: PerturbationConstants,
    errors: ErrorConstants,
    spectra: SpectralSummary,
    *,
    p: float,
    rho: float,
    gamma_minus: float,
    gamma_plus: float,
    b_max: float,
    theta1: float,
    zeta: Optional[float] = None,
) -> StepBounds:
    """Step-size caps of the exact algorithm, plus the inexact region for a given zeta.

    ``beta_max`` is 0 when ``sigma2^2 a2 lambda_max^2`` vanishes, since the
    bracket of its reciprocal is then unbounded.
    """
    lam_sq = spectra.lambda_max_plus**2
    alpha_max = min(rho / 5.0, _ratio(rho, 8.0 * errors.a1 * lam_sq))

    weight = sigma.sigma2**2 * errors.a2 * lam_sq
    if weight > 0:
        bracket = (
            0.5
            + 20.0 * p * weight / rho
            + rho * (sigma.sigma1**2 + 2.0 * sigma.sigma2**2 * errors.a3) / (10.0 * p * weight)
        )
        beta_max = 1.0 / bracket
    else:
        beta_max = 0.0

    ipdc = None
    if zeta is not None:
        shift = p + gamma_minus
        b_sq = b_max**2
        p_min = max(
            gamma_plus - 2.0 * gamma_minus,
            _ratio(32.0 * (2.0 * rho - 1.0) * b_sq, 5.0 * lam_sq * rho**2) - gamma_minus
            if b_sq > 0
            else -gamma_minus,
            32.0 * b_sq - gamma_minus,
            (2.0 * gamma_plus - 7.0 * gamma_minus) / 5.0,
        )
        zeta_max = min(
            _ratio(5.0, 2.0 * (gamma_plus - gamma_minus)),
            2.0 / (p + gamma_plus),
            _ratio(1.0, 32.0 * b_sq),
            _ratio(5.0 * errors.a2 * lam_sq * rho**2, 64.0 * (2.0 * rho - 1.0) * theta1**2 * b_sq),
        )
        alpha_cap = min(
            rho / 5.0,
            _ratio(2.0 * rho - 1.0, 16.0 * errors.a1 * lam_sq),
            _ratio(
                rho * zeta * shift * (1.0 + rho**2 * (p + gamma_plus)),
                8.0 * b_sq * (zeta * shift + 3.0) ** 2,
            ),
        )
        ipdc = IpdcConditions(
            rho_ok=rho > 0.5,
            p_min=p_min,
            zeta_min=1.0 / shift,
            zeta_max=zeta_max,
            alpha_max=alpha_cap,
        )
        if ipdc.zeta_interval_empty:
            logger.warning(
                "Empty zeta interval (%.3e, %.3e); p=%.3g is too small",
                ipdc.zeta_min,
                ipdc.zeta_max,
                p,
            )
    return StepBounds(alpha_max=alpha_max, beta_max=beta_max, ipdc=ipdc)


@dataclass(frozen=True)
class ConstantSheet:
    """Every constant of the analysis for one instance and parameter choice.

    ``theta1`` equals ``theta2``; both come from the same linear system.
    ``theta_source`` names where the thetas came from (``direct`` or
    ``bound``). Direct estimates and closed-form bounds are reported side by
    side when both are available.
    """

    p: float
    rho: float
    zeta: Optional[float]
    gamma_minus: float
    gamma_plus: float
    b_max: float
    n_agents: int
    spectra: SpectralSummary
    sigma: PerturbationConstants
    errors: ErrorConstants
    theta1: float
    theta2: float
    theta3: float
    theta_source: str
    theta_direct: Optional[tuple[float, float]]
    fullrank: Optional[FullRankBounds]
    kappa: float
    steps: StepBounds
    descent: Optional[DescentConstants] = None
    notes: list[str] = field(default_factory=list)

    @property
    def zeta_b(self) -> Optional[float]:
        return None if self.fullrank is None else self.fullrank.zeta_b

    @property
    def alpha_max_pdc(self) -> float:
        return self.steps.alpha_max

    @property
    def beta_max(self) -> float:
        return self.steps.beta_max

    def to_dict(self) -> dict[str, Any]:
        """Flat JSON-ready mapping."""
        data: dict[str, Any] = {
            "p": self.p,
            "rho": self.rho,
            "zeta": self.zeta,
            "gamma_minus": self.gamma_minus,
            "gamma_plus": self.gamma_plus,
            "b_max": self.b_max,
            "n_agents": self.n_agents,
        }
        data.update(self.spectra.to_dict())
        data.update(asdict(self.sigma))
        data.update(asdict(self.errors))
        data.update(
            {
                "theta1": self.theta1,
                "theta2": self.theta2,
                "theta3": self.theta3,
                "theta_source": self.theta_source,
                "theta12_direct": None if self.theta_direct is None else self.theta_direct[0],
                "theta3_direct": None if self.theta_direct is None else self.theta_direct[1],
                "zeta_b": self.zeta_b,
                "kappa": self.kappa,
                "alpha_max_pdc": self.alpha_max_pdc,
                "beta_max": self.beta_max,
            }
        )
        if self.fullrank is not None:
            data["theta12_bound"] = self.fullrank.theta12
            data["theta3_bound"] = self.fullrank.theta3
            data.update(asdict(self.fullrank.singular_values))
        if self.steps.ipdc is not None:
            ipdc = self.steps.ipdc
            data.update(
                {
                    "ipdc_rho_ok": ipdc.rho_ok,
                    "ipdc_p_min": ipdc.p_min,
                    "ipdc_zeta_min": ipdc.zeta_min,
                    "ipdc_zeta_max": ipdc.zeta_max,
                    "ipdc_alpha_max": ipdc.alpha_max,
                }
            )
        if self.descent is not None:
            data.update({f"descent_{k}": v for k, v in self.descent.to_dict().items()})
        data["notes"] = list(self.notes)
        return data


def build_constant_sheet(
    problem: CoupledProblem,
    graph: Graph,
    p: float,
    rho: float,
    zeta: Optional[float] = None,
    theta_mode: str = "auto",
    alpha: Optional[float] = None,
    beta: Optional[float] = None,
    dense_limit: int = DENSE_HOFFMAN_LIMIT,
) -> ConstantSheet:
    """Assemble the constant sheet of an instance.

    Args:
        problem: Coupled problem.
        graph: Connected agent graph.
        p: Proximal weight.
        rho: Penalty parameter.
        zeta: Gradient step; enables sigma4, a5, a6 and the inexact region.
        theta_mode: ``direct`` (Hoffman estimate on M1/M2), ``bound``
            (closed-form full-rank bounds) or ``auto`` (direct when the dense
            size allows, else bound).
        alpha: With ``beta``, also evaluate the descent constants.
        beta: See ``alpha``.
        dense_limit: Largest ``N*M`` for the direct estimate.

    Raises:
        ConfigError: Unknown theta mode, or no theta source is available.
        DisconnectedGraphError: The graph is not connected.
        ValueError: ``p <= -gamma^-`` or ``rho <= 0``.
    """
    if theta_mode not in THETA_MODES:
        raise ConfigError(f"theta_mode must be one of {THETA_MODES}, got {theta_mode!r}")
    spectra = spectral_summary(derive_matrices(graph))
    spectra.require_connected()
    gamma_minus, gamma_plus, b_max = problem.gamma_minus, problem.gamma_plus, problem.b_max
    notes: list[str] = []

    theta_direct: Optional[tuple[float, float]] = None
    size = problem.n_agents * problem.m_constraints
    if theta_mode in ("auto", "direct"):
        if size <= dense_limit:
            theta_direct = hoffman_estimates(problem, graph)
        else:
            message = f"Direct Hoffman estimate skipped: N*M={size} exceeds {dense_limit}"
            logger.warning(message)
            notes.append(message)

    fullrank: Optional[FullRankBounds] = None
    try:
        fullrank = theta_bounds_fullrank(spectra, problem)
    except RankDeficientCouplingError as err:
        notes.append(f"Closed-form theta bounds unavailable: {err}")
        logger.info("Closed-form theta bounds unavailable: %s", err)

    if theta_mode == "direct" and theta_direct is None:
        raise ConfigError("theta_mode 'direct' needs N*M within the dense limit")
    if theta_mode == "bound" and fullrank is None:
        raise ConfigError("theta_mode 'bound' needs a full row rank coupling matrix")

    if theta_direct is not None and theta_mode != "bound":
        theta12, theta3 = theta_direct
        source = "direct"
    elif fullrank is not None:
        theta12, theta3 = fullrank.theta12, fullrank.theta3
        source = "bound"
    else:
        raise ConfigError(
            "No Hoffman estimate available: instance too large for the direct estimate "
            "and the coupling matrix is rank deficient"
        )

    sigma = perturbation_constants(p, gamma_minus, gamma_plus, b_max, zeta)
    errors = error_constants(
        p, gamma_minus, gamma_plus, b_max, rho, theta12, theta12, theta3, zeta
    )
    steps = step_bounds(
        sigma,
        errors,
        spectra,
        p=p,
        rho=rho,
        gamma_minus=gamma_minus,
        gamma_plus=gamma_plus,
        b_max=b_max,
        theta1=theta12,
        zeta=zeta,
    )
    descent = None
    if alpha is not None and beta is not None:
        descent = descent_constants(
            sigma,
            errors,
            p=p,
            rho=rho,
            gamma_minus=gamma_minus,
            gamma_plus=gamma_plus,
            b_max=b_max,
            lambda_max=spectra.lambda_max_plus,
            alpha=alpha,
            beta=beta,
            zeta=zeta,
        )

    return ConstantSheet(
        p=p,
        rho=rho,
        zeta=zeta,
        gamma_minus=gamma_minus,
        gamma_plus=gamma_plus,
        b_max=b_max,
        n_agents=problem.n_agents,
        spectra=spectra,
        sigma=sigma,
        errors=errors,
        theta1=theta12,
        theta2=theta12,
        theta3=theta3,
        theta_source=source,
        theta_direct=theta_direct,
        fullrank=fullrank,
        kappa=kappa(p, gamma_plus, problem.n_agents, b_max),
        steps=steps,
        descent=descent,
        notes=notes,
    )


@dataclass(frozen=True)
class Condition:
    """One named inequality of the regime check."""

    name: str
    value: float
    bound: float
    satisfied: bool


@dataclass(frozen=True)
class RegimeVerdict:
    mode: str
    conditions: tuple[Condition, ...]

    @property
    def inside(self) -> bool:
        return all(c.satisfied for c in self.conditions)

    def failed(self) -> list[Condition]:
        return [c for c in self.conditions if not c.satisfied]

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "inside": self.inside,
            "conditions": [asdict(c) for c in self.conditions],
        }


def check_regime(sheet: ConstantSheet, config: SolverConfig) -> RegimeVerdict:
    """Compare solver settings against the sheet's admissible region.

    Raises:
        ConfigError: If the settings' p or rho differ from the sheet's, or an
            inexact run is checked against a sheet built without zeta.
    """
    if not (math.isclose(config.p, sheet.p) and math.isclose(config.rho, sheet.rho)):
        raise ConfigError("Sheet was built for a different p or rho than the settings")
    conditions = [
        Condition("p > -gamma_minus", config.p, -sheet.gamma_minus, config.p > -sheet.gamma_minus),
        Condition("beta < beta_max", config.beta, sheet.beta_max, config.beta < sheet.beta_max),
    ]
    if config.mode == "exact_pdc":
        cap = sheet.alpha_max_pdc
        conditions.append(Condition("alpha <= alpha_max", config.alpha, cap, config.alpha <= cap))
    else:
        ipdc = sheet.steps.ipdc
        zeta = config.zeta
        if ipdc is None or zeta is None:
            raise ConfigError("Inexact regime check needs a sheet built with zeta")
        conditions += [
            Condition("rho > 1/2", config.rho, 0.5, ipdc.rho_ok),
            Condition("p > p_min", config.p, ipdc.p_min, config.p > ipdc.p_min),
            Condition("zeta > zeta_min", zeta, ipdc.zeta_min, zeta > ipdc.zeta_min),
            Condition("zeta < zeta_max", zeta, ipdc.zeta_max, zeta < ipdc.zeta_max),
            Condition(
                "alpha < alpha_max", config.alpha, ipdc.alpha_max, config.alpha < ipdc.alpha_max
            ),
        ]
    verdict = RegimeVerdict(mode=config.mode, conditions=tuple(conditions))
    for failed in verdict.failed():
        logger.info(
            "Outside the proven regime: %s (%.6g vs %.6g)", failed.name, failed.value, failed.bound
        )
    return verdict
