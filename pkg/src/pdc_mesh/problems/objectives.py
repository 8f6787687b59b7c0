"""Smooth local objectives f_i owned by the agents.

Each objective exposes its dimension, value, gradient and a curvature
enclosure ``(gamma_minus, gamma_plus)``: ``gamma_plus`` is a Lipschitz
constant of the gradient and ``gamma_minus`` a (possibly negative) lower
curvature bound. Objectives hold only read-only arrays, so evaluation is
reentrant across agent worker threads.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Sequence

import numpy as np
from scipy.linalg import block_diag
from scipy.special import expit, log_softmax, softmax


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=float, copy=True)
    out.flags.writeable = False
    return out


class LocalObjective(ABC):
    """Abstract smooth local objective."""

    dim: int

    @abstractmethod
    def value(self, x: np.ndarray) -> float:
        """Objective value at ``x``."""

    @abstractmethod
    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Gradient at ``x``."""

    @property
    @abstractmethod
    def curvature_bounds(self) -> tuple[float, float]:
        """``(gamma_minus, gamma_plus)``."""

    @property
    def is_quadratic(self) -> bool:
        return False


class QuadraticObjective(LocalObjective):
    """``f(x) = 0.5 x^T Q x + c^T x`` with symmetric ``Q``.

    Args:
        hessian: Symmetric matrix Q.
        linear: Vector c.
        curvature: Optional exact ``(gamma_minus, gamma_plus)``; computed from
            the eigenvalues of Q when omitted.
    """

    def __init__(
        self,
        hessian: np.ndarray,
        linear: np.ndarray,
        curvature: tuple[float, float] | None = None,
    ) -> None:
        hessian = np.atleast_2d(np.asarray(hessian, dtype=float))
        linear = np.atleast_1d(np.asarray(linear, dtype=float))
        if hessian.shape != (linear.size, linear.size):
            raise ValueError(
                f"Hessian shape {hessian.shape} does not match linear term of size {linear.size}"
            )
        if not np.allclose(hessian, hessian.T, atol=1e-12):
            raise ValueError("Hessian must be symmetric")
        self.hessian = _frozen(0.5 * (hessian + hessian.T))
        self.linear = _frozen(linear)
        self.dim = linear.size
        if curvature is None:
            eigs = np.linalg.eigvalsh(self.hessian)
            curvature = (float(eigs.min()), float(np.abs(eigs).max()))
        self._curvature = (float(curvature[0]), float(curvature[1]))

    def value(self, x: np.ndarray) -> float:
        return float(0.5 * x @ (self.hessian @ x) + self.linear @ x)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.hessian @ x + self.linear

    @property
    def curvature_bounds(self) -> tuple[float, float]:
        return self._curvature

    @property
    def is_quadratic(self) -> bool:
        return True


class ZeroObjective(QuadraticObjective):
    """Identically zero objective (NN feature owners)."""

    def __init__(self, dim: int) -> None:
        super().__init__(np.zeros((dim, dim)), np.zeros(dim), curvature=(0.0, 0.0))


class LogisticLossObjective(LocalObjective):
    """``Psi(u) = sum_k log(1 + exp(-v_k u_k))`` for labels ``v_k`` in {-1, +1}."""

    def __init__(self, labels: np.ndarray) -> None:
        labels = np.asarray(labels, dtype=float).ravel()
        if not np.all(np.isin(labels, (-1.0, 1.0))):
            raise ValueError("Logistic loss needs labels in {-1, +1}")
        self.labels = _frozen(labels)
        self.dim = labels.size

    def value(self, x: np.ndarray) -> float:
        return float(np.logaddexp(0.0, -self.labels * x).sum())

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return -self.labels * expit(-self.labels * x)

    @property
    def curvature_bounds(self) -> tuple[float, float]:
        return (0.0, 0.25)


class NonconvexPenaltyObjective(LocalObjective):
    """``R(w) = lam * sum_s xi w_s^2 / (1 + xi w_s^2)``.

    The second derivative ``2 lam xi (1 - 3 xi w^2) / (1 + xi w^2)^3`` lies in
    ``[-lam xi / 2, 2 lam xi]``; the symmetric enclosure ``+-2 lam xi`` is
    reported.
    """

    def __init__(self, dim: int, lam: float, xi: float) -> None:
        if lam <= 0 or xi <= 0:
            raise ValueError(f"lam and xi must be positive, got lam={lam}, xi={xi}")
        self.dim = dim
        self.lam = float(lam)
        self.xi = float(xi)

    def value(self, x: np.ndarray) -> float:
        sq = self.xi * x * x
        return float(self.lam * np.sum(sq / (1.0 + sq)))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        denom = 1.0 + self.xi * x * x
        return 2.0 * self.lam * self.xi * x / (denom * denom)

    @property
    def curvature_bounds(self) -> tuple[float, float]:
        bound = 2.0 * self.lam * self.xi
        return (-bound, bound)


class SoftmaxHeadObjective(LocalObjective):
    """Cross-entropy of a ReLU + linear + softmax head over layer outputs.

    The variable is ``[w0; theta]`` where ``w0`` stacks the M hidden
    pre-activations ``h_k`` (K each, sample-major) and ``theta`` stacks the
    output weights ``V`` (C x K, row-major) followed by the bias ``c`` (C).
    The loss is ``sum_k CE(softmax(V relu(h_k) + c), y_k)``.

    The head is non-smooth at ReLU kinks, so its curvature bounds are a
    sampled estimate supplied by the builder.
    """

    def __init__(
        self,
        labels_onehot: np.ndarray,
        hidden: int,
        curvature: tuple[float, float] = (0.0, 1.0),
    ) -> None:
        labels_onehot = np.asarray(labels_onehot, dtype=float)
        if labels_onehot.ndim != 2:
            raise ValueError("Softmax head needs one-hot labels of shape (M, C)")
        self.labels = _frozen(labels_onehot)
        self.n_samples, self.n_classes = labels_onehot.shape
        self.hidden = hidden
        self.n_layer = self.n_samples * hidden
        self.n_theta = self.n_classes * hidden + self.n_classes
        self.dim = self.n_layer + self.n_theta
        self._curvature = curvature

    def unpack(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Split ``x`` into ``(H (M x K), V (C x K), c (C))``."""
        k, c = self.hidden, self.n_classes
        layer = x[: self.n_layer].reshape(self.n_samples, k)
        weights = x[self.n_layer : self.n_layer + c * k].reshape(c, k)
        bias = x[self.n_layer + c * k :]
        return layer, weights, bias

    def logits(self, x: np.ndarray) -> np.ndarray:
        layer, weights, bias = self.unpack(x)
        return np.maximum(layer, 0.0) @ weights.T + bias

    def value(self, x: np.ndarray) -> float:
        return float(-(self.labels * log_softmax(self.logits(x), axis=1)).sum())

    def gradient(self, x: np.ndarray) -> np.ndarray:
        layer, weights, bias = self.unpack(x)
        active = np.maximum(layer, 0.0)
        err = softmax(active @ weights.T + bias, axis=1) - self.labels
        grad_layer = (err @ weights) * (layer > 0.0)
        grad_weights = err.T @ active
        grad_bias = err.sum(axis=0)
        return np.concatenate([grad_layer.ravel(), grad_weights.ravel(), grad_bias])

    @property
    def curvature_bounds(self) -> tuple[float, float]:
        return self._curvature


class SeparableObjective(LocalObjective):
    """Sum of objectives over consecutive slices of one variable."""

    def __init__(self, parts: Sequence[LocalObjective]) -> None:
        if not parts:
            raise ValueError("SeparableObjective needs at least one part")
        self.parts = tuple(parts)
        self.offsets = np.cumsum([0] + [part.dim for part in self.parts])
        self.dim = int(self.offsets[-1])

    def _slices(self) -> list[slice]:
        return [slice(int(a), int(b)) for a, b in zip(self.offsets[:-1], self.offsets[1:])]

    def value(self, x: np.ndarray) -> float:
        return float(sum(part.value(x[s]) for part, s in zip(self.parts, self._slices())))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return np.concatenate(
            [part.gradient(x[s]) for part, s in zip(self.parts, self._slices())]
        )

    @property
    def curvature_bounds(self) -> tuple[float, float]:
        bounds = [part.curvature_bounds for part in self.parts]
        return (min(lo for lo, _ in bounds), max(hi for _, hi in bounds))

    @property
    def is_quadratic(self) -> bool:
        return all(part.is_quadratic for part in self.parts)


def quadratic_terms(objective: LocalObjective) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(Q, c)`` of a quadratic objective, including separable sums.

    Raises:
        TypeError: If the objective is not quadratic.
    """
    if isinstance(objective, QuadraticObjective):
        return np.array(objective.hessian), np.array(objective.linear)
    if isinstance(objective, SeparableObjective) and objective.is_quadratic:
        terms = [quadratic_terms(part) for part in objective.parts]
        return block_diag(*[q for q, _ in terms]), np.concatenate([c for _, c in terms])
    raise TypeError(f"{type(objective).__name__} is not a quadratic objective")
