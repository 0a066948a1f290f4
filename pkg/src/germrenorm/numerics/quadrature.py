"""
Quadrature rules.

Double-exponential rules for endpoint-singular integrals on [0, 1] and [a, ∞), Gauss rules for
smooth compact or Gaussian-weighted axes, and a Gauss–Jacobi rule used to turn the Green tail
into a Gaussian mixture. All rules return numpy arrays so integrands can be vectorized.
"""

from dataclasses import dataclass
from functools import lru_cache
from logging import getLogger
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy.special import expit, roots_jacobi

from germrenorm.core.exceptions import QuadratureError

logger = getLogger(__name__)

_U_MAX_UNIT = 4.0
_U_MAX_HALF_LINE = 5.5


@dataclass(frozen=True)
class UnitRule:
    """Nodes on (0, 1] with weights, plus log(nodes) computed without cancellation."""

    nodes: np.ndarray
    weights: np.ndarray
    log_nodes: np.ndarray
    steps: np.ndarray

    def __len__(self) -> int:
        return len(self.nodes)


@lru_cache(maxsize=32)
def tanh_sinh_unit(level: int) -> UnitRule:
    """
    Tanh–sinh rule on [0, 1] with step h = 2^-level.

    x(u) = 1 / (1 + exp(-π sinh u)), so both endpoints are approached double exponentially and
    integrable algebraic or logarithmic singularities at t = 0 are absorbed.

    Args:
        level (int): refinement level, h = 2^-level.

    Returns:
        UnitRule: nodes, weights and log(nodes).
    """
    h = 2.0**-level
    k = int(np.ceil(_U_MAX_UNIT / h))
    u = h * np.arange(-k, k + 1, dtype=float)
    v = np.pi * np.sinh(u)
    nodes = expit(v)
    weights = h * np.pi * np.cosh(u) * expit(v) * expit(-v)
    log_nodes = -np.logaddexp(0.0, -v)
    keep = weights > 1e-300
    return UnitRule(nodes[keep], weights[keep], log_nodes[keep], np.arange(-k, k + 1)[keep])


def coarse_weights(rule: UnitRule) -> np.ndarray:
    """Weights of the rule one level coarser, laid out on the nodes of `rule` (zero off-grid)."""
    return np.where(rule.steps % 2 == 0, 2.0 * rule.weights, 0.0)


@lru_cache(maxsize=32)
def exp_sinh(level: int, start: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Exp–sinh rule on [start, ∞): t(u) = start + exp((π/2) sinh u).

    Args:
        level (int): refinement level, h = 2^-level.
        start (float): lower limit.

    Returns:
        Tuple[np.ndarray, np.ndarray]: nodes and weights.
    """
    h = 2.0**-level
    k = int(np.ceil(_U_MAX_HALF_LINE / h))
    u = h * np.arange(-k, k + 1, dtype=float)
    e = np.exp(0.5 * np.pi * np.sinh(u))
    weights = h * 0.5 * np.pi * np.cosh(u) * e
    return start + e, weights


def integrate_unit(
    f: Callable[[np.ndarray], np.ndarray],
    *,
    tol: float = 1e-13,
    atol: float = 0.0,
    min_level: int = 3,
    max_level: int = 8,
) -> Tuple[complex, float]:
    """
    Adaptive tanh–sinh integration of a vectorized integrand over [0, 1].

    Returns:
        Tuple[complex, float]: value and the last level-to-level difference.

    Raises:
        QuadratureError: if max_level is reached without meeting tol.
    """
    return _refine(
        lambda level: _apply(f, tanh_sinh_unit(level)), tol, atol, min_level, max_level
    )


def integrate_half_line(
    f: Callable[[np.ndarray], np.ndarray],
    start: float = 1.0,
    *,
    tol: float = 1e-13,
    atol: float = 0.0,
    min_level: int = 3,
    max_level: int = 8,
) -> Tuple[complex, float]:
    """Adaptive exp–sinh integration of a vectorized integrand over [start, ∞)."""

    def at_level(level: int) -> complex:
        nodes, weights = exp_sinh(level, start)
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            values = np.nan_to_num(np.asarray(f(nodes)), nan=0.0, posinf=0.0, neginf=0.0)
        return complex(np.sum(weights * values))

    return _refine(at_level, tol, atol, min_level, max_level)


def _apply(f: Callable[[np.ndarray], np.ndarray], rule: UnitRule) -> complex:
    with np.errstate(under="ignore"):
        return complex(np.sum(rule.weights * np.asarray(f(rule.nodes))))


def _refine(
    at_level: Callable[[int], complex], tol: float, atol: float, min_level: int, max_level: int
) -> Tuple[complex, float]:
    previous = at_level(min_level - 1)
    error = float("inf")
    for level in range(min_level, max_level + 1):
        current = at_level(level)
        error = abs(current - previous)
        if error <= max(tol * abs(current), atol):
            return current, error
        previous = current
    if error <= max(1e3 * tol * abs(previous), atol):
        logger.debug("double-exponential rule stopped at error %.3e", error)
        return previous, error
    raise QuadratureError(
        f"double-exponential quadrature did not converge (error {error:.3e})",
        achieved_error=error,
    )


@lru_cache(maxsize=64)
def gauss_hermite(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gauss–Hermite nodes and weights for the weight exp(-x²) on ℝ.

    Args:
        n (int): number of nodes.
    """
    knots, weights = np.polynomial.hermite.hermgauss(n)
    return knots, weights


def gauss_legendre(a: float, b: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Compute the Gauss-Legendre quadrature points and weights on the interval [a, b].

    Args:
        a (float): Lower bound of the integration interval.
        b (float): Upper bound of the integration interval.
        n (int): Number of quadrature points.
    """
    knots, weights = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * knots + 0.5 * (b + a), 0.5 * (b - a) * weights


@lru_cache(maxsize=64)
def gauss_jacobi_unit(n: int, beta: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes and weights for ∫₀¹ u^beta f(u) du, beta > -1.

    Built from scipy's Jacobi roots for the weight (1+x)^beta on [-1, 1], mapped by u = (1+x)/2.
    """
    if beta <= -1:
        raise QuadratureError(f"Gauss–Jacobi weight u^{beta} is not integrable at 0")
    x, w = roots_jacobi(n, 0.0, beta)
    return 0.5 * (1.0 + x), w * 2.0 ** (-beta - 1.0)


def tensor_grid(
    rules: Sequence[Tuple[np.ndarray, np.ndarray]],
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Tensor product of one-dimensional rules.

    Returns:
        Tuple[np.ndarray, np.ndarray]: points of shape (N, len(rules)) and weights (N,).
    """
    if not rules:
        return np.zeros((1, 0)), np.ones(1)
    mesh = np.meshgrid(*(r[0] for r in rules), indexing="ij")
    wmesh = np.meshgrid(*(r[1] for r in rules), indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=-1)
    weights = np.prod(np.stack([w.ravel() for w in wmesh], axis=-1), axis=-1)
    return points, weights
