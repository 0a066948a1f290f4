"""
Gaussian profiles and exact Gaussian moment integrals.

Every integrand in the sector engine is, after the blow-up, a polynomial times a Gaussian in
the vertex positions. A `GaussianProfile` stores one such term in information form,

    weight · poly(X) · exp(-½ Σ_μ X^μᵀ Λ X^μ + Σ_μ η^μ·X^μ + offset),

where X^μ ∈ ℝ^n collects the μ-th coordinate of the n vertices. The precision Λ is shared by all
d spatial directions. Integrals are evaluated in closed form with Stein's recursion for the
polynomial moments. The same code runs on numpy batches and on `TaylorArray` jets.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from itertools import product
from logging import getLogger
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from germrenorm.common.multiindex import MultiIndex
from germrenorm.core.exceptions import DimensionMismatchError, NumericalError
from germrenorm.numerics.taylor import TaylorArray

logger = getLogger(__name__)

Polynomial = Tuple[Tuple[MultiIndex, float], ...]


@dataclass(frozen=True)
class GaussianMixture:
    """
    A radial function written as Σ_n weights[n] · exp(-alphas[n] · |x - y|²_g).

    Attributes:
        weights (np.ndarray): mixture weights.
        alphas (np.ndarray): positive Gaussian rates.
    """

    weights: np.ndarray
    alphas: np.ndarray

    def __len__(self) -> int:
        return len(self.weights)

    def __call__(self, r2: np.ndarray) -> np.ndarray:
        r2 = np.asarray(r2, dtype=float)
        return np.sum(self.weights * np.exp(-np.multiply.outer(r2, self.alphas)), axis=-1)


@dataclass(frozen=True)
class GaussianProfile:
    """One polynomial × Gaussian term over the positions of n vertices in ℝ^d."""

    weight: float
    poly: Polynomial
    precision: np.ndarray
    eta: np.ndarray
    offset: float = 0.0

    @property
    def n(self) -> int:
        return self.precision.shape[0]

    @property
    def d(self) -> int:
        return self.eta.shape[1]

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.poly), default=0)

    def coupled(self, a: int, b: int, rate: float, factor: float = 1.0) -> "GaussianProfile":
        """Multiply by factor · exp(-rate · |X_a - X_b|²), vertices given by position index."""
        precision = self.precision.copy()
        precision[a, a] += 2.0 * rate
        precision[b, b] += 2.0 * rate
        precision[a, b] -= 2.0 * rate
        precision[b, a] -= 2.0 * rate
        return replace(self, weight=self.weight * factor, precision=precision)

    def scaled(self, factor: float) -> "GaussianProfile":
        return replace(self, weight=self.weight * factor)

    def fingerprint(self) -> bytes:
        """Stable digest used by the χ-jet caches."""
        digest = hashlib.sha256()
        digest.update(np.float64(self.weight).tobytes())
        digest.update(np.float64(self.offset).tobytes())
        digest.update(np.ascontiguousarray(self.precision, dtype=float).tobytes())
        digest.update(np.ascontiguousarray(self.eta, dtype=float).tobytes())
        for exps, coef in self.poly:
            digest.update(np.asarray(exps, dtype=np.int64).tobytes())
            digest.update(np.float64(coef).tobytes())
        return digest.digest()


def couple_mixtures(
    profiles: Sequence[GaussianProfile],
    couplings: Sequence[Tuple[int, int, GaussianMixture]],
    metric_scale: float = 1.0,
) -> List[GaussianProfile]:
    """
    Multiply every profile by ∏ mixture(|X_a - X_b|²_g), expanding into one profile per choice of
    mixture nodes. The metric must be metric_scale · I.
    """
    out = list(profiles)
    for a, b, mixture in couplings:
        expanded: List[GaussianProfile] = []
        for profile in out:
            for weight, alpha in zip(mixture.weights, mixture.alphas):
                expanded.append(profile.coupled(a, b, float(alpha) * metric_scale, float(weight)))
        out = expanded
    return out


def _exp(x: Any) -> Any:
    return x.exp() if isinstance(x, TaylorArray) else np.exp(x)


def _power(x: Any, exponent: float) -> Any:
    return x.power(exponent) if isinstance(x, TaylorArray) else np.power(x, exponent)


def gaussian_moment(
    poly: Polynomial,
    mean: Sequence[Sequence[Any]],
    cov: Sequence[Sequence[Any]],
    d: int,
    one: Any,
) -> Any:
    """
    E[poly(X)] for X^μ ~ N(mean[:, μ], cov), independent across μ.

    Stein's identity E[X_i X^β] = m_i E[X^β] + Σ_j Cov(i, j) β_j E[X^{β-e_j}] is applied on the
    first nonzero slot of β. Coordinates are laid out vertex-major: slot v·d + μ.

    Args:
        poly: ((exponents, coefficient), ...) over n·d coordinates.
        mean: mean[v][μ].
        cov: cov[v][w], shared by all directions μ.
        d: spatial dimension.
        one: multiplicative unit of the arithmetic (1.0, an array, or a TaylorArray).
    """
    cache: Dict[MultiIndex, Any] = {}

    def moment(beta: MultiIndex) -> Any:
        if beta in cache:
            return cache[beta]
        first = next((i for i, b in enumerate(beta) if b), None)
        if first is None:
            return one
        v, mu = divmod(first, d)
        reduced = beta[:first] + (beta[first] - 1,) + beta[first + 1 :]
        out = mean[v][mu] * moment(reduced)
        for j, bj in enumerate(reduced):
            if bj and j % d == mu:
                lowered = reduced[:j] + (bj - 1,) + reduced[j + 1 :]
                out = out + cov[v][j // d] * (moment(lowered) * bj)
        cache[beta] = out
        return out

    total = one * 0.0
    for exps, coef in poly:
        if coef:
            total = total + moment(tuple(exps)) * coef
    return total


def profile_value(profile: GaussianProfile, cov: Sequence[Sequence[Any]], det: Any, one: Any):
    """
    Closed-form Gaussian integral of a profile once the quadratic form has been inverted.

    With C the covariance of X and det the determinant of the precision in the integration
    variables, the integral is
    weight · (2π)^{nd/2} det^{-d/2} exp(offset + ½ Σ_μ η^μᵀ C η^μ) · E[poly(X)], E[X^μ] = C η^μ.
    """
    n, d = profile.n, profile.d
    eta = profile.eta
    gram = eta @ eta.T
    quad = one * profile.offset
    mean: List[List[Any]] = []
    for v in range(n):
        row = []
        for mu in range(d):
            acc = one * 0.0
            for w in range(n):
                if eta[w, mu]:
                    acc = acc + cov[v][w] * float(eta[w, mu])
            row.append(acc)
        mean.append(row)
        for w in range(n):
            if gram[v, w]:
                quad = quad + cov[v][w] * (0.5 * float(gram[v, w]))
    scale = profile.weight * (2.0 * np.pi) ** (n * d / 2.0)
    moment = gaussian_moment(profile.poly, mean, cov, d, one)
    return _exp(quad) * _power(det, -d / 2.0) * moment * scale


def integrate_profile(profile: GaussianProfile, extra: Optional[np.ndarray] = None) -> np.ndarray:
    """
    ∫ profile(X) dX over (ℝ^d)^n, with an optional batch of extra precisions (M, n, n) added to
    the profile's own (for Laplacian-type factors exp(-½ Σ_μ X^μᵀ extra X^μ)).

    Returns:
        np.ndarray: shape (M,), or (1,) when extra is None.
    """
    n = profile.n
    if extra is None:
        extra = np.zeros((1, n, n))
    if extra.shape[1:] != (n, n):
        raise DimensionMismatchError(f"extra precision of shape {extra.shape} for {n} vertices")
    precision = profile.precision[None, :, :] + extra
    sign, logdet = np.linalg.slogdet(precision)
    if np.any(sign <= 0):
        raise NumericalError("Gaussian integrand is not decaying in every direction")
    cov_arr = np.linalg.inv(precision)
    cov = [[cov_arr[:, v, w] for w in range(n)] for v in range(n)]
    one = np.ones(precision.shape[0])
    return profile_value(profile, cov, np.exp(logdet), one)


def tensor_nodes(mixtures: Sequence[GaussianMixture]) -> Tuple[np.ndarray, np.ndarray]:
    """All combinations of mixture nodes: (weights (N,), alphas (N, len(mixtures)))."""
    if not mixtures:
        return np.ones(1), np.zeros((1, 0))
    weights = np.array([np.prod(c) for c in product(*(m.weights for m in mixtures))])
    alphas = np.array(list(product(*(m.alphas for m in mixtures))))
    return weights, alphas


__all__ = [
    "GaussianMixture",
    "GaussianProfile",
    "Polynomial",
    "couple_mixtures",
    "gaussian_moment",
    "integrate_profile",
    "profile_value",
    "tensor_nodes",
]
