"""
Flat Euclidean geometry: ℝ^d with a constant metric and an optional mass.

Here every object of the heat-kernel expansion is exact: 𝐝²(x, y) = g(x-y, x-y), the heat
coefficients are a_k = (-m²)^k / k!, the cut-off is ψ ≡ 1 and there is no zero mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from germrenorm.core.exceptions import InputError, PreconditionError


@dataclass(frozen=True)
class FlatGeometry:
    """
    Attributes:
        dim (int): spatial dimension d ≥ 1.
        mass (float): m ≥ 0.
        metric (Tuple[Tuple[float, ...], ...]): constant symmetric positive matrix; empty means
            the identity.
    """

    dim: int
    mass: float = 0.0
    metric: Tuple[Tuple[float, ...], ...] = field(default=())

    def __post_init__(self) -> None:
        if int(self.dim) != self.dim or self.dim < 1:
            raise InputError(f"dimension must be a positive integer, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        if self.mass < 0 or not np.isfinite(self.mass):
            raise InputError(f"mass must be a nonnegative number, got {self.mass}")
        object.__setattr__(self, "mass", float(self.mass))
        if len(self.metric):
            matrix = np.asarray(self.metric, dtype=float)
            if matrix.shape != (self.dim, self.dim):
                raise InputError(f"metric must be {self.dim}×{self.dim}, got {matrix.shape}")
            if not np.allclose(matrix, matrix.T):
                raise InputError("metric must be symmetric")
            if np.any(np.linalg.eigvalsh(matrix) <= 0):
                raise InputError("metric must be positive definite")
            object.__setattr__(self, "metric", tuple(tuple(float(v) for v in r) for r in matrix))

    @property
    def metric_matrix(self) -> np.ndarray:
        return np.asarray(self.metric, dtype=float) if self.metric else np.eye(self.dim)

    @property
    def is_isotropic(self) -> bool:
        matrix = self.metric_matrix
        return bool(np.allclose(matrix, matrix[0, 0] * np.eye(self.dim)))

    @property
    def isotropic_scale(self) -> float:
        """c for a metric g = c·I."""
        if not self.is_isotropic:
            raise PreconditionError("this computation requires an isotropic metric g = c·I")
        return float(self.metric_matrix[0, 0])

    @property
    def has_zero_mode(self) -> bool:
        return False

    def dist2(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        return np.einsum("...i,ij,...j->...", diff, self.metric_matrix, diff)

    def metric_at(self, x: np.ndarray) -> np.ndarray:
        return self.metric_matrix

    def heat_coefficient(self, k: int, x: Any = None, y: Any = None) -> float:
        return (-self.mass**2) ** k / factorial(k)

    def cutoff(self, r2: np.ndarray) -> np.ndarray:
        return np.ones_like(np.asarray(r2, dtype=float))

    def heat_kernel(self, t: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return flat_heat_kernel(self, t, x, y)

    def to_document(self) -> Dict[str, Any]:
        return {
            "type": "flat",
            "dim": self.dim,
            "mass": self.mass,
            "metric": [list(r) for r in self.metric] if self.metric else None,
        }

    @classmethod
    def from_document(
        cls, dim: int, mass: float = 0.0, metric: Optional[Sequence[Sequence[float]]] = None
    ) -> "FlatGeometry":
        return cls(dim, mass, tuple(tuple(r) for r in metric) if metric else ())


def flat_heat_kernel(geom: FlatGeometry, t: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """K_t(x, y) = (4πt)^{-d/2} exp(-|x-y|²_g / 4t - t m²)."""
    if t <= 0:
        raise InputError(f"heat time must be positive, got {t}")
    r2 = geom.dist2(x, y)
    return (4.0 * np.pi * t) ** (-geom.dim / 2.0) * np.exp(-r2 / (4.0 * t) - t * geom.mass**2)


__all__ = ["FlatGeometry", "flat_heat_kernel"]
