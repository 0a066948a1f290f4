"""
Truncated power series (jets) in the shifted variables σ.

Coefficients are complex and stored densely in the graded order of
`common.multiindex.total_degree_indices`. Each jet records the order up to which it is valid;
sums and products keep the smaller order.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb, factorial
from typing import Dict, Iterator, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import rgamma, zeta

from germrenorm.common.multiindex import MultiIndex, total_degree_indices
from germrenorm.core.exceptions import (
    DimensionMismatchError,
    InsufficientOrderError,
    NumericalError,
)

Number = Union[int, float, complex]

_EULER_GAMMA = 0.57721566490153286061


@lru_cache(maxsize=None)
def _positions(dim: int, order: int) -> Dict[MultiIndex, int]:
    return {alpha: i for i, alpha in enumerate(total_degree_indices(dim, order))}


@lru_cache(maxsize=None)
def _degrees(dim: int, order: int) -> np.ndarray:
    return np.array([sum(a) for a in total_degree_indices(dim, order)], dtype=int)


@lru_cache(maxsize=256)
def _product_plan(dim: int, order: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    indices = total_degree_indices(dim, order)
    pos = _positions(dim, order)
    left, right, target = [], [], []
    for i, a in enumerate(indices):
        room = order - sum(a)
        for j, b in enumerate(indices):
            if sum(b) > room:
                break
            left.append(i)
            right.append(j)
            target.append(pos[tuple(x + y for x, y in zip(a, b))])
    return np.array(left, int), np.array(right, int), np.array(target, int)


def _convolve(a: np.ndarray, b: np.ndarray, dim: int, order: int) -> np.ndarray:
    left, right, target = _product_plan(dim, order)
    prod = a[left] * b[right]
    size = len(total_degree_indices(dim, order))
    return np.bincount(target, weights=prod.real, minlength=size) + 1j * np.bincount(
        target, weights=prod.imag, minlength=size
    )


@lru_cache(maxsize=512)
def _substitution_matrix(matrix_key: bytes, shape: Tuple[int, int], order: int) -> np.ndarray:
    """Dense map sending the coefficients in u to those in σ, where u = M σ."""
    matrix = np.frombuffer(matrix_key, dtype=float).reshape(shape)
    q, p = shape
    source = total_degree_indices(q, order)
    size = len(total_degree_indices(p, order))
    pos = _positions(p, order)
    linear = []
    for i in range(q):
        row = np.zeros(size, dtype=complex)
        if order >= 1:
            for j in range(p):
                if matrix[i, j]:
                    row[pos[tuple(1 if k == j else 0 for k in range(p))]] = matrix[i, j]
        linear.append(row)
    columns: Dict[MultiIndex, np.ndarray] = {}
    out = np.zeros((size, len(source)), dtype=complex)
    for col, alpha in enumerate(source):
        first = next((i for i, a in enumerate(alpha) if a), None)
        if first is None:
            vec = np.zeros(size, dtype=complex)
            vec[0] = 1.0
        else:
            lower = alpha[:first] + (alpha[first] - 1,) + alpha[first + 1 :]
            vec = _convolve(columns[lower], linear[first], p, order)
        columns[alpha] = vec
        out[:, col] = vec
    return out


class Jet:
    """
    A truncated power series Σ_{|α| ≤ order} c_α σ^α in `dim` variables.

    A negative order denotes the empty jet (no coefficient is known).

    Attributes:
        dim (int): number of variables.
        order (int): truncation order.
        coeffs (np.ndarray): complex coefficients, graded order.
    """

    __slots__ = ("dim", "order", "coeffs")

    def __init__(self, dim: int, order: int, coeffs: Optional[np.ndarray] = None):
        self.dim = int(dim)
        self.order = int(order)
        size = len(total_degree_indices(self.dim, self.order))
        if coeffs is None:
            coeffs = np.zeros(size, dtype=complex)
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (size,):
            raise DimensionMismatchError(
                f"{coeffs.shape[0]} coefficients for a jet of dim {dim} and order {order}"
            )
        self.coeffs = coeffs

    @classmethod
    def constant(cls, dim: int, order: int, value: Number) -> "Jet":
        out = cls(dim, order)
        if order >= 0:
            out.coeffs[0] = value
        return out

    @classmethod
    def variable(cls, dim: int, order: int, index: int) -> "Jet":
        return cls.linear(dim, order, [1.0 if i == index else 0.0 for i in range(dim)])

    @classmethod
    def linear(cls, dim: int, order: int, coeffs: Sequence[float], constant: Number = 0.0) -> "Jet":
        """constant + Σ coeffs[i] σ_i."""
        out = cls.constant(dim, order, constant)
        if order >= 1:
            pos = _positions(dim, order)
            for i, c in enumerate(coeffs):
                if c:
                    out.coeffs[pos[tuple(1 if k == i else 0 for k in range(dim))]] = c
        return out

    @classmethod
    def from_dict(cls, dim: int, order: int, mapping: Mapping[MultiIndex, Number]) -> "Jet":
        out = cls(dim, order)
        pos = _positions(dim, order)
        for alpha, value in mapping.items():
            alpha = tuple(alpha)
            if len(alpha) != dim:
                raise DimensionMismatchError(f"multi-index {alpha} for a jet in {dim} variables")
            if alpha in pos:
                out.coeffs[pos[alpha]] += value
        return out

    def __len__(self) -> int:
        return len(self.coeffs)

    def items(self, tol: float = 0.0) -> Iterator[Tuple[MultiIndex, complex]]:
        for alpha, c in zip(total_degree_indices(self.dim, self.order), self.coeffs):
            if abs(c) > tol:
                yield alpha, complex(c)

    def to_dict(self, tol: float = 0.0) -> Dict[MultiIndex, complex]:
        return dict(self.items(tol))

    def coefficient(self, alpha: Sequence[int]) -> complex:
        pos = _positions(self.dim, self.order).get(tuple(alpha))
        return 0j if pos is None else complex(self.coeffs[pos])

    @property
    def degrees(self) -> np.ndarray:
        return _degrees(self.dim, self.order)

    @property
    def low_degree(self) -> int:
        """Lowest degree with a nonzero coefficient; order + 1 for the zero jet."""
        nonzero = np.nonzero(self.coeffs)[0]
        return int(self.degrees[nonzero[0]]) if len(nonzero) else self.order + 1

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs) <= tol))

    def copy(self) -> "Jet":
        return Jet(self.dim, self.order, self.coeffs.copy())

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise InsufficientOrderError(f"cannot raise jet order {self.order} to {order}")
        size = len(total_degree_indices(self.dim, order))
        return Jet(self.dim, order, self.coeffs[:size].copy())

    def homogeneous(self, degree: int) -> "Jet":
        out = self.copy()
        out.coeffs[self.degrees != degree] = 0.0
        return out

    def _align(self, other: "Jet") -> Tuple["Jet", "Jet"]:
        if other.dim != self.dim:
            raise DimensionMismatchError(f"jets in {self.dim} and {other.dim} variables")
        order = min(self.order, other.order)
        return self.truncate(order), other.truncate(order)

    def __add__(self, other: Union["Jet", Number]) -> "Jet":
        if not isinstance(other, Jet):
            return self + Jet.constant(self.dim, self.order, other)
        a, b = self._align(other)
        return Jet(a.dim, a.order, a.coeffs + b.coeffs)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet(self.dim, self.order, -self.coeffs)

    def __sub__(self, other: Union["Jet", Number]) -> "Jet":
        return self + (-other)

    def __rsub__(self, other: Number) -> "Jet":
        return (-self) + other

    def __mul__(self, other: Union["Jet", Number]) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.dim, self.order, self.coeffs * other)
        a, b = self._align(other)
        if a.order < 0:
            return a
        return Jet(a.dim, a.order, _convolve(a.coeffs, b.coeffs, a.dim, a.order))

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "Jet":
        return Jet(self.dim, self.order, self.coeffs / other)

    def _series(self, derivative: "callable") -> "Jet":
        """f(c₀ + n) = Σ_j derivative(c₀, j) n^j with n = self - c₀ nilpotent."""
        if self.order < 0:
            return self.copy()
        c0 = complex(self.coeffs[0])
        nil = self.copy()
        nil.coeffs[0] = 0.0
        out = Jet.constant(self.dim, self.order, derivative(c0, 0))
        power = Jet.constant(self.dim, self.order, 1.0)
        for j in range(1, self.order + 1):
            power = power * nil
            out = out + power * derivative(c0, j)
        return out

    def exp(self) -> "Jet":
        return self._series(lambda c0, j: np.exp(c0) / factorial(j))

    def reciprocal(self) -> "Jet":
        if self.order >= 0 and self.coeffs[0] == 0:
            raise NumericalError("reciprocal of a jet vanishing at the base point")
        return self._series(lambda c0, j: (-1) ** j / c0 ** (j + 1))

    @classmethod
    def reciprocal_affine(cls, dim: int, order: int, offset: Number, coeffs: Sequence[float]):
        """The jet of 1 / (offset + Σ coeffs[i] σ_i), offset ≠ 0."""
        return cls.linear(dim, order, coeffs, offset).reciprocal()

    def substitute(self, matrix: np.ndarray) -> "Jet":
        """
        Change of variables u = M σ: the result g(σ) = f(M σ) in M.shape[1] variables.

        M may be non-square; row i expresses variable u_i of this jet.
        """
        matrix = np.ascontiguousarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"substitution matrix of shape {matrix.shape} for a jet in {self.dim} variables"
            )
        if self.order < 0:
            return Jet(matrix.shape[1], self.order)
        transform = _substitution_matrix(matrix.tobytes(), matrix.shape, self.order)
        return Jet(matrix.shape[1], self.order, transform @ self.coeffs)

    def embed(self, positions: Sequence[int], dim: int) -> "Jet":
        """Variable i becomes variable positions[i] of a jet in `dim` variables."""
        if len(positions) != self.dim:
            raise DimensionMismatchError("one target position per variable is required")
        matrix = np.zeros((self.dim, dim))
        for i, p in enumerate(positions):
            matrix[i, p] = 1.0
        return self.substitute(matrix)

    def external(self, other: "Jet") -> "Jet":
        """
        Product of jets in disjoint variable blocks (self's variables first).

        Valid to order min(N₁ + low₂, N₂ + low₁), the exact truncation rule for a product.
        """
        dim = self.dim + other.dim
        order = min(self.order + other.low_degree, other.order + self.low_degree)
        if order < 0:
            return Jet(dim, order)
        left = _padded(self, range(self.dim), dim, order)
        right = _padded(other, range(self.dim, dim), dim, order)
        return left * right

    def evaluate(self, point: Sequence[Number]) -> complex:
        if len(point) != self.dim:
            raise DimensionMismatchError(f"point with {len(point)} coordinates for {self.dim}")
        point = np.asarray(point, dtype=complex)
        total = 0j
        for alpha, c in self.items():
            total += c * np.prod(point ** np.asarray(alpha)) if alpha else c
        return complex(total)

    def evaluate_at_base(self) -> complex:
        return complex(self.coeffs[0]) if self.order >= 0 else 0j

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if len(self.coeffs) else 0.0

    def allclose(self, other: "Jet", atol: float = 1e-12, rtol: float = 0.0) -> bool:
        a, b = self._align(other)
        return bool(np.allclose(a.coeffs, b.coeffs, atol=atol, rtol=rtol))

    def __repr__(self) -> str:
        shown = ", ".join(f"{a}: {c:.6g}" for a, c in list(self.items(1e-300))[:6])
        return f"Jet(dim={self.dim}, order={self.order}, {{{shown}}})"


def _padded(jet: Jet, positions: Sequence[int], dim: int, order: int) -> Jet:
    """Embed a jet into `dim` variables at `order`, dropping degrees above it, zero elsewhere."""
    out = Jet(dim, order)
    pos = _positions(dim, order)
    positions = list(positions)
    for alpha, c in jet.items():
        if sum(alpha) > order:
            continue
        target = [0] * dim
        for i, a in enumerate(alpha):
            target[positions[i]] = a
        out.coeffs[pos[tuple(target)]] += c
    return out


def evaluate_at_base(jet: Jet) -> complex:
    """Coefficient of α = 0."""
    return jet.evaluate_at_base()


def rgamma_jet(dim: int, order: int) -> Jet:
    """
    The jet of ∏_i 1/Γ(1 + σ_i).

    Built from log Γ(1+σ) = -γσ + Σ_{k≥2} (-1)^k ζ(k) σ^k / k, exponentiated as a jet.
    """
    log_coeffs = np.zeros(order + 1)
    if order >= 1:
        log_coeffs[1] = _EULER_GAMMA
    for k in range(2, order + 1):
        log_coeffs[k] = -((-1) ** k) * zeta(k) / k
    exponent = Jet(dim, order)
    pos = _positions(dim, order)
    for i in range(dim):
        for k in range(1, order + 1):
            exponent.coeffs[pos[tuple(k if j == i else 0 for j in range(dim))]] = log_coeffs[k]
    return exponent.exp()


def rgamma_taylor_fd(order: int, step: float = 0.05) -> np.ndarray:
    """
    Taylor coefficients of 1/Γ(1+σ) at σ = 0 from Richardson-extrapolated central differences.

    Returns:
        np.ndarray: c_j = (d/dσ)^j (1/Γ)(1) / j!, j = 0..order.
    """

    def central(j: int, h: float) -> float:
        if j == 0:
            return float(rgamma(1.0))
        nodes = [1.0 + (j / 2.0 - i) * h for i in range(j + 1)]
        weights = [(-1) ** i * comb(j, i) for i in range(j + 1)]
        return float(np.dot(weights, rgamma(np.array(nodes)))) / h**j

    out = np.zeros(order + 1)
    for j in range(order + 1):
        coarse, fine, finer = central(j, step), central(j, step / 2), central(j, step / 4)
        first = (4 * fine - coarse) / 3
        second = (4 * finer - fine) / 3
        out[j] = (16 * second - first) / 15 / factorial(j)
    return out


__all__ = ["Jet", "evaluate_at_base", "rgamma_jet", "rgamma_taylor_fd"]
