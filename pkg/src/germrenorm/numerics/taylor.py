"""
Batched truncated Taylor arithmetic.

A `TaylorArray` holds, for M base points at once, the Taylor coefficients of a function of E
variables around each point, truncated to the box 0 ≤ β_i ≤ caps_i. Coefficients are the
normalized ones, ∂^β f / β!. Products drop every monomial leaving the box, which is exact for
the coefficients kept because the box is closed under taking smaller indices.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb, factorial
from typing import Callable, List, Sequence, Tuple, Union

import numpy as np

from germrenorm.common.multiindex import box_indices, box_position, box_products, index_factorial
from germrenorm.core.exceptions import DimensionMismatchError, NumericalError

Scalar = Union[int, float]


@lru_cache(maxsize=None)
def _product_plan(caps: Tuple[int, ...]) -> Tuple[Tuple[np.ndarray, np.ndarray], ...]:
    """For each output slot k, the (i, j) input slots whose indices add up to k."""
    size = len(box_indices(caps))
    grouped: List[Tuple[List[int], List[int]]] = [([], []) for _ in range(size)]
    for i, j, k in box_products(caps):
        grouped[k][0].append(i)
        grouped[k][1].append(j)
    return tuple((np.array(a, dtype=int), np.array(b, dtype=int)) for a, b in grouped)


class TaylorArray:
    """
    Truncated multivariate Taylor expansions at a batch of points.

    Attributes:
        coeffs (np.ndarray): shape (M, B), B = ∏ (caps_i + 1), columns in `box_indices` order.
        caps (Tuple[int, ...]): per-variable truncation.
    """

    __slots__ = ("coeffs", "caps")
    __array_ufunc__ = None

    def __init__(self, coeffs: np.ndarray, caps: Tuple[int, ...]):
        self.coeffs = coeffs
        self.caps = tuple(caps)

    @classmethod
    def constant(cls, value: Union[Scalar, np.ndarray], size: int, caps: Sequence[int]):
        caps = tuple(caps)
        coeffs = np.zeros((size, len(box_indices(caps))))
        coeffs[:, 0] = value
        return cls(coeffs, caps)

    @classmethod
    def variable(cls, base: np.ndarray, axis: int, caps: Sequence[int]) -> "TaylorArray":
        """The coordinate function t_axis expanded at the points `base[:, axis]`."""
        caps = tuple(caps)
        out = cls.constant(base[:, axis], base.shape[0], caps)
        if caps[axis] >= 1:
            unit = tuple(1 if i == axis else 0 for i in range(len(caps)))
            out.coeffs[:, box_position(caps)[unit]] = 1.0
        return out

    @property
    def size(self) -> int:
        return self.coeffs.shape[0]

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[:, 0]

    @property
    def max_degree(self) -> int:
        return sum(self.caps)

    def _check(self, other: "TaylorArray") -> None:
        if other.caps != self.caps:
            raise DimensionMismatchError(f"Taylor boxes differ: {self.caps} vs {other.caps}")

    def copy(self) -> "TaylorArray":
        return TaylorArray(self.coeffs.copy(), self.caps)

    def __add__(self, other: Union["TaylorArray", Scalar]) -> "TaylorArray":
        if isinstance(other, TaylorArray):
            self._check(other)
            return TaylorArray(self.coeffs + other.coeffs, self.caps)
        out = self.coeffs.copy()
        out[:, 0] += other
        return TaylorArray(out, self.caps)

    __radd__ = __add__

    def __neg__(self) -> "TaylorArray":
        return TaylorArray(-self.coeffs, self.caps)

    def __sub__(self, other: Union["TaylorArray", Scalar]) -> "TaylorArray":
        return self + (-other)

    def __rsub__(self, other: Scalar) -> "TaylorArray":
        return (-self) + other

    def __mul__(self, other: Union["TaylorArray", Scalar, np.ndarray]) -> "TaylorArray":
        if not isinstance(other, TaylorArray):
            factor = np.asarray(other, dtype=float)
            if factor.ndim == 1:
                factor = factor[:, None]
            return TaylorArray(self.coeffs * factor, self.caps)
        self._check(other)
        a, b = self.coeffs, other.coeffs
        out = np.empty_like(a)
        for k, (i, j) in enumerate(_product_plan(self.caps)):
            out[:, k] = np.einsum("mi,mi->m", a[:, i], b[:, j])
        return TaylorArray(out, self.caps)

    __rmul__ = __mul__

    def __truediv__(self, other: Union["TaylorArray", Scalar]) -> "TaylorArray":
        if isinstance(other, TaylorArray):
            return self * other.reciprocal()
        return TaylorArray(self.coeffs / other, self.caps)

    def _series(self, derivatives: Callable[[np.ndarray, int], np.ndarray]) -> "TaylorArray":
        """
        f(x0 + n) = Σ_j f^{(j)}(x0)/j! n^j, exact because n is nilpotent of index max_degree + 1.

        `derivatives(x0, j)` returns f^{(j)}(x0) / j! for the batch of base values.
        """
        x0 = self.coeffs[:, 0]
        nil = self.coeffs.copy()
        nil[:, 0] = 0.0
        nilpotent = TaylorArray(nil, self.caps)
        out = TaylorArray.constant(derivatives(x0, 0), self.size, self.caps)
        power = nilpotent
        for j in range(1, self.max_degree + 1):
            if j > 1:
                power = power * nilpotent
            out = out + power * derivatives(x0, j)
        return out

    def reciprocal(self) -> "TaylorArray":
        if np.any(self.coeffs[:, 0] == 0.0):
            raise NumericalError("reciprocal of a Taylor expansion with vanishing constant term")
        return self._series(lambda x0, j: (-1.0) ** j / x0 ** (j + 1))

    def power(self, exponent: float) -> "TaylorArray":
        """x^exponent for x with positive constant term."""
        if np.any(self.coeffs[:, 0] <= 0.0):
            raise NumericalError("real power of a Taylor expansion with nonpositive base")
        return self._series(lambda x0, j: _binom(exponent, j) * x0 ** (exponent - j))

    def exp(self) -> "TaylorArray":
        return self._series(lambda x0, j: np.exp(x0) / factorial(j))

    def derivative_values(self) -> np.ndarray:
        """∂^β f at the base points, shape (M, B)."""
        scale = np.array([index_factorial(beta) for beta in box_indices(self.caps)], dtype=float)
        return self.coeffs * scale[None, :]

    def column(self, beta: Tuple[int, ...]) -> np.ndarray:
        return self.coeffs[:, box_position(self.caps)[tuple(beta)]]

    def take(self, rows: np.ndarray) -> "TaylorArray":
        return TaylorArray(self.coeffs[rows], self.caps)

    def __repr__(self) -> str:
        return f"TaylorArray(size={self.size}, caps={self.caps})"


def _binom(exponent: float, j: int) -> float:
    out = 1.0
    for i in range(j):
        out *= (exponent - i) / (i + 1)
    return out


def monomial(base: np.ndarray, exponents: Sequence[int], caps: Sequence[int]) -> TaylorArray:
    """∏ t_i^{e_i} expanded at the base points, with exact binomial coefficients."""
    caps = tuple(caps)
    coeffs = np.zeros((base.shape[0], len(box_indices(caps))))
    for k, beta in enumerate(box_indices(caps)):
        column = np.ones(base.shape[0])
        for i, (e, b) in enumerate(zip(exponents, beta)):
            if b > e:
                column = np.zeros(base.shape[0])
                break
            if e:
                column = column * comb(e, b) * base[:, i] ** (e - b)
        coeffs[:, k] = column
    return TaylorArray(coeffs, caps)


TaylorMatrix = List[List[TaylorArray]]


def zeros_matrix(n: int, size: int, caps: Sequence[int]) -> TaylorMatrix:
    return [[TaylorArray.constant(0.0, size, caps) for _ in range(n)] for _ in range(n)]


def gauss_jordan(matrix: TaylorMatrix) -> Tuple[TaylorMatrix, TaylorArray]:
    """
    Inverse and determinant of a batch of symmetric positive definite matrices.

    No pivoting: every leading principal minor of a positive definite matrix is positive.

    Returns:
        Tuple[TaylorMatrix, TaylorArray]: A⁻¹ and det A.
    """
    n = len(matrix)
    if n == 0:
        raise DimensionMismatchError("empty matrix")
    size, caps = matrix[0][0].size, matrix[0][0].caps
    work = [[entry.copy() for entry in row] for row in matrix]
    inverse = [
        [TaylorArray.constant(1.0 if i == j else 0.0, size, caps) for j in range(n)]
        for i in range(n)
    ]
    det = TaylorArray.constant(1.0, size, caps)
    for col in range(n):
        pivot = work[col][col]
        if np.any(pivot.value <= 0.0):
            raise NumericalError("matrix is not positive definite along the batch")
        det = det * pivot
        inv_pivot = pivot.reciprocal()
        work[col] = [entry * inv_pivot for entry in work[col]]
        inverse[col] = [entry * inv_pivot for entry in inverse[col]]
        for row in range(n):
            if row == col:
                continue
            factor = work[row][col]
            if not np.any(factor.coeffs):
                continue
            work[row] = [a - factor * b for a, b in zip(work[row], work[col])]
            inverse[row] = [a - factor * b for a, b in zip(inverse[row], inverse[col])]
    return inverse, det


__all__ = ["TaylorArray", "TaylorMatrix", "monomial", "zeros_matrix", "gauss_jordan"]
