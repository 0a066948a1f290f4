"""
Exact linear forms in the shifted variables σ = s - s₀.

Pole geometry is kept in rational arithmetic: forms hold `fractions.Fraction` coefficients and
every rank, span and complement computation goes through sympy matrices over ℚ.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from germrenorm.core.exceptions import DimensionMismatchError, InputError

Rational = Union[int, Fraction, str]


def _to_fraction(value: Rational) -> Fraction:
    if isinstance(value, float):
        raise InputError(f"linear form coefficients must be exact, got float {value!r}")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"invalid rational coefficient {value!r}") from exc


@dataclass(frozen=True)
class LinearForm:
    """
    L(σ) = Σ_i coeffs[i] σ_i, with exact rational coefficients and no constant term.

    Attributes:
        coeffs (Tuple[Fraction, ...]): one coefficient per variable.
    """

    coeffs: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", tuple(_to_fraction(c) for c in self.coeffs))

    @classmethod
    def coordinate(cls, dim: int, index: int, scale: Rational = 1) -> "LinearForm":
        return cls.sum_of(dim, (index,), scale)

    @classmethod
    def sum_of(cls, dim: int, indices: Iterable[int], scale: Rational = 1) -> "LinearForm":
        """scale · Σ_{i ∈ indices} σ_i (0-based indices)."""
        coeffs = [Fraction(0)] * dim
        for i in indices:
            coeffs[i] += _to_fraction(scale)
        return cls(tuple(coeffs))

    @classmethod
    def parse(cls, coeffs: Sequence[Rational]) -> "LinearForm":
        return cls(tuple(coeffs))

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.coeffs) if c)

    def _check(self, other: "LinearForm") -> None:
        if other.dim != self.dim:
            raise DimensionMismatchError(f"forms in {self.dim} and {other.dim} variables")

    def __add__(self, other: "LinearForm") -> "LinearForm":
        self._check(other)
        return LinearForm(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        self._check(other)
        return LinearForm(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "LinearForm":
        return LinearForm(tuple(-c for c in self.coeffs))

    def __mul__(self, scalar: Rational) -> "LinearForm":
        factor = _to_fraction(scalar)
        return LinearForm(tuple(c * factor for c in self.coeffs))

    __rmul__ = __mul__

    def __call__(self, sigma: Sequence[complex]) -> complex:
        if len(sigma) != self.dim:
            raise DimensionMismatchError(f"point with {len(sigma)} coordinates for {self.dim}")
        return sum(float(c) * z for c, z in zip(self.coeffs, sigma) if c)

    def canonical(self) -> Tuple["LinearForm", Fraction]:
        """(L', c) with L = c·L' and the first nonzero coefficient of L' equal to 1."""
        if self.is_zero:
            raise InputError("the zero form has no canonical representative")
        lead = self.coeffs[self.support[0]]
        return LinearForm(tuple(c / lead for c in self.coeffs)), lead

    def embed(self, positions: Sequence[int], dim: int) -> "LinearForm":
        """Re-index: variable i of this form becomes variable positions[i] of a dim-form."""
        if len(positions) != self.dim:
            raise DimensionMismatchError("one target position per variable is required")
        coeffs = [Fraction(0)] * dim
        for i, c in enumerate(self.coeffs):
            coeffs[positions[i]] += c
        return LinearForm(tuple(coeffs))

    def as_array(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])

    def to_strings(self) -> List[str]:
        return [str(c) for c in self.coeffs]

    def __str__(self) -> str:
        parts = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            body = f"σ{i + 1}" if mag == 1 else f"{mag}·σ{i + 1}"
            parts.append(f"{sign}{body}")
        text = "".join(parts) or "0"
        return text[1:] if text.startswith("+") else text


def qstar_inner(first: LinearForm, second: LinearForm) -> Fraction:
    """Q*(L1, L2) = Σ c_i d_i for the canonical quadratic form Q(x) = Σ |x_i|²."""
    first._check(second)
    return sum((a * b for a, b in zip(first.coeffs, second.coeffs)), Fraction(0))


def _matrix(forms: Sequence[LinearForm]) -> sympy.Matrix:
    return sympy.Matrix(
        [[sympy.Rational(c.numerator, c.denominator) for c in f.coeffs] for f in forms]
    )


def _from_sympy(row: Iterable) -> LinearForm:
    return LinearForm(tuple(Fraction(int(x.p), int(x.q)) for x in row))


def rank(forms: Sequence[LinearForm]) -> int:
    if not forms:
        return 0
    return _matrix(forms).rank()


def are_independent(forms: Sequence[LinearForm]) -> bool:
    return rank(forms) == len(forms)


def solve_in_span(basis: Sequence[LinearForm], target: LinearForm) -> Optional[List[Fraction]]:
    """Coefficients c with target = Σ c_i basis_i for an independent basis, else None."""
    if not basis:
        return [] if target.is_zero else None
    system = _matrix(basis).T
    try:
        solution, params = system.gauss_jordan_solve(_matrix([target]).T)
    except ValueError:
        return None
    if params.shape[0]:
        solution = solution.subs({p: 0 for p in params})
    return [Fraction(int(sympy.Rational(x).p), int(sympy.Rational(x).q)) for x in solution]


@lru_cache(maxsize=4096)
def complement_basis(forms: Tuple[LinearForm, ...], dim: int) -> Tuple[LinearForm, ...]:
    """
    Basis of the Q*-orthogonal complement of span(forms).

    The standard basis vectors e_1, ..., e_dim are projected onto the complement in coordinate
    order; independent projections are kept and orthogonalized by Gram–Schmidt over ℚ. The
    result depends only on the span, and splits along blocks of disjoint variables.
    """
    if any(f.dim != dim for f in forms):
        raise DimensionMismatchError("forms of different dimensions")
    forms = tuple(f for f in forms if not f.is_zero)
    if not forms:
        return tuple(LinearForm.coordinate(dim, i) for i in range(dim))
    kept_rows = _row_basis(_matrix(forms))
    gram = kept_rows * kept_rows.T
    projector = sympy.eye(dim) - kept_rows.T * gram.inv() * kept_rows
    chosen: List[sympy.Matrix] = []
    for i in range(dim):
        candidate = projector.col(i)
        if not any(candidate):
            continue
        trial = sympy.Matrix.hstack(*chosen, candidate) if chosen else candidate
        if trial.rank() == len(chosen) + 1:
            chosen.append(candidate)
    orthogonal = sympy.GramSchmidt(chosen) if chosen else []
    return tuple(_from_sympy(v).canonical()[0] for v in orthogonal)


def _row_basis(matrix: sympy.Matrix) -> sympy.Matrix:
    _, pivots = matrix.T.rref()
    return sympy.Matrix.vstack(*(matrix.row(i) for i in pivots))


@lru_cache(maxsize=4096)
def basis_change(forms: Tuple[LinearForm, ...], dim: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    For independent forms L_1..L_k, the matrix B with rows (L_1, ..., L_k, ℓ_1, ..., ℓ_{p-k})
    (ℓ the complement basis) and its inverse, as floats: z = B σ, σ = B⁻¹ z.
    """
    rows = list(forms) + list(complement_basis(forms, dim))
    exact = _matrix(rows)
    return np.array(exact.tolist(), dtype=float), np.array(exact.inv().tolist(), dtype=float)


__all__ = [
    "LinearForm",
    "are_independent",
    "basis_change",
    "complement_basis",
    "qstar_inner",
    "rank",
    "solve_in_span",
]
