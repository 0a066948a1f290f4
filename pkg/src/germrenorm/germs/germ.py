"""
Meromorphic germs at s₀ with linear poles.

A germ is kept in the canonical form h + Σ_T N_T(ℓ_T(σ)) / ∏ L_i(σ)^{n_i}: a holomorphic jet h plus
polar terms whose numerators depend only on coordinates Q*-orthogonal to their pole forms. Every
germ is valid up to a homogeneous degree D in σ: the holomorphic jet has order D and a polar
term whose denominators have total degree m carries a numerator of order D + m.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from logging import getLogger
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from germrenorm.core.exceptions import DimensionMismatchError, InputError
from germrenorm.germs.forms import LinearForm
from germrenorm.germs.jet import Jet

logger = getLogger(__name__)

Denominator = Tuple[LinearForm, int]


def denominator_degree(denominators: Iterable[Denominator]) -> int:
    return sum(n for _, n in denominators)


def _check_denominators(denominators: Sequence[Denominator], dim: int) -> None:
    for form, mult in denominators:
        if form.dim != dim:
            raise DimensionMismatchError(f"pole form in {form.dim} variables for a germ in {dim}")
        if form.is_zero:
            raise InputError("a pole form must not vanish identically")
        if mult < 1:
            raise InputError(f"pole multiplicity must be positive, got {mult}")


@dataclass(frozen=True)
class RawTerm:
    """numerator(σ) / ∏ L_i(σ)^{n_i}, with no condition on the forms."""

    numerator: Jet
    denominators: Tuple[Denominator, ...] = ()

    @property
    def pole_order(self) -> int:
        return denominator_degree(self.denominators)

    def evaluate(self, sigma: Sequence[complex]) -> complex:
        value = self.numerator.evaluate(sigma)
        for form, mult in self.denominators:
            value /= form(sigma) ** mult
        return value


@dataclass(frozen=True)
class RawGerm:
    """A finite sum of raw terms in `dim` variables."""

    dim: int
    terms: Tuple[RawTerm, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        for term in self.terms:
            if term.numerator.dim != self.dim:
                raise DimensionMismatchError(
                    f"numerator in {term.numerator.dim} variables for a germ in {self.dim}"
                )
            _check_denominators(term.denominators, self.dim)

    @classmethod
    def single(cls, numerator: Jet, denominators: Sequence[Denominator] = ()) -> "RawGerm":
        return cls(numerator.dim, (RawTerm(numerator, tuple(denominators)),))

    def __add__(self, other: "RawGerm") -> "RawGerm":
        if other.dim != self.dim:
            raise DimensionMismatchError(f"germs in {self.dim} and {other.dim} variables")
        return RawGerm(self.dim, self.terms + other.terms)

    def scaled(self, factor: complex) -> "RawGerm":
        terms = tuple(RawTerm(t.numerator * factor, t.denominators) for t in self.terms)
        return RawGerm(self.dim, terms)

    def embed(self, positions: Sequence[int], dim: int) -> "RawGerm":
        return RawGerm(
            dim,
            tuple(
                RawTerm(
                    t.numerator.embed(positions, dim),
                    tuple((f.embed(positions, dim), n) for f, n in t.denominators),
                )
                for t in self.terms
            ),
        )

    def evaluate(self, sigma: Sequence[complex]) -> complex:
        return sum((t.evaluate(sigma) for t in self.terms), 0j)


@dataclass(frozen=True)
class PolarTerm:
    """
    N(ℓ(σ)) / ∏ L_i(σ)^{n_i}.

    Attributes:
        denominators: (L_i, n_i) with canonical, linearly independent L_i, sorted by coefficients.
        complement: forms ℓ_1..ℓ_q spanning the Q*-orthogonal complement of span(L_i).
        numerator: jet in q variables, u_j = ℓ_j(σ).
    """

    denominators: Tuple[Denominator, ...]
    complement: Tuple[LinearForm, ...]
    numerator: Jet

    @property
    def dim(self) -> int:
        return self.denominators[0][0].dim

    @property
    def forms(self) -> Tuple[LinearForm, ...]:
        return tuple(f for f, _ in self.denominators)

    @property
    def pole_order(self) -> int:
        return denominator_degree(self.denominators)

    @property
    def signature(self) -> Tuple[Tuple[Tuple[Fraction, ...], int], ...]:
        return tuple((f.coeffs, n) for f, n in self.denominators)

    def complement_matrix(self) -> np.ndarray:
        if not self.complement:
            return np.zeros((0, self.dim))
        return np.array([f.as_array() for f in self.complement])

    def numerator_in_sigma(self) -> Jet:
        return self.numerator.substitute(self.complement_matrix())

    def evaluate(self, sigma: Sequence[complex]) -> complex:
        point = [form(sigma) for form in self.complement]
        value = self.numerator.evaluate(point)
        for form, mult in self.denominators:
            value /= form(sigma) ** mult
        return value

    def with_numerator(self, numerator: Jet) -> "PolarTerm":
        return PolarTerm(self.denominators, self.complement, numerator)

    def __str__(self) -> str:
        dens = "·".join(f"({f})^{n}" if n > 1 else f"({f})" for f, n in self.denominators)
        return f"N[{self.numerator.evaluate_at_base():.6g}, ...] / {dens}"


@dataclass(frozen=True)
class MeromorphicGerm:
    """
    A germ in canonical form: holomorphic jet plus polar terms with distinct signatures.

    Attributes:
        dim: number of variables p.
        polar: polar terms.
        holo: holomorphic part, a jet of order D.
        base: the base point s₀, kept as metadata; arithmetic is in σ = s - s₀.
    """

    dim: int
    polar: Tuple[PolarTerm, ...]
    holo: Jet
    base: Tuple[Fraction, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "polar", tuple(self.polar))
        if not self.base:
            object.__setattr__(self, "base", (Fraction(1),) * self.dim)
        if self.holo.dim != self.dim or len(self.base) != self.dim:
            raise DimensionMismatchError(f"holomorphic jet does not match a germ in {self.dim}")

    @classmethod
    def holomorphic(cls, jet: Jet) -> "MeromorphicGerm":
        return cls(jet.dim, (), jet)

    @classmethod
    def zero(cls, dim: int, order: int) -> "MeromorphicGerm":
        return cls(dim, (), Jet(dim, order))

    @property
    def order(self) -> int:
        return self.holo.order

    @property
    def is_holomorphic(self) -> bool:
        return not self.polar

    def scale(self) -> float:
        """Largest coefficient magnitude over all parts."""
        return max([self.holo.max_abs()] + [t.numerator.max_abs() for t in self.polar])

    def scaled(self, factor: complex) -> "MeromorphicGerm":
        return MeromorphicGerm(
            self.dim,
            tuple(t.with_numerator(t.numerator * factor) for t in self.polar),
            self.holo * factor,
            self.base,
        )

    def truncate(self, order: int) -> "MeromorphicGerm":
        return MeromorphicGerm(
            self.dim,
            tuple(t.with_numerator(t.numerator.truncate(order + t.pole_order)) for t in self.polar),
            self.holo.truncate(order),
            self.base,
        )

    def __add__(self, other: "MeromorphicGerm") -> "MeromorphicGerm":
        if other.dim != self.dim:
            raise DimensionMismatchError(f"germs in {self.dim} and {other.dim} variables")
        order = min(self.order, other.order)
        merged = {}
        for term in self.truncate(order).polar + other.truncate(order).polar:
            key = term.signature
            if key in merged:
                merged[key] = merged[key].with_numerator(merged[key].numerator + term.numerator)
            else:
                merged[key] = term
        polar = tuple(merged[k] for k in sorted(merged))
        return MeromorphicGerm(self.dim, polar, self.holo + other.holo, self.base)

    def __sub__(self, other: "MeromorphicGerm") -> "MeromorphicGerm":
        return self + other.scaled(-1.0)

    def pole_forms(self) -> Tuple[LinearForm, ...]:
        seen = {f for t in self.polar for f in t.forms}
        return tuple(sorted(seen, key=lambda f: f.coeffs))

    def evaluate(self, sigma: Sequence[complex]) -> complex:
        return evaluate_germ(self, sigma)


def sum_germs(germs: Iterable[MeromorphicGerm], dim: int, order: int) -> MeromorphicGerm:
    total = MeromorphicGerm.zero(dim, order)
    for germ in germs:
        total = total + germ
    return total


def project_holomorphic(germ: MeromorphicGerm) -> Jet:
    """π: the holomorphic part of a canonical germ."""
    return germ.holo


def recompose(germ: MeromorphicGerm) -> RawGerm:
    """The canonical germ as a raw germ with numerators written in σ."""
    terms = [RawTerm(germ.holo)]
    terms.extend(RawTerm(t.numerator_in_sigma(), t.denominators) for t in germ.polar)
    return RawGerm(germ.dim, tuple(terms))


def evaluate_germ(germ: MeromorphicGerm, sigma: Sequence[complex]) -> complex:
    """Value of the (truncated) germ at a point σ off its pole hyperplanes."""
    if len(sigma) != germ.dim:
        raise DimensionMismatchError(f"point with {len(sigma)} coordinates for {germ.dim}")
    return germ.holo.evaluate(sigma) + sum((t.evaluate(sigma) for t in germ.polar), 0j)


def residue_along(germ: MeromorphicGerm, form: LinearForm) -> complex:
    """
    Residue in the variable L(σ) of the simple pole along L: the σ = 0 value of the numerator
    of the polar term whose only denominator is L, rescaled from the canonical form of L.
    """
    canonical, lead = form.canonical()
    for term in germ.polar:
        if term.denominators == ((canonical, 1),):
            return complex(term.numerator.evaluate_at_base()) * float(lead)
    return 0j


def realized_poles(germ: MeromorphicGerm, tolerance: float) -> Tuple[LinearForm, ...]:
    """Canonical forms carried by polar terms whose numerator is not negligible."""
    threshold = tolerance * max(germ.scale(), np.finfo(float).tiny)
    seen = set()
    for term in germ.polar:
        if term.numerator.max_abs() > threshold:
            seen.update(term.forms)
    return tuple(sorted(seen, key=lambda f: f.coeffs))


def slice_germ(
    germ: MeromorphicGerm, origin: Sequence[float], direction: Sequence[float], ts: Sequence[float]
) -> np.ndarray:
    """Values along σ = origin + t·direction; NaN where the line meets a pole."""
    origin = np.asarray(origin, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if origin.shape != (germ.dim,) or direction.shape != (germ.dim,):
        raise DimensionMismatchError(f"slice vectors must have {germ.dim} coordinates")
    values: List[complex] = []
    for t in ts:
        try:
            values.append(evaluate_germ(germ, list(origin + t * direction)))
        except ZeroDivisionError:
            values.append(complex(np.nan, np.nan))
    return np.array(values, dtype=complex)


__all__ = [
    "Denominator",
    "MeromorphicGerm",
    "PolarTerm",
    "RawGerm",
    "RawTerm",
    "denominator_degree",
    "evaluate_germ",
    "project_holomorphic",
    "realized_poles",
    "recompose",
    "residue_along",
    "slice_germ",
    "sum_germs",
]
