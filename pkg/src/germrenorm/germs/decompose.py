"""
Canonical decomposition of raw germs into holomorphic and Q*-orthogonal polar parts.

Raw terms are first brought to linearly independent denominators by partial fractions. Each
term is then written in coordinates z = Bσ whose first rows are its pole forms and whose
remaining rows span the orthogonal complement. Monomials of the numerator split by how their
exponents compare with the pole multiplicities.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from logging import getLogger
from typing import Dict, List, Optional, Sequence, Tuple

from germrenorm.common.multiindex import MultiIndex
from germrenorm.core.exceptions import DimensionMismatchError, InsufficientOrderError
from germrenorm.germs.forms import LinearForm, basis_change, complement_basis, solve_in_span
from germrenorm.germs.germ import (
    Denominator,
    MeromorphicGerm,
    PolarTerm,
    RawGerm,
    RawTerm,
    recompose,
)
from germrenorm.germs.jet import Jet

logger = getLogger(__name__)


def _canonical_term(term: RawTerm) -> RawTerm:
    """Canonical forms, scalars absorbed into the numerator, equal forms merged."""
    factor = Fraction(1)
    merged: Dict[LinearForm, int] = {}
    for form, mult in term.denominators:
        canonical, lead = form.canonical()
        factor /= lead**mult
        merged[canonical] = merged.get(canonical, 0) + mult
    denominators = tuple(sorted(merged.items(), key=lambda item: item[0].coeffs))
    numerator = term.numerator if factor == 1 else term.numerator * float(factor)
    return RawTerm(numerator, denominators)


def _first_dependency(forms: Sequence[LinearForm]) -> Optional[Tuple[int, List[Fraction]]]:
    """First m with forms[m] in the span of forms[:m], with its coefficients."""
    for m in range(1, len(forms)):
        coeffs = solve_in_span(forms[:m], forms[m])
        if coeffs is not None:
            return m, coeffs
    return None


def reduce_dependent_denominators(raw: RawGerm) -> RawGerm:
    """
    Rewrite every term over linearly independent pole forms.

    A relation L_m = Σ_{i<m} c_i L_i gives 1/(L_1⋯L_m) = Σ_i c_i / (∏_{j≠i} L_j · L_m²), applied
    to one copy of each form involved. Each step lowers the total multiplicity of the forms with
    c_i ≠ 0, so the rewriting terminates.
    """
    done: List[RawTerm] = []
    pending = [_canonical_term(t) for t in raw.terms]
    steps = 0
    while pending:
        term = pending.pop()
        forms = [f for f, _ in term.denominators]
        dependency = _first_dependency(forms)
        if dependency is None:
            done.append(term)
            continue
        steps += 1
        m, coeffs = dependency
        mults = {f: n for f, n in term.denominators}
        for i, c in enumerate(coeffs):
            if not c:
                continue
            new = dict(mults)
            new[forms[i]] -= 1
            if not new[forms[i]]:
                del new[forms[i]]
            new[forms[m]] += 1
            denominators = tuple(sorted(new.items(), key=lambda item: item[0].coeffs))
            pending.append(RawTerm(term.numerator * float(c), denominators))
    if steps:
        logger.debug(f"partial fractions: {steps} rewrites, {len(done)} terms")
    return RawGerm(raw.dim, tuple(done))


def _term_order(term: RawTerm) -> int:
    return term.numerator.order - term.pole_order


def _add_into(target: Dict, key, jet: Jet) -> None:
    target[key] = target[key] + jet if key in target else jet


def _split_term(
    numerator: Jet,
    denominators: Tuple[Denominator, ...],
    order: int,
    holo: Dict[str, Jet],
    polar: Dict[tuple, PolarTerm],
) -> None:
    """Accumulate the canonical parts of numerator / ∏ L_i^{n_i}, valid to degree `order`."""
    dim = numerator.dim
    if not denominators:
        _add_into(holo, "h", numerator.truncate(order))
        return
    forms = tuple(f for f, _ in denominators)
    mults = tuple(n for _, n in denominators)
    k = len(forms)
    total = sum(mults)
    to_z, to_sigma = basis_change(forms, dim)
    z_jet = numerator.truncate(order + total).substitute(to_sigma)
    complement = complement_basis(forms, dim)

    holo_z: Dict[MultiIndex, complex] = {}
    polar_groups: Dict[Tuple[int, ...], Dict[MultiIndex, complex]] = defaultdict(dict)
    mixed_groups: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], Dict[MultiIndex, complex]]
    mixed_groups = defaultdict(dict)
    for alpha, c in z_jet.items():
        head, rest = alpha[:k], alpha[k:]
        open_slots = tuple(i for i in range(k) if head[i] < mults[i])
        if not open_slots:
            shifted = tuple(a - n for a, n in zip(head, mults)) + rest
            holo_z[shifted] = holo_z.get(shifted, 0) + c
        elif len(open_slots) == k:
            key = tuple(n - a for a, n in zip(head, mults))
            polar_groups[key][rest] = polar_groups[key].get(rest, 0) + c
        else:
            remaining = tuple(mults[i] - head[i] for i in open_slots)
            shifted = tuple(
                0 if i in open_slots else head[i] - mults[i] for i in range(k)
            ) + rest
            group = mixed_groups[(open_slots, remaining)]
            group[shifted] = group.get(shifted, 0) + c

    if holo_z:
        jet = Jet.from_dict(dim, order, holo_z).substitute(to_z)
        _add_into(holo, "h", jet)
    for key, coeffs in polar_groups.items():
        dens = tuple((f, n) for f, n in zip(forms, key))
        term = PolarTerm(dens, complement, Jet.from_dict(dim - k, order + sum(key), coeffs))
        signature = term.signature
        if signature in polar:
            previous = polar[signature]
            polar[signature] = previous.with_numerator(previous.numerator + term.numerator)
        else:
            polar[signature] = term
    for (slots, remaining), coeffs in mixed_groups.items():
        sub_order = order + sum(remaining)
        sub = Jet.from_dict(dim, sub_order, coeffs).substitute(to_z)
        dens = tuple((forms[i], n) for i, n in zip(slots, remaining))
        _split_term(sub, dens, order, holo, polar)


def decompose(raw: RawGerm, order: Optional[int] = None) -> MeromorphicGerm:
    """
    Canonical form of a raw germ.

    Args:
        raw: the germ to split.
        order: requested homogeneous order of the result; defaults to the largest order every
            term supports, min over terms of (numerator order - pole order).

    Raises:
        InsufficientOrderError: when some numerator is too short for the requested order.
    """
    reduced = reduce_dependent_denominators(raw)
    if not reduced.terms:
        return MeromorphicGerm.zero(raw.dim, order if order is not None else 0)
    available = min(_term_order(t) for t in reduced.terms)
    if order is None:
        order = available
    if available < order:
        raise InsufficientOrderError(
            f"numerators support order {available} but order {order} was requested"
        )
    if order < 0:
        raise InsufficientOrderError("numerator truncation below the total pole order")
    holo: Dict[str, Jet] = {}
    polar: Dict[tuple, PolarTerm] = {}
    for term in reduced.terms:
        _split_term(term.numerator, term.denominators, order, holo, polar)
    holo_jet = holo.get("h", Jet(raw.dim, order))
    terms = tuple(polar[key] for key in sorted(polar))
    return MeromorphicGerm(raw.dim, terms, holo_jet)


def embed_germ(germ: MeromorphicGerm, positions: Sequence[int], dim: int) -> MeromorphicGerm:
    """Variable i of the germ becomes variable positions[i] of a germ in `dim` variables."""
    return decompose(recompose(germ).embed(positions, dim), germ.order)


def external_product(first: MeromorphicGerm, second: MeromorphicGerm) -> MeromorphicGerm:
    """
    g1 ⊠ g2 in p₁ + p₂ variables, the first block first.

    The product of two germs valid to degrees D₁ and D₂ is valid to
    min(D₁ + low₂, D₂ + low₁), low the lowest homogeneous degree present.
    """
    dim = first.dim + second.dim
    terms: List[RawTerm] = []
    left = recompose(first).terms
    right = recompose(second).terms
    shift = list(range(first.dim, dim))
    for a in left:
        for b in right:
            numerator = a.numerator.external(b.numerator)
            dens = tuple((f.embed(range(first.dim), dim), n) for f, n in a.denominators)
            dens += tuple((f.embed(shift, dim), n) for f, n in b.denominators)
            terms.append(RawTerm(numerator, dens))
    return decompose(RawGerm(dim, tuple(terms)))


def multiply_by_holomorphic(germ: MeromorphicGerm, jet: Jet) -> MeromorphicGerm:
    """t·h, re-decomposed; valid to min(D, order(h) - max pole order)."""
    if jet.dim != germ.dim:
        raise DimensionMismatchError(f"jet in {jet.dim} variables for a germ in {germ.dim}")
    terms = tuple(RawTerm(t.numerator * jet, t.denominators) for t in recompose(germ).terms)
    return decompose(RawGerm(germ.dim, terms))


def from_polar(numerator: Jet, denominators: Sequence[Denominator]) -> MeromorphicGerm:
    """Canonical germ of a single quotient."""
    return decompose(RawGerm.single(numerator, denominators))


__all__ = [
    "decompose",
    "embed_germ",
    "external_product",
    "from_polar",
    "multiply_by_holomorphic",
    "reduce_dependent_denominators",
]
