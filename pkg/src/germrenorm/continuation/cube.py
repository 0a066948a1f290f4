"""
Meromorphic continuation of cube integrals by integration by parts.

    I(σ) = ∫_{[0,1]^E} ∏_e t_e^{L_e(σ) + a_e - 1} ψ(t) dt,   a_e ∈ ℤ.

On one axis, k integrations by parts give

    ∫₀¹ t^{λ+a-1} f = Σ_{i<k} (-1)^i f^{(i)}(1) / ∏_{m≤i}(λ+a+m)
                      + (-1)^k / ∏_{m<k}(λ+a+m) · ∫₀¹ t^{λ+a+k-1} f^{(k)},

and the remaining integral is holomorphic near λ = 0 once a + k ≥ 1. Expanding over all axes
gives one term per choice of boundary order or remainder on every axis. Factors λ + a + m with
a + m = 0 stay as pole denominators; all others become Taylor jets of 1/(λ + q). The σ-jet of
a remaining integral comes from t^λ = exp(λ ln t) under the tanh–sinh rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from logging import getLogger
from math import factorial
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from germrenorm.common.multiindex import (
    MultiIndex,
    box_indices,
    box_position,
    index_factorial,
    total_degree_indices,
)
from germrenorm.config import QuadratureConfig
from germrenorm.core.contracts import SmoothFactor
from germrenorm.core.exceptions import InputError, PreconditionError
from germrenorm.germs.decompose import decompose
from germrenorm.germs.forms import LinearForm
from germrenorm.germs.germ import Denominator, MeromorphicGerm, RawGerm, RawTerm
from germrenorm.germs.jet import Jet
from germrenorm.numerics.quadrature import coarse_weights, tanh_sinh_unit
from germrenorm.numerics.taylor import monomial
from germrenorm.sectors.cache import ChiJetCache

logger = getLogger(__name__)

AxisExponent = Tuple[LinearForm, int]
REMAINDER = -1


@dataclass(frozen=True)
class CubeIntegralSpec:
    """
    Attributes:
        exponents: per axis (L_e, a_e), L_e a form over the germ variables.
        factor: the smooth factor ψ and its t-jets.
        order: target σ-jet order D.
        n_variables: number of germ variables p.
        depths: integrations by parts per axis; None selects max(0, 1 - a_e).
    """

    exponents: Tuple[AxisExponent, ...]
    factor: SmoothFactor
    order: int
    n_variables: int
    depths: Optional[Tuple[int, ...]] = field(default=None)

    def __post_init__(self) -> None:
        object.__setattr__(self, "exponents", tuple(self.exponents))
        for form, offset in self.exponents:
            if int(offset) != offset:
                raise InputError(f"exponent offset {offset} is not an integer")
            if form.dim != self.n_variables:
                raise InputError(
                    f"exponent form in {form.dim} variables, expected {self.n_variables}"
                )
        depths = self.depths if self.depths is not None else self.required_depths()
        depths = tuple(int(k) for k in depths)
        if len(depths) != self.dim:
            raise InputError(f"{len(depths)} depths for a {self.dim}-dimensional cube")
        for k, needed in zip(depths, self.required_depths()):
            if k < needed:
                raise PreconditionError(f"depth {k} leaves a divergent remainder (need {needed})")
        object.__setattr__(self, "depths", depths)
        if self.factor.dim != self.dim:
            raise InputError(f"smooth factor on {self.factor.dim} axes for a {self.dim}-cube")

    @property
    def dim(self) -> int:
        return len(self.exponents)

    def required_depths(self) -> Tuple[int, ...]:
        return tuple(max(0, 1 - int(a)) for _, a in self.exponents)


@dataclass(frozen=True)
class PolynomialFactor:
    """ψ(t) = Σ coef · t^β as a smooth factor with exact t-jets."""

    terms: Tuple[Tuple[MultiIndex, float], ...]
    n_axes: int

    @classmethod
    def from_dict(cls, terms: Mapping[MultiIndex, float], n_axes: int) -> "PolynomialFactor":
        return cls(tuple(sorted((tuple(b), float(c)) for b, c in terms.items())), n_axes)

    @property
    def dim(self) -> int:
        return self.n_axes

    def taylor_grid(self, points: np.ndarray, caps: Sequence[int]) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        caps = tuple(caps)
        out = np.zeros((points.shape[0], len(box_indices(caps))))
        for beta, coef in self.terms:
            out += coef * monomial(points, beta, caps).coeffs
        return out

    def fingerprint(self) -> bytes:
        return repr(("polynomial", self.terms, self.n_axes)).encode()


def _exp_moments(values: np.ndarray, directions: np.ndarray, order: int) -> np.ndarray:
    """Σ_k values_k · v_k^α / α! for every α with |α| ≤ order, v_k the rows of `directions`."""
    dim = directions.shape[1]
    indices = total_degree_indices(dim, order)
    powers = [np.ones_like(directions)]
    for _ in range(order):
        powers.append(powers[-1] * directions)
    out = np.empty(len(indices), dtype=complex)
    for pos, alpha in enumerate(indices):
        column = values.astype(complex)
        for i, a in enumerate(alpha):
            if a:
                column = column * powers[a][:, i]
        out[pos] = column.sum() / index_factorial(alpha)
    return out


def _coefficient(
    form: LinearForm, offset: int, count: int, sign: int, order: int, p: int
) -> Tuple[Jet, List[Denominator]]:
    """sign / ∏_{m<count} (L + offset + m): polar factors split off, the rest as a jet."""
    jet = Jet.constant(p, order, float(sign))
    dens: List[Denominator] = []
    coeffs = form.as_array()
    for m in range(count):
        shift = offset + m
        if shift == 0:
            dens.append((form, 1))
        else:
            jet = jet * Jet.reciprocal_affine(p, order, float(shift), coeffs)
    return jet, dens


def _pole_count(offset: int, count: int) -> int:
    return 1 if 0 <= -offset < count else 0


@dataclass
class _Grid:
    axis_nodes: List[np.ndarray]
    axis_weights: List[np.ndarray]
    axis_coarse: List[np.ndarray]
    axis_logs: List[np.ndarray]
    has_boundary: List[bool]


def _unit_grid(spec: CubeIntegralSpec, level: int) -> _Grid:
    rule = tanh_sinh_unit(level)
    coarse = coarse_weights(rule)
    grid = _Grid([], [], [], [], [])
    for k in spec.depths:
        boundary = k > 0
        grid.has_boundary.append(boundary)
        grid.axis_nodes.append(np.append(rule.nodes, 1.0) if boundary else rule.nodes)
        grid.axis_weights.append(rule.weights)
        grid.axis_coarse.append(coarse)
        grid.axis_logs.append(rule.log_nodes)
    return grid


def _choices(depths: Sequence[int]) -> List[Tuple[int, ...]]:
    """Per axis a boundary order 0..k-1 or REMAINDER."""
    return list(product(*([*range(k), REMAINDER] for k in depths)))


def ibp_raw_germ(
    spec: CubeIntegralSpec,
    quadcfg: Optional[QuadratureConfig] = None,
    cache: Optional[ChiJetCache] = None,
    extra_order: int = 0,
) -> Tuple[RawGerm, float]:
    """
    The continued cube integral as an undecomposed sum of quotients.

    Every numerator is computed to order D + extra_order + (its pole count) so that a later
    product with a holomorphic jet and one decomposition keep order D.

    Returns:
        Tuple[RawGerm, float]: the raw germ and a quadrature error estimate on the σ⁰ values.
    """
    quadcfg = quadcfg or QuadratureConfig()
    p = spec.n_variables
    target = spec.order + extra_order
    if spec.dim == 0:
        value = spec.factor.taylor_grid(np.zeros((1, 0)), ())[0, 0]
        return RawGerm.single(Jet.constant(p, target, value)), 0.0
    grid = _unit_grid(spec, quadcfg.t_level)
    size = float(np.prod([len(n) for n in grid.axis_nodes]))
    if size > quadcfg.max_tensor_points:
        return _ibp_monte_carlo(spec, quadcfg, cache, target)
    mesh = np.meshgrid(*grid.axis_nodes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=-1)
    caps = spec.depths
    coeffs = (
        cache.taylor_grid(spec.factor, points, caps)
        if cache is not None
        else spec.factor.taylor_grid(points, caps)
    )
    scale = np.array([index_factorial(b) for b in box_indices(caps)], dtype=float)
    derivs = (coeffs * scale[None, :]).reshape(tuple(len(n) for n in grid.axis_nodes) + (-1,))
    position = box_position(caps)
    forms = [form.as_array() for form, _ in spec.exponents]
    terms: List[RawTerm] = []
    error = 0.0
    for choice in _choices(spec.depths):
        beta = tuple(k if c == REMAINDER else c for c, k in zip(choice, spec.depths))
        index: List[object] = []
        remainder_axes = []
        for axis, c in enumerate(choice):
            if c == REMAINDER:
                index.append(slice(0, len(grid.axis_weights[axis])))
                remainder_axes.append(axis)
            else:
                index.append(len(grid.axis_nodes[axis]) - 1)
        values = derivs[tuple(index) + (position[beta],)]
        weights = np.ones(())
        coarse = np.ones(())
        directions = np.zeros(values.shape + (p,))
        for rank, axis in enumerate(remainder_axes):
            a, k = int(spec.exponents[axis][1]), spec.depths[axis]
            nodes = grid.axis_nodes[axis][: len(grid.axis_weights[axis])]
            factor = nodes ** (a + k - 1)
            weights = np.multiply.outer(weights, grid.axis_weights[axis] * factor)
            coarse = np.multiply.outer(coarse, grid.axis_coarse[axis] * factor)
            shape = [1] * len(remainder_axes)
            shape[rank] = -1
            logs = grid.axis_logs[axis].reshape(shape + [1])
            directions = directions + logs * forms[axis]
        weighted = (values * weights).ravel()
        error += abs(complex(np.sum(values * weights)) - complex(np.sum(values * coarse)))
        terms.append(_assemble_term(spec, choice, weighted, directions.reshape(-1, p), target))
    logger.debug(f"cube of dim {spec.dim}: {len(terms)} terms, error {error:.2e}")
    return RawGerm(p, tuple(terms)), error


def _assemble_term(
    spec: CubeIntegralSpec,
    choice: Sequence[int],
    weighted: np.ndarray,
    directions: np.ndarray,
    target: int,
) -> RawTerm:
    p = spec.n_variables
    poles = 0
    for (_, a), c, k in zip(spec.exponents, choice, spec.depths):
        count = k if c == REMAINDER else c + 1
        poles += _pole_count(int(a), count)
    order = target + poles
    numerator = Jet(p, order, _exp_moments(weighted, directions, order))
    denominators: List[Denominator] = []
    for (form, a), c, k in zip(spec.exponents, choice, spec.depths):
        count, sign = (k, (-1) ** k) if c == REMAINDER else (c + 1, (-1) ** c)
        jet, dens = _coefficient(form, int(a), count, sign, order, p)
        numerator = numerator * jet
        denominators.extend(dens)
    return RawTerm(numerator, tuple(denominators))


def _ibp_monte_carlo(
    spec: CubeIntegralSpec,
    quadcfg: QuadratureConfig,
    cache: Optional[ChiJetCache],
    target: int,
) -> Tuple[RawGerm, float]:
    """Seeded uniform samples on the remainder axes, for cubes beyond the tensor-grid limit."""
    rng = np.random.default_rng(quadcfg.mc_seed())
    count = quadcfg.mc_samples
    p = spec.n_variables
    caps = spec.depths
    position = box_position(caps)
    forms = [form.as_array() for form, _ in spec.exponents]
    terms: List[RawTerm] = []
    error = 0.0
    logger.info(f"cube of dim {spec.dim} above the tensor limit, using {count} samples")
    for choice in _choices(spec.depths):
        beta = tuple(k if c == REMAINDER else c for c, k in zip(choice, spec.depths))
        points = np.ones((count, spec.dim))
        remainder_axes = [axis for axis, c in enumerate(choice) if c == REMAINDER]
        if remainder_axes:
            points[:, remainder_axes] = rng.uniform(1e-12, 1.0, size=(count, len(remainder_axes)))
        coeffs = (
            cache.taylor_grid(spec.factor, points, caps)
            if cache is not None
            else spec.factor.taylor_grid(points, caps)
        )
        values = coeffs[:, position[beta]] * index_factorial(beta)
        directions = np.zeros((count, p))
        weights = np.full(count, 1.0 / count)
        for axis in remainder_axes:
            a, k = int(spec.exponents[axis][1]), spec.depths[axis]
            weights = weights * points[:, axis] ** (a + k - 1)
            directions = directions + np.log(points[:, axis])[:, None] * forms[axis]
        weighted = values * weights
        if remainder_axes:
            error += float(np.std(values * weights * count) / np.sqrt(count))
        terms.append(_assemble_term(spec, choice, weighted, directions, target))
    return RawGerm(p, tuple(terms)), error


def ibp_extend_cube(
    spec: CubeIntegralSpec,
    quadcfg: Optional[QuadratureConfig] = None,
    cache: Optional[ChiJetCache] = None,
) -> MeromorphicGerm:
    """The continued cube integral as a canonical germ of order D."""
    raw, _ = ibp_raw_germ(spec, quadcfg, cache)
    return decompose(raw, spec.order)


def _exact_reciprocal(form: LinearForm, shift: int, order: int) -> Dict[MultiIndex, Fraction]:
    """1 / (shift + L(σ)) = Σ_n (-1)^n L(σ)^n / shift^{n+1}, in exact rationals."""
    p = form.dim
    out: Dict[MultiIndex, Fraction] = {}
    for alpha in total_degree_indices(p, order):
        n = sum(alpha)
        term = Fraction((-1) ** n * factorial(n), index_factorial(alpha)) / Fraction(shift) ** (
            n + 1
        )
        for c, a in zip(form.coeffs, alpha):
            term *= c**a
        if term:
            out[alpha] = term
    return out


def _exact_product(
    first: Dict[MultiIndex, Fraction], second: Dict[MultiIndex, Fraction], order: int
) -> Dict[MultiIndex, Fraction]:
    out: Dict[MultiIndex, Fraction] = {}
    for a, ca in first.items():
        for b, cb in second.items():
            c = tuple(x + y for x, y in zip(a, b))
            if sum(c) <= order:
                out[c] = out.get(c, Fraction(0)) + ca * cb
    return out


def model_integral_exact(
    polynomial: Mapping[MultiIndex, Fraction | int | float],
    exponents: Sequence[AxisExponent],
    order: int,
) -> MeromorphicGerm:
    """
    Exact continuation of ∫ ∏ t_e^{L_e + a_e - 1} ψ for polynomial ψ.

    Each monomial t^β integrates to ∏_e 1/(L_e(σ) + a_e + β_e); series are expanded in exact
    rationals before the single conversion to a jet.
    """
    if not exponents:
        raise InputError("the model integral needs at least one axis")
    p = exponents[0][0].dim
    terms: List[RawTerm] = []
    for beta, coef in polynomial.items():
        if len(beta) != len(exponents):
            raise InputError(f"monomial {beta} for a {len(exponents)}-dimensional cube")
        coef = Fraction(coef)
        if not coef:
            continue
        poles = sum(1 for (_, a), b in zip(exponents, beta) if a + b == 0)
        num_order = order + poles
        series: Dict[MultiIndex, Fraction] = {(0,) * p: coef}
        denominators: List[Denominator] = []
        for (form, a), b in zip(exponents, beta):
            shift = int(a) + int(b)
            if shift == 0:
                denominators.append((form, 1))
            else:
                reciprocal = _exact_reciprocal(form, shift, num_order)
                series = _exact_product(series, reciprocal, num_order)
        numerator = Jet.from_dict(p, num_order, {k: complex(v) for k, v in series.items()})
        terms.append(RawTerm(numerator, tuple(denominators)))
    return decompose(RawGerm(p, tuple(terms)), order)


__all__ = [
    "AxisExponent",
    "CubeIntegralSpec",
    "PolynomialFactor",
    "ibp_extend_cube",
    "ibp_raw_germ",
    "model_integral_exact",
]
