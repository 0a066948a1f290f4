"""
Test functions on configuration space (ℝ^d)^n: finite sums of polynomial × Gaussian terms.

Coordinates are laid out vertex-major, slot v·d + μ for direction μ of point v. The family is
closed under differentiation, translation and tensor products, and every term converts to a
`GaussianProfile` for the closed-form sector integrals.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from germrenorm.common.multiindex import MultiIndex
from germrenorm.core.exceptions import InputError, PreconditionError, ResourceCapError
from germrenorm.numerics.gaussian import GaussianMixture, GaussianProfile, couple_mixtures

DERIVATIVE_CAP = 12

Poly = Dict[MultiIndex, float]


def _clean(poly: Mapping[MultiIndex, float]) -> Tuple[Tuple[MultiIndex, float], ...]:
    return tuple(sorted((tuple(e), float(c)) for e, c in poly.items() if c))


def _shift_poly(poly: Mapping[MultiIndex, float], shift: Sequence[float]) -> Poly:
    """p(x - a) expanded in monomials of x."""
    out: Poly = {}
    for exps, coef in poly.items():
        partial: Poly = {tuple(0 for _ in exps): coef}
        for i, e in enumerate(exps):
            if not e:
                continue
            expanded: Poly = {}
            for mono, c in partial.items():
                for k in range(e + 1):
                    target = mono[:i] + (k,) + mono[i + 1 :]
                    value = c * comb(e, k) * (-shift[i]) ** (e - k)
                    expanded[target] = expanded.get(target, 0.0) + value
            partial = expanded
        for mono, c in partial.items():
            out[mono] = out.get(mono, 0.0) + c
    return out


@dataclass(frozen=True)
class GaussianTerm:
    """
    poly(x) · exp(-Σ_i (x_i - center_i)² / (2 width_i²)).

    Attributes:
        poly: ((exponents, coefficient), ...) over the n·d coordinates.
        center: Gaussian center, n·d coordinates.
        width: Gaussian widths, n·d positive numbers.
    """

    poly: Tuple[Tuple[MultiIndex, float], ...]
    center: Tuple[float, ...]
    width: Tuple[float, ...]

    @property
    def size(self) -> int:
        return len(self.center)

    def poly_dict(self) -> Poly:
        return dict(self.poly)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        center = np.asarray(self.center)
        width = np.asarray(self.width)
        gauss = np.exp(-np.sum((points - center) ** 2 / (2.0 * width**2), axis=1))
        value = np.zeros(points.shape[0])
        for exps, coef in self.poly:
            value = value + coef * np.prod(points ** np.asarray(exps), axis=1)
        return value * gauss

    def derivative(self, axis: int) -> "GaussianTerm":
        """∂_i(P G) = (∂_i P - P (x_i - μ_i) / w_i²) G."""
        out: Poly = {}
        inv = 1.0 / self.width[axis] ** 2
        for exps, coef in self.poly:
            if exps[axis]:
                lower = exps[:axis] + (exps[axis] - 1,) + exps[axis + 1 :]
                out[lower] = out.get(lower, 0.0) + coef * exps[axis]
            higher = exps[:axis] + (exps[axis] + 1,) + exps[axis + 1 :]
            out[higher] = out.get(higher, 0.0) - coef * inv
            out[exps] = out.get(exps, 0.0) + coef * inv * self.center[axis]
        return GaussianTerm(_clean(out), self.center, self.width)

    def vertex_widths(self, n: int, d: int) -> np.ndarray:
        widths = np.asarray(self.width).reshape(n, d)
        if not np.allclose(widths, widths[:, :1]):
            raise PreconditionError("closed-form integration needs equal widths per point")
        return widths[:, 0]

    def to_profile(self, n: int, d: int) -> GaussianProfile:
        """The term in information form over the positions of n points in ℝ^d."""
        widths = self.vertex_widths(n, d)
        inv = 1.0 / widths**2
        center = np.asarray(self.center).reshape(n, d)
        precision = np.diag(inv)
        eta = center * inv[:, None]
        offset = -0.5 * float(np.sum(center**2 * inv[:, None]))
        return GaussianProfile(1.0, self.poly, precision, eta, offset)


@dataclass(frozen=True)
class TestFunction:
    """
    φ(x_1, ..., x_n) = Σ_terms poly · Gaussian on (ℝ^d)^n.

    Attributes:
        n_points (int): number of points n.
        dim (int): spatial dimension d.
        terms (Tuple[GaussianTerm, ...]): the summands.
    """

    __test__ = False

    n_points: int
    dim: int
    terms: Tuple[GaussianTerm, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        size = self.n_points * self.dim
        for term in self.terms:
            if term.size != size or len(term.width) != size:
                raise InputError(
                    f"test function term with {term.size} coordinates, expected {size}"
                )
            if any(w <= 0 for w in term.width):
                raise InputError("Gaussian widths must be positive")
            if any(len(e) != size for e, _ in term.poly):
                raise InputError(f"polynomial exponents must have {size} entries")

    @property
    def size(self) -> int:
        return self.n_points * self.dim

    @classmethod
    def gaussian(
        cls,
        n_points: int,
        dim: int,
        center: Optional[Sequence[float]] = None,
        width: float | Sequence[float] = 1.0,
        coefficient: float = 1.0,
        poly: Optional[Mapping[MultiIndex, float]] = None,
    ) -> "TestFunction":
        size = n_points * dim
        center = tuple(float(c) for c in center) if center is not None else (0.0,) * size
        if np.ndim(width) == 0:
            width = (float(width),) * size
        poly = dict(poly) if poly else {(0,) * size: 1.0}
        poly = {e: c * coefficient for e, c in poly.items()}
        return cls(n_points, dim, (GaussianTerm(_clean(poly), center, tuple(width)),))

    @classmethod
    def zero(cls, n_points: int, dim: int) -> "TestFunction":
        return cls(n_points, dim, ())

    @classmethod
    def from_terms(
        cls, n_points: int, dim: int, terms: Iterable[Mapping[str, object]]
    ) -> "TestFunction":
        """Terms as dicts with `poly` ({exps: coef}), `center` and `width` (scalar or list)."""
        size = n_points * dim
        parsed: List[GaussianTerm] = []
        for raw in terms:
            width = raw.get("width", 1.0)
            if np.ndim(width) == 0:
                width = [float(width)] * size
            center = raw.get("center") or [0.0] * size
            poly = raw.get("poly") or {(0,) * size: 1.0}
            parsed.append(
                GaussianTerm(
                    _clean({tuple(e): c for e, c in poly.items()}),
                    tuple(float(c) for c in center),
                    tuple(float(w) for w in width),
                )
            )
        return cls(n_points, dim, tuple(parsed))

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Values at points of shape (M, n·d) or a single point (n·d,)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.size:
            raise InputError(f"points with {points.shape[1]} coordinates, expected {self.size}")
        total = np.zeros(points.shape[0])
        for term in self.terms:
            total = total + term.evaluate(points)
        return total

    def derivative(self, beta: Sequence[int]) -> "TestFunction":
        beta = tuple(int(b) for b in beta)
        if len(beta) != self.size:
            raise InputError(f"multi-index with {len(beta)} entries, expected {self.size}")
        if sum(beta) > DERIVATIVE_CAP:
            raise ResourceCapError(f"derivative order {sum(beta)} exceeds {DERIVATIVE_CAP}")
        terms = []
        for term in self.terms:
            for axis, count in enumerate(beta):
                for _ in range(count):
                    term = term.derivative(axis)
            terms.append(term)
        return TestFunction(self.n_points, self.dim, tuple(terms))

    def shifted(self, shift: Sequence[float]) -> "TestFunction":
        """x ↦ φ(x_1 - a, ..., x_n - a) for a ∈ ℝ^d."""
        if len(shift) != self.dim:
            raise InputError(f"shift with {len(shift)} coordinates, expected {self.dim}")
        full = list(shift) * self.n_points
        terms = []
        for term in self.terms:
            poly = _shift_poly(term.poly_dict(), full)
            center = tuple(c + a for c, a in zip(term.center, full))
            terms.append(GaussianTerm(_clean(poly), center, term.width))
        return TestFunction(self.n_points, self.dim, tuple(terms))

    def scaled(self, factor: float) -> "TestFunction":
        terms = tuple(
            GaussianTerm(tuple((e, c * factor) for e, c in t.poly), t.center, t.width)
            for t in self.terms
        )
        return TestFunction(self.n_points, self.dim, terms)

    def __add__(self, other: "TestFunction") -> "TestFunction":
        if (other.n_points, other.dim) != (self.n_points, self.dim):
            raise InputError("test functions on different configuration spaces")
        return TestFunction(self.n_points, self.dim, self.terms + other.terms)

    def tensor(self, other: "TestFunction") -> "TestFunction":
        """(φ ⊠ ψ)(x, y) = φ(x) ψ(y), the points of `other` after those of `self`."""
        if other.dim != self.dim:
            raise InputError("tensor product of test functions in different dimensions")
        terms = []
        for a in self.terms:
            for b in other.terms:
                poly = {ea + eb: ca * cb for ea, ca in a.poly for eb, cb in b.poly}
                terms.append(GaussianTerm(_clean(poly), a.center + b.center, a.width + b.width))
        return TestFunction(self.n_points + other.n_points, self.dim, tuple(terms))

    def restricted_diagonal(self) -> "TestFunction":
        """x ↦ φ(x, ..., x), a test function of one point."""
        terms = []
        d, n = self.dim, self.n_points
        for term in self.terms:
            widths = np.asarray(term.width).reshape(n, d)
            center = np.asarray(term.center).reshape(n, d)
            inv = 1.0 / widths**2
            precision = inv.sum(axis=0)
            mean = (center * inv).sum(axis=0) / precision
            offset = 0.5 * (precision * mean**2 - (center**2 * inv).sum(axis=0)).sum()
            poly: Poly = {}
            for exps, coef in term.poly:
                collapsed = tuple(sum(exps[v * d + mu] for v in range(n)) for mu in range(d))
                poly[collapsed] = poly.get(collapsed, 0.0) + coef * float(np.exp(offset))
            terms.append(
                GaussianTerm(_clean(poly), tuple(mean), tuple(1.0 / np.sqrt(precision)))
            )
        return TestFunction(1, d, tuple(terms))

    def to_profiles(self) -> List[GaussianProfile]:
        return [term.to_profile(self.n_points, self.dim) for term in self.terms]

    def support_box(self, spread: float = 8.0) -> Tuple[np.ndarray, np.ndarray]:
        """Per-coordinate interval holding the Gaussian mass of every term."""
        if not self.terms:
            return np.zeros(self.size), np.zeros(self.size)
        lows = [np.asarray(t.center) - spread * np.asarray(t.width) for t in self.terms]
        highs = [np.asarray(t.center) + spread * np.asarray(t.width) for t in self.terms]
        return np.min(lows, axis=0), np.max(highs, axis=0)


@dataclass(frozen=True)
class Coupling:
    """A radial factor mixture(|x_a - x_b|²_g) between the points at positions a and b."""

    a: int
    b: int
    mixture: GaussianMixture


@dataclass(frozen=True, eq=False)
class EffectiveTestFunction:
    """
    φ · ∏ couplings: a test function times frozen radial factors between its points.

    Tail and remainder pieces of the propagators outside the continued edge set enter the
    sector engine this way.
    """

    base: TestFunction
    couplings: Tuple[Coupling, ...] = ()
    metric: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "couplings", tuple(self.couplings))
        metric = np.eye(self.base.dim) if self.metric is None else np.asarray(self.metric, float)
        if metric.shape != (self.base.dim, self.base.dim):
            raise InputError(f"metric of shape {metric.shape} for points in d={self.base.dim}")
        object.__setattr__(self, "metric", metric)
        for coupling in self.couplings:
            if not (0 <= coupling.a < self.n_points and 0 <= coupling.b < self.n_points):
                raise InputError(f"coupling between points {coupling.a} and {coupling.b}")

    @property
    def n_points(self) -> int:
        return self.base.n_points

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def size(self) -> int:
        return self.base.size

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        value = self.base.evaluate(points)
        d = self.dim
        for coupling in self.couplings:
            diff = points[:, coupling.a * d : (coupling.a + 1) * d]
            diff = diff - points[:, coupling.b * d : (coupling.b + 1) * d]
            value = value * coupling.mixture(np.einsum("mi,ij,mj->m", diff, self.metric, diff))
        return value

    def to_profiles(self) -> List[GaussianProfile]:
        """Closed-form terms, one per test term and choice of mixture nodes; needs g = c·I."""
        scale = float(self.metric[0, 0])
        if not np.allclose(self.metric, scale * np.eye(self.dim)):
            raise PreconditionError("frozen couplings integrate in closed form for g = c·I only")
        couplings = [(c.a, c.b, c.mixture) for c in self.couplings]
        return couple_mixtures(self.base.to_profiles(), couplings, scale)

    def support_box(self, spread: float = 8.0) -> Tuple[np.ndarray, np.ndarray]:
        return self.base.support_box(spread)


def effective(fn: "TestFunction | EffectiveTestFunction") -> EffectiveTestFunction:
    return fn if isinstance(fn, EffectiveTestFunction) else EffectiveTestFunction(fn)


def testfn_eval_deriv(fn: TestFunction, beta: Sequence[int], point: Sequence[float]) -> float:
    """∂^β φ at a point, exactly."""
    return float(fn.derivative(beta).evaluate(np.asarray(point, dtype=float))[0])


__all__ = [
    "DERIVATIVE_CAP",
    "Coupling",
    "EffectiveTestFunction",
    "GaussianTerm",
    "TestFunction",
    "effective",
    "testfn_eval_deriv",
]
