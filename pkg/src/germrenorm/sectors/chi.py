"""
The smooth sector integrand χ_σ(t) and its t-jets.

χ_σ(t) = 2^E ∏_e a_{k_e} ∫ exp(-¼ Σ_e π*(𝐝²/ℓ_e)) φ(π(t, x, h)) dx dh.

`AnalyticChi` integrates over (x, h) in closed form: after the blow-up the integrand is a
polynomial times a Gaussian whose precision matrix is polynomial in t, so χ and all its t-jets
come from forward Taylor arithmetic through Gauss–Jordan elimination and Stein's recursion.
`QuadratureChi` integrates numerically (tensor Gauss rules or seeded Monte Carlo) and takes
t-jets from central differences; it is the cross-check path and the route for anisotropic
metrics.
"""

from __future__ import annotations

import hashlib
from logging import getLogger
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from germrenorm.common.multiindex import box_indices, box_position, index_factorial
from germrenorm.config import ChiMethod, QuadratureConfig
from germrenorm.core.contracts import GeometryBackend, SmoothFactor
from germrenorm.core.exceptions import DimensionMismatchError, PreconditionError, ResourceCapError
from germrenorm.geometry.testfn import (
    DERIVATIVE_CAP,
    EffectiveTestFunction,
    TestFunction,
    effective,
)
from germrenorm.numerics.gaussian import GaussianProfile, profile_value
from germrenorm.numerics.quadrature import gauss_hermite, gauss_legendre, tensor_grid
from germrenorm.numerics.taylor import TaylorArray, TaylorMatrix, gauss_jordan, monomial
from germrenorm.sectors.chart import SectorChart

logger = getLogger(__name__)

MAX_QUADRATURE_AXES = 8

Sparse = Dict[int, Dict[int, TaylorArray]]


def _heat_prefactor(chart: SectorChart, geometry: GeometryBackend) -> float:
    coefficient = 1.0
    for k in chart.graph.labels:
        coefficient *= float(geometry.heat_coefficient(k, None, None))
    return 2.0**chart.n_edges * coefficient


class AnalyticChi:
    """
    Closed-form χ_σ for a flat backend with g = c·I.

    With Y = (root positions, h) and X = P(t) Y the vertex positions, the exponent is
    -½ Yᵀ A(t) Y + (Pᵀη)·Y + offset with A = S(t) + PᵀΛP, S the pulled-back heat-kernel
    quadratic form. Each profile then integrates to
    (2π)^{nd/2} det A^{-d/2} exp(offset + ½ ηᵀCη) E[poly(X)], C = P A⁻¹ Pᵀ.
    """

    def __init__(
        self,
        chart: SectorChart,
        fn: EffectiveTestFunction,
        geometry: GeometryBackend,
        chunk_size: int = 40_000,
    ):
        if fn.n_points != chart.n_vertices or fn.dim != chart.dim:
            raise DimensionMismatchError(
                f"test function on {fn.n_points} points in d={fn.dim} for a chart with "
                f"{chart.n_vertices} vertices in d={chart.dim}"
            )
        if not hasattr(geometry, "isotropic_scale"):
            raise PreconditionError("closed-form χ needs a flat backend")
        self.chart = chart
        self.metric_scale = geometry.isotropic_scale
        self.prefactor = _heat_prefactor(chart, geometry)
        self.chunk_size = chunk_size
        self.profiles: List[GaussianProfile] = fn.to_profiles()
        groups: Dict[bytes, List[GaussianProfile]] = {}
        for profile in self.profiles:
            groups.setdefault(np.ascontiguousarray(profile.precision).tobytes(), []).append(profile)
        self._groups = list(groups.values())

    @property
    def dim(self) -> int:
        return self.chart.n_edges

    def fingerprint(self) -> bytes:
        digest = hashlib.sha256()
        digest.update(repr(self.chart.to_document()).encode())
        digest.update(repr(self.chart.graph.graph.to_document()).encode())
        digest.update(np.asarray([self.metric_scale, self.prefactor, self.chart.dim]).tobytes())
        for profile in self.profiles:
            digest.update(profile.fingerprint())
        return digest.digest()

    def taylor_grid(self, points: np.ndarray, caps: Sequence[int]) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        caps = tuple(int(c) for c in caps)
        if points.shape[1] != self.dim or len(caps) != self.dim:
            raise DimensionMismatchError(f"t-points and caps must have {self.dim} coordinates")
        out = np.zeros((points.shape[0], len(box_indices(caps))))
        for start in range(0, points.shape[0], self.chunk_size):
            stop = start + self.chunk_size
            out[start:stop] = self._chunk(points[start:stop], caps)
        return out

    def _structure(self, points: np.ndarray, caps: Tuple[int, ...]) -> Tuple[Sparse, TaylorMatrix]:
        chart = self.chart
        size = points.shape[0]
        monomials: Dict[Tuple[int, ...], TaylorArray] = {}

        def mono(exps: Tuple[int, ...]) -> TaylorArray:
            if exps not in monomials:
                monomials[exps] = monomial(points, exps, caps)
            return monomials[exps]

        positions: Sparse = {}
        for row, terms in enumerate(chart.position_monomials()):
            entries = positions.setdefault(row, {})
            for column, sign, exps in terms:
                value = mono(exps) * float(sign)
                entries[column] = entries[column] + value if column in entries else value
        n = chart.n_variables
        half = 0.5 * self.metric_scale
        quadratic = [[TaylorArray.constant(0.0, size, caps) for _ in range(n)] for _ in range(n)]
        for column in range(len(chart.roots), n):
            quadratic[column][column] = TaylorArray.constant(half, size, caps)
        for _, terms in chart.cycle_monomials():
            w = [(column, mono(exps) * float(sign)) for column, sign, exps in terms]
            for a, wa in w:
                for b, wb in w:
                    quadratic[a][b] = quadratic[a][b] + wa * wb * half
        return positions, quadratic

    def _chunk(self, points: np.ndarray, caps: Tuple[int, ...]) -> np.ndarray:
        size = points.shape[0]
        total = TaylorArray.constant(0.0, size, caps)
        if not self.profiles:
            return total.coeffs
        positions, quadratic = self._structure(points, caps)
        one = TaylorArray.constant(1.0, size, caps)
        n = self.chart.n_variables
        for group in self._groups:
            precision = group[0].precision
            system = [[entry.copy() for entry in row] for row in quadratic]
            for u, row_u in positions.items():
                for v, row_v in positions.items():
                    lam = float(precision[u, v])
                    if not lam:
                        continue
                    for a, pa in row_u.items():
                        for b, pb in row_v.items():
                            system[a][b] = system[a][b] + pa * pb * lam
            inverse, det = gauss_jordan(system)
            cov = self._covariance(positions, inverse, n, size, caps)
            for profile in group:
                total = total + profile_value(profile, cov, det, one)
        return (total * self.prefactor).coeffs

    @staticmethod
    def _covariance(
        positions: Sparse, inverse: TaylorMatrix, n: int, size: int, caps: Tuple[int, ...]
    ) -> TaylorMatrix:
        rows = sorted(positions)
        half: Dict[int, List[TaylorArray]] = {}
        for u in rows:
            acc = []
            for b in range(n):
                entry = TaylorArray.constant(0.0, size, caps)
                for a, pa in positions[u].items():
                    entry = entry + pa * inverse[a][b]
                acc.append(entry)
            half[u] = acc
        cov = [[TaylorArray.constant(0.0, size, caps) for _ in rows] for _ in rows]
        for u in rows:
            for v in rows:
                if v < u:
                    cov[u][v] = cov[v][u]
                    continue
                entry = TaylorArray.constant(0.0, size, caps)
                for b, pb in positions[v].items():
                    entry = entry + half[u][b] * pb
                cov[u][v] = entry
        return cov


class QuadratureChi:
    """
    χ_σ by quadrature over (x, h), jets by central differences.

    h-axes use Gauss–Hermite for the tree-edge weight exp(-¼ hᵀgh); root positions use
    Gauss–Legendre over the test function's effective support. Beyond `MAX_QUADRATURE_AXES`
    axes or `max_tensor_points` nodes, or when asked to, the nodes are seeded Monte Carlo
    samples. The samples are drawn once, so χ is a smooth function of t for the differences.
    """

    def __init__(
        self,
        chart: SectorChart,
        fn: EffectiveTestFunction,
        geometry: GeometryBackend,
        quadcfg: QuadratureConfig,
    ):
        if fn.n_points != chart.n_vertices or fn.dim != chart.dim:
            raise DimensionMismatchError("test function and chart describe different spaces")
        self.chart = chart
        self.fn = fn
        self.geometry = geometry
        self.quadcfg = quadcfg
        self.prefactor = _heat_prefactor(chart, geometry)
        self._build_nodes()

    @property
    def dim(self) -> int:
        return self.chart.n_edges

    def fingerprint(self) -> bytes:
        digest = hashlib.sha256()
        digest.update(repr(self.chart.to_document()).encode())
        digest.update(self.samples.tobytes())
        digest.update(self.weights.tobytes())
        digest.update(repr(self.fn.base).encode())
        return digest.digest()

    def _root_boxes(self, spread: float) -> List[Tuple[np.ndarray, np.ndarray]]:
        chart = self.chart
        d = chart.dim
        low, high = self.fn.support_box()
        boxes = []
        for root in chart.roots:
            members = [
                i
                for i, v in enumerate(chart.graph.graph.vertices)
                if chart.root_column(v) == chart.roots.index(root)
            ]
            lo = np.min([low[i * d : (i + 1) * d] for i in members], axis=0)
            hi = np.max([high[i * d : (i + 1) * d] for i in members], axis=0)
            reach = spread * max(len(chart.paths[i]) for i in members)
            boxes.append((lo - reach, hi + reach))
        return boxes

    def _build_nodes(self) -> None:
        chart, cfg = self.chart, self.quadcfg
        d = chart.dim
        metric = np.asarray(self.geometry.metric_at(np.zeros(d)), dtype=float)
        lower = np.linalg.cholesky(metric)
        to_h = 2.0 * np.linalg.inv(lower.T)
        h_jacobian = 2.0**d / float(np.prod(np.diag(lower)))
        n_roots, n_tree = len(chart.roots), len(chart.tree)
        axes = d * (n_roots + n_tree)
        knots, hweights = gauss_hermite(cfg.hermite_order)
        spread = float(np.max(np.abs(knots))) * float(np.max(np.abs(to_h)))
        boxes = self._root_boxes(spread)
        tensor_size = float(cfg.hermite_order) ** (d * n_tree) * float(cfg.legendre_order) ** (
            d * n_roots
        )
        use_mc = (
            cfg.chi_method == ChiMethod.MONTE_CARLO
            or axes > MAX_QUADRATURE_AXES
            or tensor_size > cfg.max_tensor_points
        )
        if use_mc:
            rng = np.random.default_rng(cfg.mc_seed())
            count = cfg.mc_samples
            roots = []
            volume = 1.0
            for lo, hi in boxes:
                roots.append(rng.uniform(lo, hi, size=(count, d)))
                volume *= float(np.prod(hi - lo))
            u = rng.normal(scale=np.sqrt(0.5), size=(count, n_tree, d))
            weights = np.full(count, volume * np.pi ** (d * n_tree / 2.0) / count)
            logger.debug(f"χ by Monte Carlo: {count} samples over {axes} axes")
        else:
            rules = []
            for lo, hi in boxes:
                rules.extend(gauss_legendre(lo[mu], hi[mu], cfg.legendre_order) for mu in range(d))
            rules.extend((knots, hweights) for _ in range(d * n_tree))
            grid, weights = tensor_grid(rules)
            count = grid.shape[0]
            roots = [grid[:, i * d : (i + 1) * d] for i in range(n_roots)]
            u = grid[:, d * n_roots :].reshape(count, n_tree, d)
            logger.debug(f"χ by tensor Gauss rules: {count} nodes over {axes} axes")
        h = np.einsum("ij,snj->sni", to_h, u)
        root_block = np.stack(roots, axis=1) if roots else np.zeros((count, 0, d))
        self.samples = np.concatenate([root_block, h], axis=1)
        self.weights = np.asarray(weights, dtype=float) * h_jacobian**n_tree

    def values(self, points: np.ndarray) -> np.ndarray:
        """χ_σ at each row of `points`; rows may leave [0, 1]^E slightly for differences."""
        chart = self.chart
        points = np.atleast_2d(np.asarray(points, dtype=float))
        metric = np.asarray(self.geometry.metric_at(np.zeros(chart.dim)), dtype=float)
        rows = chart.position_monomials()
        cycles = chart.cycle_monomials()
        out = np.zeros(points.shape[0])
        for m, t in enumerate(points):
            lift = np.zeros((chart.n_vertices, chart.n_variables))
            for i, terms in enumerate(rows):
                for column, sign, exps in terms:
                    lift[i, column] += sign * np.prod(t ** np.asarray(exps))
            x = np.einsum("vy,syd->svd", lift, self.samples)
            exponent = np.zeros(self.samples.shape[0])
            for eid, terms in cycles:
                w = sum(
                    sign * np.prod(t ** np.asarray(exps)) * self.samples[:, column]
                    for column, sign, exps in terms
                )
                pulled = np.einsum("si,ij,sj->s", w, metric, w)
                exponent -= 0.25 * pulled
                ell = np.prod(t[chart.slot(eid) :] ** 2)
                exponent += np.log(np.maximum(self.geometry.cutoff(ell * pulled), 1e-300))
            for eid in chart.tree:
                column = chart.tree_column(eid)
                hh = self.samples[:, column]
                ell = np.prod(t[chart.slot(eid) :] ** 2)
                pulled = np.einsum("si,ij,sj->s", hh, metric, hh)
                exponent += np.log(np.maximum(self.geometry.cutoff(ell * pulled), 1e-300))
            values = self.fn.evaluate(x.reshape(x.shape[0], -1)) * np.exp(exponent)
            out[m] = float(np.dot(self.weights, values))
        return out * self.prefactor

    def taylor_grid(self, points: np.ndarray, caps: Sequence[int]) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        caps = tuple(int(c) for c in caps)
        step = self.quadcfg.fd_step
        indices = box_indices(caps)
        out = np.zeros((points.shape[0], len(indices)))
        for k, beta in enumerate(indices):
            stencil = _central_stencil(beta, step)
            total = np.zeros(points.shape[0])
            for offset, coef in stencil:
                total += coef * self.values(points + np.asarray(offset)[None, :])
            out[:, k] = total / index_factorial(beta)
        return out


def _central_stencil(beta: Sequence[int], step: float) -> List[Tuple[Tuple[float, ...], float]]:
    """Tensor central differences: ∂^k f ≈ h^{-k} Σ_i (-1)^i C(k, i) f(t + (k/2 - i) h)."""
    stencil: List[Tuple[Tuple[float, ...], float]] = [((), 1.0)]
    for k in beta:
        nxt = []
        for offset, coef in stencil:
            for i in range(k + 1):
                shift = (k / 2.0 - i) * step
                nxt.append((offset + (shift,), coef * (-1) ** i * comb(k, i) / step**k))
        stencil = nxt
    return stencil


def make_chi_factor(
    chart: SectorChart,
    fn: TestFunction | EffectiveTestFunction,
    geometry: GeometryBackend,
    quadcfg: Optional[QuadratureConfig] = None,
) -> SmoothFactor:
    quadcfg = quadcfg or QuadratureConfig()
    fn = effective(fn)
    if quadcfg.chi_method == ChiMethod.ANALYTIC:
        return AnalyticChi(chart, fn, geometry, quadcfg.chunk_size)
    return QuadratureChi(chart, fn, geometry, quadcfg)


def chi_evaluate(
    chart: SectorChart,
    t: Sequence[float],
    fn: TestFunction | EffectiveTestFunction,
    geometry: GeometryBackend,
    quadcfg: Optional[QuadratureConfig] = None,
) -> float:
    """χ_σ(t)."""
    factor = make_chi_factor(chart, fn, geometry, quadcfg)
    point = np.asarray(t, dtype=float)[None, :]
    return float(factor.taylor_grid(point, (0,) * chart.n_edges)[0, 0])


def chi_t_jet(
    chart: SectorChart,
    t: Sequence[float],
    beta: Sequence[int],
    fn: TestFunction | EffectiveTestFunction,
    geometry: GeometryBackend,
    quadcfg: Optional[QuadratureConfig] = None,
) -> float:
    """
    ∂_t^β χ_σ(t).

    Raises:
        ResourceCapError: for |β| above the derivative cap.
    """
    beta = tuple(int(b) for b in beta)
    if len(beta) != chart.n_edges:
        raise DimensionMismatchError(f"multi-index must have {chart.n_edges} entries")
    if sum(beta) > DERIVATIVE_CAP:
        raise ResourceCapError(f"t-derivative of order {sum(beta)} exceeds {DERIVATIVE_CAP}")
    factor = make_chi_factor(chart, fn, geometry, quadcfg)
    grid = factor.taylor_grid(np.asarray(t, dtype=float)[None, :], beta)
    return float(grid[0, box_position(beta)[beta]]) * index_factorial(beta)


__all__ = [
    "AnalyticChi",
    "QuadratureChi",
    "chi_evaluate",
    "chi_t_jet",
    "make_chi_factor",
]
