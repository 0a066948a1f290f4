"""
Amplitude germs: sector sums of continued cube integrals.

For a labelled graph every sector σ ∈ S_E contributes the cube integral of ∏ t^{c_e(s) - 1} χ_σ,
continued by integration by parts. The raw quotients of all sectors are summed, multiplied by
(4π)^{-dE/2} ∏ 1/Γ(s_e) and decomposed once.

The full amplitude splits every propagator into its heat head (t ≤ 1) and its smooth part (the
t ≥ 1 tail, plus the remainder of the truncated heat expansion for massive fields). Summing over
the head edge sets E₁ ⊆ E, the smooth parts enter the test function as frozen radial factors and
the heads are continued as labelled amplitudes.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from logging import getLogger
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import rgamma

from germrenorm.config import EngineConfig, QuadratureConfig
from germrenorm.continuation.cube import CubeIntegralSpec, ibp_raw_germ
from germrenorm.core.contracts import GeometryBackend
from germrenorm.core.exceptions import (
    ConvergenceRegionError,
    InputError,
    PreconditionError,
    ResourceCapError,
)
from germrenorm.geometry.flat import FlatGeometry
from germrenorm.geometry.green import head_remainder_mixture, tail_mixture
from germrenorm.geometry.testfn import Coupling, EffectiveTestFunction, TestFunction, effective
from germrenorm.germs.decompose import decompose
from germrenorm.germs.forms import LinearForm
from germrenorm.germs.germ import MeromorphicGerm, RawGerm, RawTerm, realized_poles
from germrenorm.germs.jet import Jet, rgamma_jet
from germrenorm.graphs.model import DivergenceReport, FeynmanGraph, LabelledGraph
from germrenorm.graphs.topology import (
    divergent_subgraphs,
    enumerate_sectors,
    sector_divergence_profile,
    spanning_subgraph,
)
from germrenorm.numerics.gaussian import GaussianMixture
from germrenorm.numerics.quadrature import tanh_sinh_unit
from germrenorm.schemas import form_to_document, germ_to_document, report_to_document
from germrenorm.sectors.cache import ChiJetCache
from germrenorm.sectors.chart import build_chart
from germrenorm.sectors.chi import make_chi_factor

logger = getLogger(__name__)

MAX_JET_ORDER = 12


@dataclass(frozen=True)
class SectorContribution:
    """Diagnostics of one sector: its IBP depths, raw term count and quadrature error."""

    permutation: Tuple[int, ...]
    depths: Tuple[int, ...]
    n_terms: int
    quad_error: float

    def to_document(self) -> Dict[str, Any]:
        return {
            "permutation": list(self.permutation),
            "depths": list(self.depths),
            "n_terms": self.n_terms,
            "quad_error": self.quad_error,
        }


@dataclass(frozen=True)
class AmplitudeGermResult:
    """
    Attributes:
        germ: the canonical amplitude germ at s₀ = (1, …, 1).
        predicted: divergent subgraphs and the hyperplanes they predict.
        realized: pole hyperplanes carried by non-negligible polar terms.
        sectors: per-sector diagnostics.
        quad_error: summed quadrature error estimate on the σ⁰ values.
        heat_order: heat expansion order of the heads, 0 for labelled amplitudes.
    """

    germ: MeromorphicGerm
    predicted: DivergenceReport
    realized: Tuple[LinearForm, ...]
    sectors: Tuple[SectorContribution, ...] = ()
    quad_error: float = 0.0
    heat_order: int = 0
    unpredicted: Tuple[LinearForm, ...] = field(default=())

    @property
    def order(self) -> int:
        return self.germ.order

    def to_document(self) -> Dict[str, Any]:
        return {
            "germ": germ_to_document(self.germ),
            "order": self.order,
            "heat_order": self.heat_order,
            "quad_error": self.quad_error,
            "predicted": report_to_document(self.predicted),
            "realized_poles": [form_to_document(f) for f in self.realized],
            "unpredicted_poles": [form_to_document(f) for f in self.unpredicted],
            "sectors": [s.to_document() for s in self.sectors],
        }


def default_order(graph: LabelledGraph, dim: int) -> int:
    """Largest per-sector count of divergent filtration steps, plus two."""
    labels = dict(zip(graph.graph.edge_ids, graph.labels))
    steps = max(
        (p.divergent_steps for p in sector_divergence_profile(graph.graph, dim, labels)),
        default=0,
    )
    return min(steps + 2, MAX_JET_ORDER)


def _prefactor_jet(n_edges: int, dim: int, order: int) -> Jet:
    """(4π)^{-dE/2} ∏_e 1/Γ(1 + σ_e)."""
    return rgamma_jet(n_edges, order) * (4.0 * np.pi) ** (-dim * n_edges / 2.0)


def _times_jet(raw: RawGerm, jet: Jet) -> RawGerm:
    return RawGerm(raw.dim, tuple(RawTerm(t.numerator * jet, t.denominators) for t in raw.terms))


def _sector_raw(
    graph: LabelledGraph,
    permutation: Tuple[int, ...],
    fn: EffectiveTestFunction,
    geometry: GeometryBackend,
    quadcfg: QuadratureConfig,
    order: int,
    extra_depth: int,
    cache: Optional[ChiJetCache],
) -> Tuple[RawGerm, SectorContribution]:
    chart = build_chart(graph, permutation, geometry.dim)
    factor = make_chi_factor(chart, fn, geometry, quadcfg)
    required = tuple(max(0, 1 - a) for _, a in chart.exponent_forms)
    spec = CubeIntegralSpec(
        exponents=chart.exponent_forms,
        factor=factor,
        order=order,
        n_variables=graph.graph.n_edges,
        depths=tuple(k + extra_depth for k in required),
    )
    raw, error = ibp_raw_germ(spec, quadcfg, cache)
    return raw, SectorContribution(tuple(permutation), spec.depths, len(raw.terms), error)


def _sector_job(payload: Tuple[Any, ...]) -> Tuple[RawGerm, SectorContribution]:
    *args, cache_dir = payload
    cache = ChiJetCache(directory=Path(cache_dir)) if cache_dir else None
    return _sector_raw(*args, cache)


def _check_edge_cap(n_edges: int, engine: EngineConfig) -> None:
    if n_edges > engine.edge_cap:
        raise ResourceCapError(f"graph has {n_edges} edges, above the cap of {engine.edge_cap}")


def _labelled_raw(
    graph: LabelledGraph,
    fn: EffectiveTestFunction,
    geometry: GeometryBackend,
    quadcfg: QuadratureConfig,
    engine: EngineConfig,
    order: int,
    cache: Optional[ChiJetCache],
    extra_depth: int = 0,
) -> Tuple[RawGerm, List[SectorContribution]]:
    """Σ_σ of the continued sector integrals times the Γ and (4π) prefactors, undecomposed."""
    n_edges = graph.graph.n_edges
    _check_edge_cap(n_edges, engine)
    sectors = list(enumerate_sectors(graph.graph))
    payloads = [(graph, tuple(p), fn, geometry, quadcfg, order, extra_depth) for p in sectors]
    if engine.jobs > 1 and len(sectors) > 1:
        cache_dir = engine.resolved_cache_dir()
        jobs = [(*p, str(cache_dir) if cache_dir else None) for p in payloads]
        with ProcessPoolExecutor(max_workers=engine.jobs) as pool:
            results = list(pool.map(_sector_job, jobs))
    else:
        results = [_sector_raw(*p, cache) for p in payloads]
    terms: List[RawTerm] = []
    contributions: List[SectorContribution] = []
    for raw, contribution in results:
        terms.extend(raw.terms)
        contributions.append(contribution)
    raw = RawGerm(n_edges, tuple(terms))
    max_poles = max((t.pole_order for t in raw.terms), default=0)
    raw = _times_jet(raw, _prefactor_jet(n_edges, geometry.dim, order + max_poles))
    logger.info(
        f"{len(sectors)} sectors of a {n_edges}-edge graph: {len(raw.terms)} raw terms, "
        f"error {sum(c.quad_error for c in contributions):.2e}"
    )
    return raw, contributions


def _finish(
    raw: RawGerm,
    graph: FeynmanGraph,
    dim: int,
    order: int,
    engine: EngineConfig,
    sectors: Sequence[SectorContribution],
    heat_order: int = 0,
) -> AmplitudeGermResult:
    if raw.dim:
        germ = decompose(raw, order)
    else:
        constant = sum((t.numerator.evaluate_at_base() for t in raw.terms), 0j)
        germ = MeromorphicGerm.holomorphic(Jet.constant(0, order, constant))
    predicted = divergent_subgraphs(graph, dim, engine.edge_cap)
    realized = realized_poles(germ, engine.realized_tolerance)
    unpredicted = tuple(f for f in realized if not predicted.predicts(f))
    for form in unpredicted:
        logger.warning(f"realized pole {form} = 0 is not predicted by any divergent subgraph")
    return AmplitudeGermResult(
        germ=germ,
        predicted=predicted,
        realized=realized,
        sectors=tuple(sectors),
        quad_error=float(sum(s.quad_error for s in sectors)),
        heat_order=heat_order,
        unpredicted=unpredicted,
    )


def labelled_amplitude_germ(
    graph: LabelledGraph,
    fn: TestFunction | EffectiveTestFunction,
    geometry: GeometryBackend,
    quadcfg: Optional[QuadratureConfig] = None,
    engine: Optional[EngineConfig] = None,
    order: Optional[int] = None,
    cache: Optional[ChiJetCache] = None,
    extra_depth: int = 0,
) -> AmplitudeGermResult:
    """
    The germ at s₀ = (1, …, 1) of the labelled heat amplitude

        (1/∏Γ(s_e)) ∫_{[0,1]^E} ∏ ℓ_e^{s_e + k_e - 1} a_{k_e} ∫ ∏ K⁰_{ℓ_e} φ dx dℓ.

    Args:
        graph: graph with heat labels k_e.
        fn: test function on the vertex positions, optionally with frozen couplings.
        geometry: the geometry backend.
        order: σ-jet order D, defaulting to the divergence-based default.
        extra_depth: integrations by parts beyond the required depth on every axis.

    Raises:
        InputError: the test function does not match the graph.
        ResourceCapError: too many edges for the subgraph enumeration.
    """
    quadcfg = quadcfg or QuadratureConfig()
    engine = engine or EngineConfig()
    fn = effective(fn)
    if fn.n_points != graph.graph.n_vertices or fn.dim != geometry.dim:
        raise InputError(
            f"test function on {fn.n_points} points in d={fn.dim} for a graph with "
            f"{graph.graph.n_vertices} vertices in d={geometry.dim}"
        )
    _check_edge_cap(graph.graph.n_edges, engine)
    order = order if order is not None else engine.order
    order = order if order is not None else default_order(graph, geometry.dim)
    raw, sectors = _labelled_raw(graph, fn, geometry, quadcfg, engine, order, cache, extra_depth)
    return _finish(raw, graph.graph, geometry.dim, order, engine, sectors)


def _smooth_mixture(geometry: FlatGeometry, heat_order: int, nodes: int) -> GaussianMixture:
    """The frozen s = 1 value of the smooth propagator part: tail plus heat remainder."""
    tail = tail_mixture(geometry, nodes)
    if geometry.mass == 0:
        return tail
    remainder = head_remainder_mixture(geometry, heat_order, nodes)
    return GaussianMixture(
        np.concatenate([tail.weights, remainder.weights]),
        np.concatenate([tail.alphas, remainder.alphas]),
    )


def default_heat_order(graph: FeynmanGraph, geometry: FlatGeometry, edge_cap: int) -> int:
    """⌊(d + order bound)/2⌋ for massive fields, 0 for massless ones."""
    if geometry.mass == 0:
        return 0
    bound = divergent_subgraphs(graph, geometry.dim, edge_cap).order_bound
    return (geometry.dim + bound) // 2


def assemble_full_amplitude(
    graph: FeynmanGraph,
    fn: TestFunction | EffectiveTestFunction,
    geometry: FlatGeometry,
    quadcfg: Optional[QuadratureConfig] = None,
    engine: Optional[EngineConfig] = None,
    order: Optional[int] = None,
    heat_order: Optional[int] = None,
    cache: Optional[ChiJetCache] = None,
) -> AmplitudeGermResult:
    """
    The germ of ⟨t_G(s), φ⟩ at s₀ = (1, …, 1) for propagators 𝖦^s = head + smooth part.

    Raises:
        DivergentTailError: massless fields in d ≤ 2.
        PreconditionError: a heat order too small for the remainder to be continuous.
    """
    quadcfg = quadcfg or QuadratureConfig()
    engine = engine or EngineConfig()
    if isinstance(graph, LabelledGraph):
        graph = graph.graph
    base = effective(fn)
    if base.n_points != graph.n_vertices:
        raise InputError(f"test function on {base.n_points} points for {graph.n_vertices} vertices")
    _check_edge_cap(graph.n_edges, engine)
    n_edges = graph.n_edges
    order = order if order is not None else engine.order
    order = order if order is not None else default_order(LabelledGraph(graph), geometry.dim)
    heat_order = (
        heat_order
        if heat_order is not None
        else default_heat_order(graph, geometry, engine.edge_cap)
    )
    if heat_order < 0 or (heat_order > 0 and geometry.mass == 0):
        raise PreconditionError(f"heat order {heat_order} needs a massive field and p ≥ 0")
    if n_edges == 0:
        value = _constant_pairing(base, geometry, quadcfg)
        raw = RawGerm.single(Jet.constant(0, order, value))
        return _finish(raw, graph, geometry.dim, order, engine, ())
    smooth = _smooth_mixture(geometry, heat_order, quadcfg.tail_nodes)
    terms: List[RawTerm] = []
    sectors: List[SectorContribution] = []
    for mask in range(1 << n_edges):
        heads = tuple(graph.edge_ids[p] for p in range(n_edges) if mask >> p & 1)
        couplings = tuple(
            Coupling(graph.vertex_position(a), graph.vertex_position(b), smooth)
            for eid, (a, b) in zip(graph.edge_ids, graph.edges)
            if eid not in heads
        )
        fn_eff = EffectiveTestFunction(base.base, base.couplings + couplings, base.metric)
        head = spanning_subgraph(graph, heads)
        if not heads:
            value = _constant_pairing(fn_eff, geometry, quadcfg)
            terms.append(RawTerm(Jet.constant(n_edges, order, value)))
            continue
        positions = [graph.edge_position(e) for e in heads]
        for labels in product(range(heat_order + 1), repeat=len(heads)):
            raw, contributions = _labelled_raw(
                LabelledGraph(head, labels), fn_eff, geometry, quadcfg, engine, order, cache
            )
            terms.extend(raw.embed(positions, n_edges).terms)
            sectors.extend(contributions)
    logger.info(f"full amplitude of a {n_edges}-edge graph: heat order {heat_order}")
    return _finish(
        RawGerm(n_edges, tuple(terms)), graph, geometry.dim, order, engine, sectors, heat_order
    )


def _constant_pairing(
    fn: EffectiveTestFunction, geometry: GeometryBackend, quadcfg: QuadratureConfig
) -> complex:
    """∫ φ_eff dx through the edgeless chart."""
    vertices = tuple(range(fn.n_points))
    chart = build_chart(LabelledGraph(FeynmanGraph(vertices, ())), (), geometry.dim)
    factor = make_chi_factor(chart, fn, geometry, quadcfg)
    return complex(factor.taylor_grid(np.zeros((1, 0)), ())[0, 0])


def sector_sum_value(
    graph: LabelledGraph,
    s: Sequence[complex],
    fn: TestFunction | EffectiveTestFunction,
    geometry: GeometryBackend,
    quadcfg: Optional[QuadratureConfig] = None,
) -> complex:
    """
    The labelled amplitude at a point s of absolute convergence, by direct quadrature of every
    sector cube without continuation.

    Raises:
        ConvergenceRegionError: Re c_e(s) ≤ 0 for some sector slot.
    """
    quadcfg = quadcfg or QuadratureConfig()
    fn = effective(fn)
    n_edges = graph.graph.n_edges
    s = np.asarray(s, dtype=complex)
    if s.shape != (n_edges,):
        raise InputError(f"s must have {n_edges} entries")
    sigma = list(s - 1.0)
    rule = tanh_sinh_unit(quadcfg.t_level)
    total = 0j
    for permutation in enumerate_sectors(graph.graph):
        chart = build_chart(graph, permutation, geometry.dim)
        exponents = np.array([form(sigma) + a for form, a in chart.exponent_forms])
        if np.any(exponents.real <= 0):
            raise ConvergenceRegionError(
                f"sector {permutation}: exponents {exponents.tolist()} outside the region"
            )
        factor = make_chi_factor(chart, fn, geometry, quadcfg)
        size = len(rule.nodes) ** n_edges
        if size > quadcfg.max_tensor_points:
            rng = np.random.default_rng(quadcfg.mc_seed())
            points = rng.uniform(1e-12, 1.0, size=(quadcfg.mc_samples, n_edges))
            weights = np.full(len(points), 1.0 / len(points))
        else:
            mesh = np.meshgrid(*([rule.nodes] * n_edges), indexing="ij")
            points = np.stack([m.ravel() for m in mesh], axis=-1)
            wmesh = np.meshgrid(*([rule.weights] * n_edges), indexing="ij")
            weights = np.prod(np.stack([w.ravel() for w in wmesh], axis=-1), axis=-1)
        values = factor.taylor_grid(points, (0,) * n_edges)[:, 0]
        powers = np.exp(np.log(points) @ (exponents - 1.0))
        total += complex(np.sum(weights * powers * values))
    prefactor = (4.0 * np.pi) ** (-geometry.dim * n_edges / 2.0) * np.prod(rgamma(s))
    return complex(prefactor * total)


__all__ = [
    "AmplitudeGermResult",
    "SectorContribution",
    "assemble_full_amplitude",
    "default_heat_order",
    "default_order",
    "labelled_amplitude_germ",
    "sector_sum_value",
]
