"""
Reference values computed without any blow-up or continuation.

Both oracles integrate the vertex positions in closed form: for fixed heat times the integrand is
the test function's Gaussian profiles times exp(-½ Σ_μ X^μᵀ (Σ_e 2r_e L_e) X^μ), L_e the Laplacian
of edge e. Only the heat times are integrated numerically.
"""

from logging import getLogger
from typing import Iterator, Optional, Sequence

import numpy as np
from scipy.special import rgamma

from germrenorm.config import QuadratureConfig
from germrenorm.core.exceptions import ConvergenceRegionError, InputError
from germrenorm.geometry.flat import FlatGeometry
from germrenorm.geometry.green import full_green_mixture
from germrenorm.geometry.testfn import EffectiveTestFunction, TestFunction, effective
from germrenorm.graphs.model import FeynmanGraph, LabelledGraph
from germrenorm.numerics.gaussian import GaussianProfile, integrate_profile, tensor_nodes
from germrenorm.numerics.quadrature import tanh_sinh_unit

logger = getLogger(__name__)


def _laplacians(graph: FeynmanGraph) -> np.ndarray:
    """(E, n, n): the graph Laplacian of every single edge, vertices by position."""
    n = graph.n_vertices
    out = np.zeros((graph.n_edges, n, n))
    for pos, (a, b) in enumerate(graph.edges):
        i, j = graph.vertex_position(a), graph.vertex_position(b)
        out[pos, i, i] += 1.0
        out[pos, j, j] += 1.0
        out[pos, i, j] -= 1.0
        out[pos, j, i] -= 1.0
    return out


def _chunks(size: int, chunk: int) -> Iterator[slice]:
    for start in range(0, size, chunk):
        yield slice(start, min(start + chunk, size))


def batched_pairing(
    profiles: Sequence[GaussianProfile], graph: FeynmanGraph, rates: np.ndarray, chunk: int
) -> np.ndarray:
    """
    ∫ Σ profiles · ∏_e exp(-rates[m, e] |X_a - X_b|²) dX for every row m of `rates`.
    """
    laplacians = _laplacians(graph)
    out = np.zeros(rates.shape[0])
    for part in _chunks(rates.shape[0], chunk):
        extra = 2.0 * np.einsum("me,eij->mij", rates[part], laplacians)
        for profile in profiles:
            out[part] += integrate_profile(profile, extra)
    return out


def _check_points(fn: EffectiveTestFunction, graph: FeynmanGraph, geometry: FlatGeometry) -> None:
    if fn.n_points != graph.n_vertices or fn.dim != geometry.dim:
        raise InputError(
            f"test function on {fn.n_points} points in d={fn.dim} for {graph.n_vertices} "
            f"vertices in d={geometry.dim}"
        )


def direct_amplitude_oracle(
    graph: LabelledGraph,
    s: Sequence[complex],
    fn: TestFunction | EffectiveTestFunction,
    geometry: FlatGeometry,
    quadcfg: Optional[QuadratureConfig] = None,
) -> complex:
    """
    The labelled heat amplitude at s, by tanh–sinh quadrature over the heat times ℓ ∈ [0,1]^E.

    Raises:
        ConvergenceRegionError: Re s_e + k_e ≤ d/2 for some edge.
    """
    quadcfg = quadcfg or QuadratureConfig()
    fn = effective(fn)
    base = graph.graph
    _check_points(fn, base, geometry)
    d = geometry.dim
    s = np.asarray(s, dtype=complex)
    if base.n_edges == 0:
        raise InputError("the direct oracle needs at least one edge")
    if s.shape != (base.n_edges,):
        raise InputError(f"s must have {base.n_edges} entries")
    labels = np.asarray(graph.labels, dtype=float)
    powers = s + labels - 1.0 - d / 2.0
    if np.any(powers.real <= -1.0):
        raise ConvergenceRegionError(f"s = {s.tolist()} is outside the convergence region")
    rule = tanh_sinh_unit(quadcfg.t_level)
    n_edges = base.n_edges
    mesh = np.meshgrid(*([rule.nodes] * n_edges), indexing="ij")
    ell = np.stack([m.ravel() for m in mesh], axis=-1).reshape(-1, n_edges)
    wmesh = np.meshgrid(*([rule.weights] * n_edges), indexing="ij")
    weights = np.prod(np.stack([w.ravel() for w in wmesh], axis=-1), axis=-1).reshape(-1)
    rates = geometry.isotropic_scale / (4.0 * ell)
    inner = batched_pairing(fn.to_profiles(), base, rates, quadcfg.chunk_size)
    heat = np.prod([geometry.heat_coefficient(int(k)) for k in graph.labels])
    integrand = weights * np.exp(np.log(ell) @ powers) * inner
    prefactor = (4.0 * np.pi) ** (-d * n_edges / 2.0) * np.prod(rgamma(s)) * heat
    logger.debug(f"direct oracle on {len(weights)} heat-time nodes")
    return complex(prefactor * np.sum(integrand))


def direct_pairing(
    graph: FeynmanGraph,
    fn: TestFunction | EffectiveTestFunction,
    geometry: FlatGeometry,
    level: int = 3,
    chunk: int = 40_000,
) -> float:
    """
    ⟨∏_e 𝖦¹(x_{i(e)}, x_{j(e)}), φ⟩ with every propagator written as a Gaussian mixture.

    Only meaningful where the pairing converges, e.g. for φ supported away from the diagonals.
    """
    if isinstance(graph, LabelledGraph):
        graph = graph.graph
    fn = effective(fn)
    _check_points(fn, graph, geometry)
    mixture = full_green_mixture(geometry, level)
    weights, alphas = tensor_nodes([mixture] * graph.n_edges)
    values = batched_pairing(fn.to_profiles(), graph, alphas * geometry.isotropic_scale, chunk)
    return float(np.sum(weights * values))


__all__ = ["batched_pairing", "direct_amplitude_oracle", "direct_pairing"]
