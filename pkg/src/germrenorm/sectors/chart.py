"""
Sector charts: the blow-up coordinates of one Hepp sector.

For a permutation σ of the edges (shortest first) the heat times are ℓ_{σ(e)} = ∏_{k≥e} t_k², the
spanning forest is Kruskal's along σ, and the vertex positions are

    x_i = x_root + Σ_{e ∈ path(root → i)} ± (∏_{j≥e} t_j) h_e.

Slots are 1-based in the mathematical text and 0-based here. Each connected component has its own
root position; the component's minimum vertex is the root.
"""

from __future__ import annotations

from dataclasses import dataclass
from logging import getLogger
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from germrenorm.core.contracts import GeometryBackend
from germrenorm.core.exceptions import DimensionMismatchError, InputError
from germrenorm.germs.forms import LinearForm
from germrenorm.graphs.model import LabelledGraph
from germrenorm.graphs.topology import (
    FundamentalCycle,
    SignedEdge,
    betti,
    check_permutation,
    connected_components,
    fundamental_cycles,
    sector_filtration,
    spanning_forest_in_order,
    tree_path,
)

logger = getLogger(__name__)

ExponentForm = Tuple[LinearForm, int]
# (column of the Y variable, sign, exponents of t)
SignedMonomial = Tuple[int, int, Tuple[int, ...]]


def _suffix_exponents(n_slots: int, start: int, stop: Optional[int] = None) -> Tuple[int, ...]:
    """Exponents of ∏_{start ≤ j < stop} t_j, stop defaulting to the last slot."""
    stop = n_slots if stop is None else stop
    return tuple(1 if start <= j < stop else 0 for j in range(n_slots))


@dataclass(frozen=True)
class SectorChart:
    """
    Blow-up data of one sector.

    Attributes:
        graph: the labelled graph.
        permutation: edge ids by slot, shortest heat time first.
        dim: spatial dimension d.
        tree: edge ids of the Kruskal forest for the slot order.
        cycles: fundamental cycles of the non-tree edges.
        roots: root vertex of every connected component.
        paths: signed tree path from the root of its component, per vertex in graph order.
        exponent_forms: per slot, (σ-part of c_e, c_e(s₀)).
    """

    graph: LabelledGraph
    permutation: Tuple[int, ...]
    dim: int
    tree: FrozenSet[int]
    cycles: Tuple[FundamentalCycle, ...]
    roots: Tuple[int, ...]
    paths: Tuple[Tuple[SignedEdge, ...], ...]
    exponent_forms: Tuple[ExponentForm, ...]

    @property
    def n_edges(self) -> int:
        return len(self.permutation)

    @property
    def n_vertices(self) -> int:
        return self.graph.graph.n_vertices

    @property
    def n_variables(self) -> int:
        """Root positions plus one h per tree edge, equal to the number of vertices."""
        return len(self.roots) + len(self.tree)

    def slot(self, eid: int) -> int:
        return self.permutation.index(eid)

    @property
    def tree_slots(self) -> Tuple[int, ...]:
        return tuple(sorted(self.slot(e) for e in self.tree))

    def tree_column(self, eid: int) -> int:
        """Column of h_e among the Y variables: roots first, then tree edges by slot."""
        return len(self.roots) + self.tree_slots.index(self.slot(eid))

    def root_column(self, vertex: int) -> int:
        path = self.paths[self.graph.graph.vertex_position(vertex)]
        if not path:
            return self.roots.index(vertex)
        eid, sign = path[0]
        a, b = self.graph.graph.edge(eid)
        return self.roots.index(a if sign > 0 else b)

    def tau_exponents(self, eid: int) -> Tuple[int, ...]:
        """τ_e = ∏_{j ≥ slot(e)} t_j = √ℓ_e."""
        return _suffix_exponents(self.n_edges, self.slot(eid))

    def position_monomials(self) -> List[List[SignedMonomial]]:
        """Per vertex, x_i = Σ sign · t^exps · Y[column] over the listed monomials."""
        zero = (0,) * self.n_edges
        rows: List[List[SignedMonomial]] = []
        for vertex, path in zip(self.graph.graph.vertices, self.paths):
            row: List[SignedMonomial] = [(self.root_column(vertex), 1, zero)]
            for eid, sign in path:
                row.append((self.tree_column(eid), sign, self.tau_exponents(eid)))
            rows.append(row)
        return rows

    def cycle_monomials(self) -> List[Tuple[int, List[SignedMonomial]]]:
        """
        Per non-tree edge e, (e, w_e) with (x_j(e) - x_i(e)) / τ_e = Σ sign · t^exps · h_{e'}.

        The ratio τ_{e'} / τ_e = ∏_{slot(e') ≤ j < slot(e)} t_j is a monomial because every edge
        of the cycle precedes e.
        """
        out = []
        for cycle in self.cycles:
            stop = self.slot(cycle.edge)
            terms = [
                (self.tree_column(eid), sign, _suffix_exponents(self.n_edges, self.slot(eid), stop))
                for eid, sign in cycle.path
            ]
            out.append((cycle.edge, terms))
        return out

    def to_document(self) -> Dict[str, Any]:
        return {
            "permutation": list(self.permutation),
            "tree": sorted(self.tree),
            "roots": list(self.roots),
            "cycles": [
                {"edge": c.edge, "path": [[e, s] for e, s in c.path]} for c in self.cycles
            ],
            "exponents": [
                {"sigma": form.to_strings(), "offset": offset}
                for form, offset in self.exponent_forms
            ],
            "ibp_depths": list(required_ibp_depths(self)),
        }


def sector_exponent_forms(
    graph: LabelledGraph, permutation: Sequence[int], dim: int
) -> List[ExponentForm]:
    """
    Per slot e, (Σ_{i≤e} 2σ_{σ(i)}, 2e + 2Σ_{i≤e} k_{σ(i)} - d·b₁(G_e)) with slots counted from 1.

    The forms are over the edges of the graph in edge order.
    """
    base = graph.graph
    permutation = check_permutation(base, permutation)
    out: List[ExponentForm] = []
    positions: List[int] = []
    labels = 0
    for slot, sub in enumerate(sector_filtration(base, permutation), start=1):
        eid = permutation[slot - 1]
        positions.append(base.edge_position(eid))
        labels += graph.label(eid)
        form = LinearForm.sum_of(base.n_edges, positions, scale=2)
        out.append((form, 2 * slot + 2 * labels - dim * betti(sub)))
    return out


def build_chart(graph: LabelledGraph, permutation: Sequence[int], dim: int) -> SectorChart:
    base = graph.graph
    permutation = check_permutation(base, permutation)
    forest = spanning_forest_in_order(base, permutation)
    components = connected_components(base)
    roots = tuple(min(component) for component in components)
    root_of = {v: min(component) for component in components for v in component}
    paths = tuple(tree_path(base, forest.tree_edges, root_of[v], v) for v in base.vertices)
    cycles = tuple(
        sorted(fundamental_cycles(base, forest.tree_edges), key=lambda c: permutation.index(c.edge))
    )
    exponents = tuple(sector_exponent_forms(graph, permutation, dim))
    chart = SectorChart(graph, permutation, dim, forest.tree_edges, cycles, roots, paths, exponents)
    logger.debug(f"chart {permutation}: tree {sorted(forest.tree_edges)}")
    return chart


def required_ibp_depths(chart: SectorChart) -> Tuple[int, ...]:
    """Integrations by parts per slot so that every remaining exponent at s₀ is positive."""
    return tuple(max(0, 1 - offset) for _, offset in chart.exponent_forms)


def _as_rows(value: np.ndarray, rows: int, dim: int, name: str) -> np.ndarray:
    array = np.asarray(value, dtype=float)
    if array.ndim == 1 and rows == 1:
        array = array[None, :]
    if array.shape != (rows, dim):
        raise DimensionMismatchError(f"{name} must have shape ({rows}, {dim}), got {array.shape}")
    return array


def _monomial_value(t: np.ndarray, exps: Tuple[int, ...]) -> float:
    return float(np.prod(t ** np.asarray(exps))) if exps else 1.0


def pi_forward(
    chart: SectorChart, t: Sequence[float], x: np.ndarray, h: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    The blow-up map.

    Args:
        t: slot coordinates in [0, 1]^E.
        x: root positions, shape (components, d), or (d,) for a connected graph.
        h: tree-edge vectors in slot order, shape (|T|, d).

    Returns:
        Tuple[np.ndarray, np.ndarray]: positions (n, d) in vertex order and heat times ℓ_e in
        edge order.
    """
    t = np.asarray(t, dtype=float)
    if t.shape != (chart.n_edges,):
        raise DimensionMismatchError(f"t must have {chart.n_edges} coordinates")
    x = _as_rows(x, len(chart.roots), chart.dim, "x")
    h = _as_rows(h, len(chart.tree), chart.dim, "h") if chart.tree else np.zeros((0, chart.dim))
    y = np.vstack([x, h])
    positions = np.zeros((chart.n_vertices, chart.dim))
    for i, row in enumerate(chart.position_monomials()):
        for column, sign, exps in row:
            positions[i] += sign * _monomial_value(t, exps) * y[column]
    lengths = np.zeros(chart.n_edges)
    base = chart.graph.graph
    for slot, eid in enumerate(chart.permutation):
        lengths[base.edge_position(eid)] = float(np.prod(t[slot:] ** 2))
    return positions, lengths


def pi_inverse(
    chart: SectorChart, positions: np.ndarray, lengths: Sequence[float]
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Inverse of `pi_forward` on the open sector 0 < ℓ_{σ(1)} < … < ℓ_{σ(E)} < 1.

    Raises:
        InputError: lengths outside the open sector.
    """
    base = chart.graph.graph
    lengths = np.asarray(lengths, dtype=float)
    if lengths.shape != (chart.n_edges,):
        raise DimensionMismatchError(f"lengths must have {chart.n_edges} entries")
    ordered = np.array([lengths[base.edge_position(e)] for e in chart.permutation])
    bounds = np.concatenate([[0.0], ordered, [1.0]])
    if np.any(np.diff(bounds) <= 0):
        raise InputError(
            f"lengths {lengths.tolist()} are outside the open sector {chart.permutation}"
        )
    shifted = np.append(ordered[1:], 1.0)
    t = np.sqrt(ordered / shifted)
    positions = _as_rows(positions, chart.n_vertices, chart.dim, "positions")
    x = np.array([positions[base.vertex_position(r)] for r in chart.roots])
    h = np.zeros((len(chart.tree), chart.dim))
    for eid in chart.tree:
        a, b = base.edge(eid)
        tau = float(np.prod(t[chart.slot(eid) :]))
        diff = positions[base.vertex_position(b)] - positions[base.vertex_position(a)]
        h[chart.tree_column(eid) - len(chart.roots)] = diff / tau
    return t, x, h


def pullback_edge(
    chart: SectorChart,
    eid: int,
    t: Sequence[float],
    x: np.ndarray,
    h: np.ndarray,
    geometry: GeometryBackend,
) -> float:
    """
    π*(𝐝²(x_i(e), x_j(e)) / ℓ_e) in its smooth form, never dividing by ℓ_e.

    Backends whose distance is not a quadratic form may provide `pullback_remainder(chart, eid,
    t, x, h)` for the smooth pullback of the order-3 remainder; flat backends have none.
    """
    t = np.asarray(t, dtype=float)
    h = _as_rows(h, len(chart.tree), chart.dim, "h") if chart.tree else np.zeros((0, chart.dim))
    positions, _ = pi_forward(chart, t, x, h)
    base = chart.graph.graph
    a = base.edge(eid)[0]
    metric = geometry.metric_at(positions[base.vertex_position(a)])
    offset = len(chart.roots)
    if eid in chart.tree:
        w = h[chart.tree_column(eid) - offset]
    else:
        w = np.zeros(chart.dim)
        for edge, terms in chart.cycle_monomials():
            if edge == eid:
                for column, sign, exps in terms:
                    w = w + sign * _monomial_value(t, exps) * h[column - offset]
    value = float(w @ metric @ w)
    remainder = getattr(geometry, "pullback_remainder", None)
    if callable(remainder):
        value += float(remainder(chart, eid, t, x, h))
    return value


__all__ = [
    "ExponentForm",
    "SectorChart",
    "SignedMonomial",
    "build_chart",
    "pi_forward",
    "pi_inverse",
    "pullback_edge",
    "required_ibp_depths",
    "sector_exponent_forms",
]
