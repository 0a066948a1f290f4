"""
Graph combinatorics: Betti numbers, subgraphs, Kruskal trees, sector filtrations and the
divergence analysis that predicts pole hyperplanes.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from logging import getLogger
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
from networkx.utils import UnionFind

from germrenorm.core.exceptions import (
    DisconnectedGraphError,
    GraphError,
    InvalidPermutationError,
    ResourceCapError,
    TiedLengthsError,
)
from germrenorm.germs.forms import LinearForm
from germrenorm.graphs.model import (
    DivergenceReport,
    FeynmanGraph,
    MetricGraph,
    SpanningForestResult,
)

logger = getLogger(__name__)

DEFAULT_EDGE_CAP = 16

SignedEdge = Tuple[int, int]


def _multigraph(graph: FeynmanGraph, edge_set: Optional[Iterable[int]] = None) -> nx.MultiGraph:
    keep = set(graph.edge_ids if edge_set is None else edge_set)
    multi = nx.MultiGraph()
    multi.add_nodes_from(graph.vertices)
    for eid, (a, b) in zip(graph.edge_ids, graph.edges):
        if eid in keep:
            multi.add_edge(a, b, key=eid)
    return multi


def connected_components(graph: FeynmanGraph) -> List[Tuple[int, ...]]:
    """Vertex sets of the components, each in graph order, sorted by their first vertex."""
    order = {v: i for i, v in enumerate(graph.vertices)}
    comps = [tuple(sorted(c, key=order.get)) for c in nx.connected_components(_multigraph(graph))]
    return sorted(comps, key=lambda c: order[c[0]])


def is_connected(graph: FeynmanGraph) -> bool:
    return graph.n_vertices > 0 and len(connected_components(graph)) == 1


def betti(graph: FeynmanGraph) -> int:
    """b₁ = |E| - |V| + #components."""
    return graph.n_edges - graph.n_vertices + len(connected_components(graph))


def induced_subgraph(graph: FeynmanGraph, edge_set: Iterable[int]) -> FeynmanGraph:
    """The subgraph on the given edges and exactly the vertices they touch; ids preserved."""
    keep = graph.check_edges(tuple(edge_set))
    pairs = [(eid, e) for eid, e in zip(graph.edge_ids, graph.edges) if eid in keep]
    return FeynmanGraph(
        graph.incident_vertices(tuple(keep)),
        tuple(e for _, e in pairs),
        tuple(eid for eid, _ in pairs),
    )


def spanning_subgraph(graph: FeynmanGraph, edge_set: Iterable[int]) -> FeynmanGraph:
    """Like `induced_subgraph` but keeping every vertex of the graph."""
    keep = graph.check_edges(tuple(edge_set))
    pairs = [(eid, e) for eid, e in zip(graph.edge_ids, graph.edges) if eid in keep]
    return FeynmanGraph(graph.vertices, tuple(e for _, e in pairs), tuple(eid for eid, _ in pairs))


def disjoint_union(first: FeynmanGraph, second: FeynmanGraph) -> FeynmanGraph:
    """Vertices of the second graph are renumbered after those of the first; ids run 1..E₁+E₂."""
    start = max(first.vertices, default=0) + 1
    mapping = {v: start + i for i, v in enumerate(second.vertices)}
    shifted = second.relabelled(mapping)
    return FeynmanGraph(first.vertices + shifted.vertices, first.edges + shifted.edges)


def check_permutation(graph: FeynmanGraph, permutation: Sequence[int]) -> Tuple[int, ...]:
    permutation = tuple(int(e) for e in permutation)
    if sorted(permutation) != sorted(graph.edge_ids):
        raise InvalidPermutationError(
            f"{list(permutation)} is not a permutation of the edges {list(graph.edge_ids)}"
        )
    return permutation


def spanning_forest_in_order(graph: FeynmanGraph, order: Sequence[int]) -> SpanningForestResult:
    """
    Kruskal's algorithm along the given edge order.

    Returns:
        SpanningForestResult: the forest and, for every prefix of the order, whether the trace of
        the forest on the induced subgraph is a spanning forest of it.
    """
    order = check_permutation(graph, order)
    forest = UnionFind(graph.vertices)
    tree: List[int] = []
    trace_ok: List[bool] = []
    for step, eid in enumerate(order, start=1):
        a, b = graph.edge(eid)
        if forest[a] != forest[b]:
            forest.union(a, b)
            tree.append(eid)
        prefix = order[:step]
        sub = induced_subgraph(graph, prefix)
        in_tree = len(set(tree) & set(prefix))
        trace_ok.append(in_tree == sub.n_edges - betti(sub))
    return SpanningForestResult(frozenset(tree), tuple(trace_ok))


def kruskal_tree(metric: MetricGraph) -> SpanningForestResult:
    """The unique spanning tree whose trace on every step of the length filtration spans it."""
    if not is_connected(metric.graph):
        raise DisconnectedGraphError("kruskal_tree requires a connected graph")
    if not metric.is_strict:
        raise TiedLengthsError("strict metric required: edge lengths must be pairwise distinct")
    return spanning_forest_in_order(metric.graph, metric.order())


def tree_path(
    graph: FeynmanGraph, tree_edges: Iterable[int], start: int, end: int
) -> Tuple[SignedEdge, ...]:
    """
    The path from `start` to `end` inside the forest, as (edge id, sign) pairs.

    The sign is +1 when the edge is walked from its first endpoint to its second.
    """
    tree = nx.Graph()
    tree.add_nodes_from(graph.vertices)
    for eid in tree_edges:
        a, b = graph.edge(eid)
        tree.add_edge(a, b, eid=eid)
    try:
        nodes = nx.shortest_path(tree, start, end)
    except nx.NetworkXNoPath:
        raise GraphError(f"vertices {start} and {end} lie in different trees") from None
    path: List[SignedEdge] = []
    for u, v in zip(nodes, nodes[1:]):
        eid = tree.edges[u, v]["eid"]
        path.append((eid, 1 if graph.edge(eid) == (u, v) else -1))
    return tuple(path)


@dataclass(frozen=True)
class FundamentalCycle:
    """
    The cycle of T ∪ {e}: the tree path i(e) → j(e) followed by e walked back.

    Attributes:
        edge: the defining edge e.
        path: signed tree edges from i(e) to j(e).
    """

    edge: int
    path: Tuple[SignedEdge, ...]

    @property
    def edges(self) -> Tuple[int, ...]:
        return tuple(eid for eid, _ in self.path) + (self.edge,)

    @property
    def signed(self) -> Tuple[SignedEdge, ...]:
        return self.path + ((self.edge, -1),)


def fundamental_cycle(
    graph: FeynmanGraph, tree_edges: Iterable[int], edge: int
) -> FundamentalCycle:
    tree_edges = graph.check_edges(tuple(tree_edges))
    graph.check_edges((edge,))
    if edge in tree_edges:
        raise GraphError(f"edge {edge} belongs to the tree")
    if len(tree_edges) != graph.n_vertices - len(connected_components(graph)):
        raise GraphError("tree edges do not form a spanning forest")
    a, b = graph.edge(edge)
    return FundamentalCycle(edge, tree_path(graph, tree_edges, a, b))


def fundamental_cycles(graph: FeynmanGraph, tree_edges: Iterable[int]) -> List[FundamentalCycle]:
    tree_edges = frozenset(tree_edges)
    return [fundamental_cycle(graph, tree_edges, e) for e in graph.edge_ids if e not in tree_edges]


def sector_filtration(graph: FeynmanGraph, permutation: Sequence[int]) -> List[FeynmanGraph]:
    """Induced subgraphs of the growing prefixes of the permutation."""
    permutation = check_permutation(graph, permutation)
    return [induced_subgraph(graph, permutation[: i + 1]) for i in range(len(permutation))]


def enumerate_sectors(graph: FeynmanGraph) -> Iterator[Tuple[int, ...]]:
    """All E! edge orderings, lazily."""
    return permutations(graph.edge_ids)


def _check_cap(graph: FeynmanGraph, edge_cap: int) -> None:
    if graph.n_edges > edge_cap:
        raise ResourceCapError(
            f"graph has {graph.n_edges} edges, above the subgraph enumeration cap of {edge_cap}"
        )


def _subset_betti(graph: FeynmanGraph, mask: int) -> Tuple[int, int]:
    """(|E'|, b₁) of the subgraph induced by the edges selected by a bit mask."""
    forest = UnionFind()
    size = 0
    cycles = 0
    for pos, (a, b) in enumerate(graph.edges):
        if mask >> pos & 1:
            size += 1
            if forest[a] == forest[b]:
                cycles += 1
            else:
                forest.union(a, b)
    return size, cycles


def divergent_subgraphs(
    graph: FeynmanGraph, dim: int, edge_cap: int = DEFAULT_EDGE_CAP
) -> DivergenceReport:
    """
    All edge subsets G' with 2|E(G')| - d·b₁(G') ≤ 0 and their hyperplanes Σ_{e∈G'} σ_e = 0.

    The order bound sums d·b₁ - 2|E| + 1 over subsets where it is positive.
    """
    if dim < 1:
        raise GraphError(f"dimension must be at least 1, got {dim}")
    _check_cap(graph, edge_cap)
    found: List[Tuple[int, ...]] = []
    bound = 0
    for mask in range(1, 1 << graph.n_edges):
        size, b1 = _subset_betti(graph, mask)
        degree = 2 * size - dim * b1
        if degree - 1 < 0:
            bound += 1 - degree
        if degree <= 0:
            found.append(tuple(graph.edge_ids[p] for p in range(graph.n_edges) if mask >> p & 1))
    found.sort(key=lambda s: (len(s), s))
    hyperplanes = tuple(
        LinearForm.sum_of(graph.n_edges, (graph.edge_position(e) for e in s)) for s in found
    )
    logger.debug(f"{len(found)} divergent subgraphs in d={dim}, order bound {bound}")
    return DivergenceReport(tuple(found), hyperplanes, bound, dim, graph.edge_ids)


@dataclass(frozen=True)
class SectorDivergence:
    """Per-sector count of divergent filtration steps and the IBP depth they require."""

    permutation: Tuple[int, ...]
    divergent_steps: int
    order_bound: int


def sector_divergence_profile(
    graph: FeynmanGraph, dim: int, labels: Optional[Dict[int, int]] = None
) -> Iterator[SectorDivergence]:
    """
    For each sector, the filtration steps G_e with 2|E(G_e)| + 2Σk - d·b₁(G_e) - 1 < 0.

    The sum of their deficits is the per-sector refinement of the global order bound.
    """
    labels = labels or {}
    for permutation in enumerate_sectors(graph):
        steps = 0
        bound = 0
        for sub in sector_filtration(graph, permutation):
            degree = 2 * sub.n_edges + 2 * sum(labels.get(e, 0) for e in sub.edge_ids)
            degree -= dim * betti(sub)
            if degree - 1 < 0:
                steps += 1
                bound += 1 - degree
        yield SectorDivergence(permutation, steps, bound)


def max_divergent_steps(graph: FeynmanGraph, dim: int) -> int:
    return max((p.divergent_steps for p in sector_divergence_profile(graph, dim)), default=0)


def edge_partition_by_vertex_split(
    graph: FeynmanGraph, vertices: Iterable[int]
) -> Tuple[FrozenSet[int], FrozenSet[int], FrozenSet[int]]:
    """(E_I, E_{I^c}, E_{II^c}): edges inside I, inside the complement, and crossing."""
    inside = set(vertices)
    unknown = inside - set(graph.vertices)
    if unknown:
        raise GraphError(f"vertices {sorted(unknown)} are not in the graph")
    first, second, crossing = set(), set(), set()
    for eid, (a, b) in zip(graph.edge_ids, graph.edges):
        if a in inside and b in inside:
            first.add(eid)
        elif a not in inside and b not in inside:
            second.add(eid)
        else:
            crossing.add(eid)
    return frozenset(first), frozenset(second), frozenset(crossing)


__all__ = [
    "DEFAULT_EDGE_CAP",
    "FundamentalCycle",
    "SectorDivergence",
    "SignedEdge",
    "betti",
    "check_permutation",
    "connected_components",
    "disjoint_union",
    "divergent_subgraphs",
    "edge_partition_by_vertex_split",
    "enumerate_sectors",
    "fundamental_cycle",
    "fundamental_cycles",
    "induced_subgraph",
    "is_connected",
    "kruskal_tree",
    "max_divergent_steps",
    "sector_divergence_profile",
    "sector_filtration",
    "spanning_forest_in_order",
    "spanning_subgraph",
    "tree_path",
]
