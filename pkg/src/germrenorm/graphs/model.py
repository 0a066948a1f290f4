"""
Graph value types.

Graphs carry stable 1-based edge ids. Subgraphs keep the ids of their parent, so every
edge-indexed quantity (labels, lengths, germ variables) can be traced back to the full graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from germrenorm.core.exceptions import GraphError, UnknownEdgeError
from germrenorm.germs.forms import LinearForm

Edge = Tuple[int, int]


@dataclass(frozen=True)
class FeynmanGraph:
    """
    A finite graph without self-loops; parallel edges allowed.

    Attributes:
        vertices (Tuple[int, ...]): distinct vertex ids, in configuration-space order.
        edges (Tuple[Edge, ...]): unordered vertex pairs (i(e), j(e)).
        edge_ids (Tuple[int, ...]): stable ids of the edges, 1..E for a parsed graph.
    """

    vertices: Tuple[int, ...]
    edges: Tuple[Edge, ...]
    edge_ids: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(int(v) for v in self.vertices))
        object.__setattr__(self, "edges", tuple((int(a), int(b)) for a, b in self.edges))
        if not self.edge_ids:
            object.__setattr__(self, "edge_ids", tuple(range(1, len(self.edges) + 1)))
        else:
            object.__setattr__(self, "edge_ids", tuple(int(e) for e in self.edge_ids))
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError(f"duplicate vertex ids in {list(self.vertices)}")
        if len(self.edge_ids) != len(self.edges) or len(set(self.edge_ids)) != len(self.edges):
            raise GraphError("edge ids must be distinct and match the edge list")
        known = set(self.vertices)
        for eid, (a, b) in zip(self.edge_ids, self.edges):
            if a == b:
                raise GraphError(f"edge {eid} is a self-loop at vertex {a}")
            if a not in known or b not in known:
                raise GraphError(f"edge {eid} = ({a}, {b}) has an endpoint outside the vertex set")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge(self, eid: int) -> Edge:
        return self.edges[self.edge_position(eid)]

    def edge_position(self, eid: int) -> int:
        try:
            return self.edge_ids.index(eid)
        except ValueError:
            raise UnknownEdgeError(f"unknown edge index {eid}") from None

    def vertex_position(self, vertex: int) -> int:
        return self.vertices.index(vertex)

    def check_edges(self, edge_set: Sequence[int]) -> FrozenSet[int]:
        unknown = set(edge_set) - set(self.edge_ids)
        if unknown:
            raise UnknownEdgeError(f"unknown edge index {sorted(unknown)[0]}")
        return frozenset(edge_set)

    def incident_vertices(self, edge_set: Sequence[int]) -> Tuple[int, ...]:
        touched = {v for eid in edge_set for v in self.edge(eid)}
        return tuple(v for v in self.vertices if v in touched)

    def relabelled(self, mapping: Dict[int, int]) -> "FeynmanGraph":
        """Rename vertices; edge ids and order are preserved."""
        return FeynmanGraph(
            tuple(mapping[v] for v in self.vertices),
            tuple((mapping[a], mapping[b]) for a, b in self.edges),
            self.edge_ids,
        )

    def to_document(self) -> Dict[str, List]:
        return {"vertices": list(self.vertices), "edges": [list(e) for e in self.edges]}


@dataclass(frozen=True)
class LabelledGraph:
    """A graph with a nonnegative heat label k_e per edge, aligned with `graph.edges`."""

    graph: FeynmanGraph
    labels: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        labels = tuple(int(k) for k in self.labels) or (0,) * self.graph.n_edges
        if len(labels) != self.graph.n_edges:
            raise GraphError(
                f"{len(labels)} labels given for a graph with {self.graph.n_edges} edges"
            )
        if any(k < 0 for k in labels):
            raise GraphError("heat labels must be nonnegative")
        object.__setattr__(self, "labels", labels)

    def label(self, eid: int) -> int:
        return self.labels[self.graph.edge_position(eid)]


@dataclass(frozen=True)
class MetricGraph:
    """A graph with a positive length ℓ_e per edge, aligned with `graph.edges`."""

    graph: FeynmanGraph
    lengths: Tuple[float, ...]

    def __post_init__(self) -> None:
        lengths = tuple(float(x) for x in self.lengths)
        if len(lengths) != self.graph.n_edges:
            raise GraphError(
                f"{len(lengths)} lengths given for a graph with {self.graph.n_edges} edges"
            )
        if any(x <= 0 for x in lengths):
            raise GraphError("edge lengths must be positive")
        object.__setattr__(self, "lengths", lengths)

    @property
    def is_strict(self) -> bool:
        return len(set(self.lengths)) == len(self.lengths)

    def length(self, eid: int) -> float:
        return self.lengths[self.graph.edge_position(eid)]

    def order(self) -> Tuple[int, ...]:
        """Edge ids sorted by increasing length."""
        return tuple(eid for _, eid in sorted(zip(self.lengths, self.graph.edge_ids)))


@dataclass(frozen=True)
class SpanningForestResult:
    """
    Attributes:
        tree_edges (FrozenSet[int]): edge ids of the spanning forest.
        per_step_trace_ok (Tuple[bool, ...]): whether the trace on each filtration step
            is a spanning forest of that step.
    """

    tree_edges: FrozenSet[int]
    per_step_trace_ok: Tuple[bool, ...] = ()


@dataclass(frozen=True)
class DivergenceReport:
    """
    Divergent subgraphs of a graph in dimension d and the pole hyperplanes they predict.

    Attributes:
        divergent_subgraphs: sorted edge-id tuples with 2|E(G')| - d·b₁(G') ≤ 0.
        hyperplanes: Σ_{e∈G'} σ_e, one per listed subgraph, over the edges of the graph.
        order_bound: Σ over subgraphs with 2|E| - d·b₁ - 1 < 0 of (d·b₁ - 2|E| + 1).
        dim: spatial dimension.
        edge_ids: the variable order of the hyperplane forms.
    """

    divergent_subgraphs: Tuple[Tuple[int, ...], ...]
    hyperplanes: Tuple[LinearForm, ...]
    order_bound: int
    dim: int
    edge_ids: Tuple[int, ...] = field(default=())

    def rhs(self, index: int) -> int:
        """Right-hand side of Σ_{e∈G'} s_e = |E(G')| in unshifted coordinates."""
        return len(self.divergent_subgraphs[index])

    def predicts(self, form: LinearForm) -> bool:
        canonical = form.canonical()[0]
        return any(canonical == h.canonical()[0] for h in self.hyperplanes)


def parse_edges(raw_edges: Sequence[Sequence[int]]) -> Tuple[Edge, ...]:
    edges: List[Edge] = []
    for item in raw_edges:
        if len(item) != 2:
            raise GraphError(f"an edge must have two endpoints, got {list(item)}")
        edges.append((int(item[0]), int(item[1])))
    return tuple(edges)


def make_graph(
    vertices: Sequence[int], edges: Sequence[Sequence[int]], labels: Optional[Sequence[int]] = None
) -> LabelledGraph:
    return LabelledGraph(FeynmanGraph(tuple(vertices), parse_edges(edges)), tuple(labels or ()))


__all__ = [
    "DivergenceReport",
    "Edge",
    "FeynmanGraph",
    "LabelledGraph",
    "MetricGraph",
    "SpanningForestResult",
    "make_graph",
    "parse_edges",
]
