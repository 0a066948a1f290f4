"""Feynman graphs, their subgraphs and sector combinatorics."""

from .model import (
    DivergenceReport,
    FeynmanGraph,
    LabelledGraph,
    MetricGraph,
    SpanningForestResult,
    make_graph,
    parse_edges,
)
from .topology import (
    DEFAULT_EDGE_CAP,
    FundamentalCycle,
    SectorDivergence,
    SignedEdge,
    betti,
    check_permutation,
    connected_components,
    disjoint_union,
    divergent_subgraphs,
    edge_partition_by_vertex_split,
    enumerate_sectors,
    fundamental_cycle,
    fundamental_cycles,
    induced_subgraph,
    is_connected,
    kruskal_tree,
    max_divergent_steps,
    sector_divergence_profile,
    sector_filtration,
    spanning_forest_in_order,
    spanning_subgraph,
    tree_path,
)

__all__ = [
    "DEFAULT_EDGE_CAP",
    "DivergenceReport",
    "FeynmanGraph",
    "FundamentalCycle",
    "LabelledGraph",
    "MetricGraph",
    "SectorDivergence",
    "SignedEdge",
    "SpanningForestResult",
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
    "make_graph",
    "max_divergent_steps",
    "parse_edges",
    "sector_divergence_profile",
    "sector_filtration",
    "spanning_forest_in_order",
    "spanning_subgraph",
    "tree_path",
]
