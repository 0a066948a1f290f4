"""
Numerical checks of the functional equations satisfied by the renormalization maps.

Every check returns a `CheckReport` with the relative discrepancy between two independent
routes to the same number. Gaussian test functions never have compact support, so "separated
supports" means centers at least `SEPARATION_WIDTHS` widths apart; the achieved separation is
reported with the check.
"""

from itertools import combinations
from logging import getLogger
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import yaml
from pydantic import BaseModel, Field

from germrenorm.config import EngineConfig, QuadratureConfig
from germrenorm.continuation.oracle import direct_pairing
from germrenorm.core.exceptions import InputError
from germrenorm.geometry.flat import FlatGeometry
from germrenorm.geometry.green import full_green_mixture
from germrenorm.geometry.testfn import Coupling, EffectiveTestFunction, TestFunction
from germrenorm.graphs.model import FeynmanGraph
from germrenorm.graphs.topology import (
    disjoint_union,
    edge_partition_by_vertex_split,
    spanning_subgraph,
)
from germrenorm.renorm.maps import renormalize
from germrenorm.schemas import GeometryDocument, GraphDocument, parse_model, parse_testfn

logger = getLogger(__name__)

SEPARATION_WIDTHS = 5.0
CORPUS_FILE = "corpus.yaml"


class CheckReport(BaseModel):
    """
    Outcome of one functional-equation check.

    Attributes:
        name (str): check name.
        discrepancy (float): relative difference of the two routes.
        tolerance (float): acceptance threshold.
        passed (bool): discrepancy ≤ tolerance.
        details (Dict[str, Any]): both values, separations, quadrature errors.
    """

    name: str
    discrepancy: float
    tolerance: float
    passed: bool
    details: Dict[str, Any] = Field(default_factory=dict)


def relative_discrepancy(first: complex, second: complex) -> float:
    scale = max(abs(first), abs(second))
    return 0.0 if scale == 0 else float(abs(first - second) / scale)


def _report(
    name: str, first: complex, second: complex, tolerance: float, **details: Any
) -> CheckReport:
    discrepancy = relative_discrepancy(first, second)
    report = CheckReport(
        name=name,
        discrepancy=discrepancy,
        tolerance=tolerance,
        passed=discrepancy <= tolerance,
        details={"first": [first.real, first.imag], "second": [second.real, second.imag]}
        | details,
    )
    logger.info(f"check {name}: discrepancy {discrepancy:.3e} (tolerance {tolerance:.1e})")
    return report


def support_separation(fn: TestFunction, pairs: Iterable[Tuple[int, int]]) -> float:
    """Smallest center distance between the given point pairs, in units of the largest width."""
    pairs = list(pairs)
    best = np.inf
    for term in fn.terms:
        centers = np.asarray(term.center).reshape(fn.n_points, fn.dim)
        width = float(np.max(term.width))
        for i, j in pairs:
            best = min(best, float(np.linalg.norm(centers[i] - centers[j])) / width)
    return float(best)


def _warn_separation(name: str, separation: float) -> None:
    if separation < SEPARATION_WIDTHS:
        logger.warning(
            f"{name}: supports only {separation:.2f} widths apart, "
            f"below {SEPARATION_WIDTHS:g}; the Gaussian overlap enters the discrepancy"
        )


def check_extension(
    graph: FeynmanGraph,
    fn: TestFunction,
    geometry: FlatGeometry,
    tolerance: float = 1e-4,
    quadcfg: Optional[QuadratureConfig] = None,
    engine: Optional[EngineConfig] = None,
) -> CheckReport:
    """R(t_G) agrees with the convergent pairing ∫ t_G φ away from every diagonal."""
    separation = support_separation(fn, combinations(range(fn.n_points), 2))
    _warn_separation("extension", separation)
    renormalized = renormalize(graph, fn, geometry, quadcfg, engine)
    direct = direct_pairing(graph, fn, geometry)
    return _report(
        "extension",
        renormalized.value,
        direct,
        tolerance,
        separation=separation,
        quad_error=renormalized.quad_error,
    )


def _side(graph: FeynmanGraph, vertices: Sequence[int], edges: Iterable[int]) -> FeynmanGraph:
    keep = set(edges)
    pairs = [(eid, e) for eid, e in zip(graph.edge_ids, graph.edges) if eid in keep]
    return FeynmanGraph(tuple(vertices), tuple(e for _, e in pairs), tuple(i for i, _ in pairs))


def check_locality(
    graph: FeynmanGraph,
    split: Sequence[int],
    fn_u: TestFunction,
    fn_v: TestFunction,
    geometry: FlatGeometry,
    tolerance: float = 1e-3,
    quadcfg: Optional[QuadratureConfig] = None,
    engine: Optional[EngineConfig] = None,
    crossing_level: int = 3,
) -> CheckReport:
    """
    ⟨R(t_G), φ_U ⊠ φ_V⟩ against the split computation with the crossing edges frozen.

    Without crossing edges the right-hand side is the product ⟨R(t_{G_I}), φ_U⟩·⟨R(t_{G_{I^c}}),
    φ_V⟩. Otherwise the crossing propagators are smooth on the separated supports and enter
    the test function of the graph G_I ⊔ G_{I^c} as Gaussian-mixture couplings.

    Raises:
        InputError: an empty side, or test functions of the wrong arity.
    """
    inside = [v for v in graph.vertices if v in set(split)]
    outside = [v for v in graph.vertices if v not in set(split)]
    if not inside or not outside:
        raise InputError("a locality split needs vertices on both sides")
    if fn_u.n_points != len(inside) or fn_v.n_points != len(outside):
        raise InputError(
            f"test functions on {fn_u.n_points} and {fn_v.n_points} points for a split "
            f"{len(inside)} | {len(outside)}"
        )
    first, second, crossing = edge_partition_by_vertex_split(graph, inside)
    ordered = FeynmanGraph(tuple(inside + outside), graph.edges, graph.edge_ids)
    fn = fn_u.tensor(fn_v)
    separation = support_separation(
        fn, ((i, j) for i in range(len(inside)) for j in range(len(inside), fn.n_points))
    )
    _warn_separation("locality", separation)
    lhs = renormalize(ordered, fn, geometry, quadcfg, engine)
    if not crossing:
        left = renormalize(_side(graph, inside, first), fn_u, geometry, quadcfg, engine)
        right = renormalize(_side(graph, outside, second), fn_v, geometry, quadcfg, engine)
        rhs = left.value * right.value
        error = left.quad_error + right.quad_error
    else:
        mixture = full_green_mixture(geometry, crossing_level)
        couplings = tuple(
            Coupling(ordered.vertex_position(a), ordered.vertex_position(b), mixture)
            for eid, (a, b) in zip(ordered.edge_ids, ordered.edges)
            if eid in crossing
        )
        frozen = EffectiveTestFunction(fn, couplings, geometry.metric_matrix)
        blocks = spanning_subgraph(ordered, first | second)
        split_result = renormalize(blocks, frozen, geometry, quadcfg, engine)
        rhs = split_result.value
        error = split_result.quad_error
    return _report(
        "locality",
        lhs.value,
        rhs,
        tolerance,
        separation=separation,
        crossing=sorted(crossing),
        quad_error=lhs.quad_error + error,
    )


def check_factorization(
    first: FeynmanGraph,
    second: FeynmanGraph,
    fn_first: TestFunction,
    fn_second: TestFunction,
    geometry: FlatGeometry,
    tolerance: float = 1e-3,
    quadcfg: Optional[QuadratureConfig] = None,
    engine: Optional[EngineConfig] = None,
) -> CheckReport:
    """⟨R(t_{G₁⊔G₂}), φ₁⊠φ₂⟩ = ⟨R(t_{G₁}), φ₁⟩·⟨R(t_{G₂}), φ₂⟩."""
    union = disjoint_union(first, second)
    split = union.vertices[: first.n_vertices]
    report = check_locality(
        union, split, fn_first, fn_second, geometry, tolerance, quadcfg, engine
    )
    return report.model_copy(update={"name": "factorization"})


def check_translation_covariance(
    graph: FeynmanGraph,
    fn: TestFunction,
    shift: Sequence[float],
    geometry: FlatGeometry,
    tolerance: float = 1e-4,
    quadcfg: Optional[QuadratureConfig] = None,
    engine: Optional[EngineConfig] = None,
) -> CheckReport:
    """⟨R(t_G), φ(· - a)⟩ = ⟨R(t_G), φ⟩ for a translation a of the flat space."""
    base = renormalize(graph, fn, geometry, quadcfg, engine)
    moved = renormalize(graph, fn.shifted(shift), geometry, quadcfg, engine)
    return _report(
        "translation",
        moved.value,
        base.value,
        tolerance,
        shift=list(shift),
        quad_error=base.quad_error + moved.quad_error,
    )


def check_compatibility(
    graph: FeynmanGraph,
    fn: TestFunction,
    geometry: FlatGeometry,
    mapping: Optional[Mapping[int, int]] = None,
    tolerance: float = 1e-10,
    quadcfg: Optional[QuadratureConfig] = None,
    engine: Optional[EngineConfig] = None,
) -> CheckReport:
    """
    R depends on the graph only: renaming the vertices, reversing the edge order and embedding
    into a larger label set with an unused vertex leave the value unchanged.
    """
    mapping = dict(mapping) if mapping else {v: 2 * v + 3 for v in graph.vertices}
    base = renormalize(graph, fn, geometry, quadcfg, engine).value
    renamed = renormalize(graph.relabelled(mapping), fn, geometry, quadcfg, engine).value
    reversed_graph = FeynmanGraph(
        graph.vertices, tuple(reversed(graph.edges)), tuple(reversed(graph.edge_ids))
    )
    reordered = renormalize(reversed_graph, fn, geometry, quadcfg, engine).value
    width = 1.0
    unit = TestFunction.gaussian(
        1, geometry.dim, width=width, coefficient=(2.0 * np.pi * width**2) ** (-geometry.dim / 2)
    )
    extra = max(graph.vertices, default=0) + 1
    embedded_graph = FeynmanGraph(graph.vertices + (extra,), graph.edges, graph.edge_ids)
    embedded = renormalize(embedded_graph, fn.tensor(unit), geometry, quadcfg, engine).value
    discrepancies = {
        "relabelled": relative_discrepancy(renamed, base),
        "reversed_edges": relative_discrepancy(reordered, base),
        "embedded": relative_discrepancy(embedded, base),
    }
    worst = max(discrepancies.values())
    logger.info(f"check compatibility: discrepancy {worst:.3e}")
    return CheckReport(
        name="compatibility",
        discrepancy=worst,
        tolerance=tolerance,
        passed=worst <= tolerance,
        details={"value": [base.real, base.imag], **discrepancies},
    )


def check_linearity(
    graph: FeynmanGraph,
    fn: TestFunction,
    other: TestFunction,
    a: float,
    b: float,
    geometry: FlatGeometry,
    tolerance: float = 1e-10,
    quadcfg: Optional[QuadratureConfig] = None,
    engine: Optional[EngineConfig] = None,
) -> CheckReport:
    """⟨R, aφ + bψ⟩ = a⟨R, φ⟩ + b⟨R, ψ⟩."""
    combined = renormalize(graph, fn.scaled(a) + other.scaled(b), geometry, quadcfg, engine)
    first = renormalize(graph, fn, geometry, quadcfg, engine)
    second = renormalize(graph, other, geometry, quadcfg, engine)
    return _report(
        "linearity", combined.value, a * first.value + b * second.value, tolerance, a=a, b=b
    )


def _graph(entry: Mapping[str, Any], key: str = "graph") -> FeynmanGraph:
    return parse_model(GraphDocument, entry[key], "graph").to_graph()


def _with_overrides(entry: Mapping[str, Any], key: str, base: Any) -> Any:
    """`base` with the entry's `quadrature` or `engine` fields laid over it."""
    overrides = entry.get(key)
    if not overrides:
        return base
    if not isinstance(overrides, Mapping):
        raise InputError(f"{key} overrides must be a mapping")
    return parse_model(type(base), {**base.model_dump(), **overrides}, key)


def _run_entry(
    entry: Mapping[str, Any], quadcfg: QuadratureConfig, engine: EngineConfig
) -> CheckReport:
    kind = entry.get("kind")
    quadcfg = _with_overrides(entry, "quadrature", quadcfg)
    engine = _with_overrides(entry, "engine", engine)
    geometry = parse_model(GeometryDocument, entry["geometry"], "geometry").to_geometry()
    d = geometry.dim
    graph = _graph(entry)
    n = graph.n_vertices
    tolerance = float(entry.get("tolerance", engine.tolerance))
    common = {"tolerance": tolerance, "quadcfg": quadcfg, "engine": engine}
    if kind == "extension":
        return check_extension(graph, parse_testfn(entry["testfn"], n, d), geometry, **common)
    if kind == "translation":
        fn = parse_testfn(entry["testfn"], n, d)
        shift = entry.get("shift") or [1.0] + [0.0] * (d - 1)
        return check_translation_covariance(graph, fn, shift, geometry, **common)
    if kind == "compatibility":
        fn = parse_testfn(entry["testfn"], n, d)
        mapping = {int(k): int(v) for k, v in (entry.get("mapping") or {}).items()} or None
        return check_compatibility(graph, fn, geometry, mapping, **common)
    if kind == "linearity":
        fn = parse_testfn(entry["testfn"], n, d)
        other = parse_testfn(entry["other"], n, d)
        a, b = float(entry.get("a", 2.0)), float(entry.get("b", -1.0))
        return check_linearity(graph, fn, other, a, b, geometry, **common)
    if kind == "locality":
        split = [int(v) for v in entry["split"]]
        fn_u = parse_testfn(entry["testfn"], len(split), d)
        fn_v = parse_testfn(entry["testfn_v"], n - len(split), d)
        return check_locality(graph, split, fn_u, fn_v, geometry, **common)
    if kind == "factorization":
        second = _graph(entry, "other_graph")
        fn_first = parse_testfn(entry["testfn"], n, d)
        fn_second = parse_testfn(entry["testfn_other"], second.n_vertices, d)
        return check_factorization(graph, second, fn_first, fn_second, geometry, **common)
    raise InputError(f"unknown check kind {kind!r}")


def load_corpus(path: Path | str) -> List[Dict[str, Any]]:
    """Entries of `corpus.yaml`, from the file itself or the directory holding it."""
    path = Path(path)
    if path.is_dir():
        path = path / CORPUS_FILE
    if not path.exists():
        raise InputError(f"corpus file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise InputError(f"corpus file {path} is not valid YAML: {e}") from e
    checks = data.get("checks") if isinstance(data, dict) else None
    if not isinstance(checks, list):
        raise InputError(f"corpus file {path} has no list of checks")
    return checks


def verify_corpus(
    path: Path | str,
    quadcfg: Optional[QuadratureConfig] = None,
    engine: Optional[EngineConfig] = None,
    only: Optional[Sequence[str]] = None,
) -> List[CheckReport]:
    """Run every check of the corpus, optionally restricted to the given kinds."""
    quadcfg = quadcfg or QuadratureConfig()
    engine = engine or EngineConfig()
    reports: List[CheckReport] = []
    for index, entry in enumerate(load_corpus(path)):
        if only and entry.get("kind") not in only:
            continue
        report = _run_entry(entry, quadcfg, engine)
        name = entry.get("name")
        if name:
            report = report.model_copy(update={"name": f"{report.name}: {name}"})
        reports.append(report)
        logger.info(f"corpus entry {index}: {'pass' if report.passed else 'FAIL'}")
    return reports


__all__ = [
    "CheckReport",
    "SEPARATION_WIDTHS",
    "check_compatibility",
    "check_extension",
    "check_factorization",
    "check_linearity",
    "check_locality",
    "check_translation_covariance",
    "load_corpus",
    "relative_discrepancy",
    "support_separation",
    "verify_corpus",
]
