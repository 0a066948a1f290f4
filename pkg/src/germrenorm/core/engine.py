"""
RenormEngine: the one entry point shared by the CLI and the HTTP server.

Every method takes parsed documents, runs one computation and returns a JSON-ready dict.
"""

import csv
import io
from logging import getLogger
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from injector import inject

from germrenorm.config import Config, EngineConfig, QuadratureConfig
from germrenorm.continuation import assemble_full_amplitude, labelled_amplitude_germ
from germrenorm.core.exceptions import InputError, ResourceCapError
from germrenorm.geometry.flat import FlatGeometry
from germrenorm.germs.germ import slice_germ
from germrenorm.graphs.topology import (
    divergent_subgraphs,
    enumerate_sectors,
    fundamental_cycles,
    kruskal_tree,
)
from germrenorm.renorm import renormalize, renormalize_combination, verify_corpus
from germrenorm.schemas import (
    CombinationEntry,
    GeometryDocument,
    GraphDocument,
    germ_from_document,
    parse_model,
    parse_testfn,
    report_to_document,
)
from germrenorm.sectors.cache import ChiJetCache
from germrenorm.sectors.chart import build_chart

logger = getLogger(__name__)


class RenormEngine:
    """
    Attributes:
        config: the loaded configuration.
        geometry: the default geometry, used when a request carries none.
        cache: the χ-jet cache shared by every computation of this engine.
    """

    @inject
    def __init__(self, config: Config, geometry: FlatGeometry):
        self.config = config
        self.geometry = geometry
        self.cache = ChiJetCache(directory=config.engine.resolved_cache_dir())

    @property
    def quadrature(self) -> QuadratureConfig:
        return self.config.quadrature

    @property
    def engine(self) -> EngineConfig:
        return self.config.engine

    def _geometry(self, raw: Optional[Any]) -> FlatGeometry:
        if raw is None:
            return self.geometry
        return parse_model(GeometryDocument, raw, "geometry").to_geometry()

    def poles(self, graph: Any, dim: Optional[int] = None) -> Dict[str, Any]:
        """Divergent subgraphs and predicted pole hyperplanes."""
        doc = parse_model(GraphDocument, graph, "graph")
        report = divergent_subgraphs(
            doc.to_graph(), dim or self.geometry.dim, self.engine.edge_cap
        )
        return report_to_document(report)

    def tree(self, graph: Any, lengths: Optional[Sequence[float]] = None) -> Dict[str, Any]:
        """The Kruskal sector tree of a strict metric graph and its fundamental cycles."""
        doc = parse_model(GraphDocument, graph, "graph")
        if lengths is not None:
            doc = doc.model_copy(update={"lengths": list(lengths)})
        metric = doc.to_metric()
        result = kruskal_tree(metric)
        cycles = fundamental_cycles(metric.graph, result.tree_edges)
        return {
            "order": list(metric.order()),
            "tree": sorted(result.tree_edges),
            "per_step_trace_ok": list(result.per_step_trace_ok),
            "cycles": [
                {"edge": c.edge, "edges": list(c.edges), "path": [[e, s] for e, s in c.path]}
                for c in cycles
            ],
        }

    def sectors(
        self, graph: Any, dim: Optional[int] = None, permutation: Optional[Sequence[int]] = None
    ) -> List[Dict[str, Any]]:
        """Chart dumps for one sector, or for all of them."""
        labelled = parse_model(GraphDocument, graph, "graph").to_labelled()
        dim = dim or self.geometry.dim
        if permutation is not None:
            return [build_chart(labelled, permutation, dim).to_document()]
        if labelled.graph.n_edges > self.engine.edge_cap:
            raise ResourceCapError(
                f"refusing to list the sectors of {labelled.graph.n_edges} edges"
            )
        return [
            build_chart(labelled, p, dim).to_document() for p in enumerate_sectors(labelled.graph)
        ]

    def germ(
        self,
        graph: Any,
        testfn: Any,
        geometry: Optional[Any] = None,
        order: Optional[int] = None,
        heat_order: Optional[int] = None,
        labelled: bool = False,
    ) -> Dict[str, Any]:
        """
        The amplitude germ at s₀ = (1, …, 1).

        With `labelled`, the heat amplitude of the graph's labels is continued on its own;
        otherwise the full propagators are used.
        """
        doc = parse_model(GraphDocument, graph, "graph")
        geom = self._geometry(geometry)
        fn = parse_testfn(testfn, len(doc.vertices), geom.dim)
        if labelled:
            result = labelled_amplitude_germ(
                doc.to_labelled(), fn, geom, self.quadrature, self.engine, order, self.cache
            )
        else:
            result = assemble_full_amplitude(
                doc.to_graph(),
                fn,
                geom,
                self.quadrature,
                self.engine,
                order=order,
                heat_order=heat_order,
                cache=self.cache,
            )
        return result.to_document()

    def renormalize(
        self,
        graph: Any,
        testfn: Any,
        geometry: Optional[Any] = None,
        order: Optional[int] = None,
        heat_order: Optional[int] = None,
    ) -> Dict[str, Any]:
        """⟨R(t_G), φ⟩, or its linear extension when `graph` is a list of combination entries."""
        geom = self._geometry(geometry)
        if isinstance(graph, list):
            entries = [parse_model(CombinationEntry, e, "combination entry") for e in graph]
            if not entries:
                raise InputError("an empty linear combination of graphs")
            n_points = len(entries[0].graph.vertices)
            fn = parse_testfn(testfn, n_points, geom.dim)
            terms = [(e.coefficient, e.graph.to_graph()) for e in entries]
            return renormalize_combination(
                terms, fn, geom, self.quadrature, self.engine, order
            ).to_document()
        doc = parse_model(GraphDocument, graph, "graph")
        fn = parse_testfn(testfn, len(doc.vertices), geom.dim)
        result = renormalize(
            doc.to_graph(),
            fn,
            geom,
            self.quadrature,
            self.engine,
            order=order,
            heat_order=heat_order,
            cache=self.cache,
        )
        return result.to_document()

    def verify(self, corpus: Path | str, only: Optional[Sequence[str]] = None) -> Dict[str, Any]:
        reports = verify_corpus(corpus, self.quadrature, self.engine, only)
        failed = sum(not r.passed for r in reports)
        logger.info(f"verified {len(reports)} checks, {failed} failed")
        return {
            "passed": failed == 0,
            "checks": [r.model_dump(mode="json") for r in reports],
        }

    @staticmethod
    def slice(
        germ: Dict[str, Any],
        origin: Sequence[float],
        direction: Sequence[float],
        ts: Sequence[float],
    ) -> str:
        """CSV rows `t,re,im` of the germ along σ = origin + t·direction."""
        if "germ" in germ and "dim" not in germ:
            germ = germ["germ"]
        values = slice_germ(germ_from_document(germ), origin, direction, ts)
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["t", "re", "im"])
        for t, v in zip(ts, values):
            writer.writerow([repr(float(t)), repr(float(v.real)), repr(float(v.imag))])
        return out.getvalue()


__all__ = ["RenormEngine"]
