"""
JSON wire formats shared by the CLI, the HTTP server and the verification corpus.

Graph, geometry and test-function documents are pydantic models that convert into the domain
types; germs, jets and reports are dumped by plain functions. Rational coefficients travel as
"n/d" strings, complex numbers as [re, im] pairs.
"""

import json
from fractions import Fraction
from typing import Any, Dict, List, Literal, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from germrenorm.common import decode_index, encode_index
from germrenorm.core.exceptions import InputError
from germrenorm.geometry.flat import FlatGeometry
from germrenorm.geometry.testfn import TestFunction
from germrenorm.germs.forms import LinearForm
from germrenorm.germs.germ import MeromorphicGerm, PolarTerm
from germrenorm.germs.jet import Jet
from germrenorm.graphs.model import (
    DivergenceReport,
    FeynmanGraph,
    LabelledGraph,
    MetricGraph,
    parse_edges,
)


class GraphDocument(BaseModel):
    """`{"vertices": [...], "edges": [[i, j], ...], "labels"?: [...], "lengths"?: [...]}`."""

    model_config = ConfigDict(extra="forbid")

    vertices: List[int]
    edges: List[List[int]] = Field(default_factory=list)
    labels: Optional[List[int]] = None
    lengths: Optional[List[float]] = None

    def to_graph(self) -> FeynmanGraph:
        return FeynmanGraph(tuple(self.vertices), parse_edges(self.edges))

    def to_labelled(self) -> LabelledGraph:
        return LabelledGraph(self.to_graph(), tuple(self.labels or ()))

    def to_metric(self) -> MetricGraph:
        if self.lengths is None:
            raise InputError("the graph document carries no edge lengths")
        return MetricGraph(self.to_graph(), tuple(self.lengths))

    @classmethod
    def from_graph(cls, graph: FeynmanGraph) -> "GraphDocument":
        return cls(vertices=list(graph.vertices), edges=[list(e) for e in graph.edges])


class GeometryDocument(BaseModel):
    """`{"type": "flat", "dim": 4, "mass": 0.0, "metric": null}`."""

    model_config = ConfigDict(extra="forbid")

    type: Literal["flat"] = "flat"
    dim: int = Field(ge=1)
    mass: float = Field(default=0.0, ge=0.0)
    metric: Optional[List[List[float]]] = None

    def to_geometry(self) -> FlatGeometry:
        return FlatGeometry.from_document(self.dim, self.mass, self.metric)


class GaussianTermDocument(BaseModel):
    """One `{"poly": {"[exps]": coef}, "center": [...], "width": w}` term."""

    poly: Optional[Dict[str, float]] = None
    center: Optional[List[float]] = None
    width: Union[float, List[float]] = 1.0

    def to_raw(self) -> Dict[str, Any]:
        poly = None
        if self.poly:
            try:
                poly = {decode_index(k): c for k, c in self.poly.items()}
            except (ValueError, TypeError) as e:
                raise InputError(f"malformed polynomial exponent key: {e}") from e
        return {"poly": poly, "center": self.center, "width": self.width}


class TestFunctionDocument(BaseModel):
    """A list of Gaussian terms, optionally with its point count and dimension."""

    __test__ = False

    n_points: Optional[int] = Field(default=None, ge=1)
    dim: Optional[int] = Field(default=None, ge=1)
    terms: List[GaussianTermDocument] = Field(default_factory=list)

    def to_testfn(self, n_points: Optional[int] = None, dim: Optional[int] = None) -> TestFunction:
        n_points = self.n_points or n_points
        dim = self.dim or dim
        if n_points is None or dim is None:
            raise InputError("the test function needs its number of points and dimension")
        return TestFunction.from_terms(n_points, dim, [t.to_raw() for t in self.terms])


def parse_model(model: type, raw: Any, what: str) -> Any:
    """Validate raw JSON data, turning validation failures into input errors."""
    try:
        return model.model_validate(raw)
    except ValidationError as e:
        raise InputError(f"invalid {what} document: {e.errors()[0]['msg']}") from e


def parse_testfn(raw: Any, n_points: Optional[int], dim: Optional[int]) -> TestFunction:
    if isinstance(raw, list):
        raw = {"terms": raw}
    return parse_model(TestFunctionDocument, raw, "test function").to_testfn(n_points, dim)


def load_json(path: str, what: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise InputError(f"{what} file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"{what} file {path} is not valid JSON: {e}") from e


def _complex(value: complex) -> List[float]:
    return [float(value.real), float(value.imag)]


def form_to_document(form: LinearForm) -> Dict[str, Any]:
    return {"coeffs": form.to_strings()}


def form_from_document(doc: Dict[str, Any]) -> LinearForm:
    return LinearForm.parse([Fraction(str(c)) for c in doc["coeffs"]])


def jet_to_document(jet: Jet, tol: float = 0.0) -> Dict[str, Any]:
    coeffs = {encode_index(alpha): _complex(c) for alpha, c in jet.items(tol)}
    return {"dim": jet.dim, "order": jet.order, "coeffs": coeffs}


def jet_from_document(doc: Dict[str, Any]) -> Jet:
    mapping = {
        decode_index(k): complex(v[0], v[1]) for k, v in doc.get("coeffs", {}).items()
    }
    return Jet.from_dict(int(doc["dim"]), int(doc["order"]), mapping)


def germ_to_document(germ: MeromorphicGerm, tol: float = 0.0) -> Dict[str, Any]:
    return {
        "dim": germ.dim,
        "base": [str(b) for b in germ.base],
        "polar": [
            {
                "dens": [
                    {"coeffs": form.to_strings(), "mult": mult} for form, mult in term.denominators
                ],
                "complement": [form.to_strings() for form in term.complement],
                "num": jet_to_document(term.numerator, tol),
            }
            for term in germ.polar
        ],
        "holo": jet_to_document(germ.holo, tol),
    }


def germ_from_document(doc: Dict[str, Any]) -> MeromorphicGerm:
    try:
        polar = tuple(
            PolarTerm(
                tuple((form_from_document(d), int(d["mult"])) for d in term["dens"]),
                tuple(LinearForm.parse(c) for c in term.get("complement", [])),
                jet_from_document(term["num"]),
            )
            for term in doc.get("polar", [])
        )
        base = tuple(Fraction(str(b)) for b in doc.get("base", []))
        return MeromorphicGerm(int(doc["dim"]), polar, jet_from_document(doc["holo"]), base)
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"malformed germ document: {e}") from e


def report_to_document(report: DivergenceReport) -> Dict[str, Any]:
    return {
        "dim": report.dim,
        "divergent_subgraphs": [list(s) for s in report.divergent_subgraphs],
        "hyperplanes": [
            {"edges": list(s), "rhs": report.rhs(i), "coeffs": h.to_strings()}
            for i, (s, h) in enumerate(zip(report.divergent_subgraphs, report.hyperplanes))
        ],
        "order_bound": report.order_bound,
    }


def forms_to_edges(forms: Sequence[LinearForm], edge_ids: Sequence[int]) -> List[List[int]]:
    """The edge ids carried by each form, for hyperplanes Σ_{e∈G'} σ_e."""
    return [[edge_ids[i] for i in form.support] for form in forms]


class PolesRequest(BaseModel):
    graph: GraphDocument
    dim: int = Field(ge=1)


class TreeRequest(BaseModel):
    graph: GraphDocument
    lengths: Optional[List[float]] = None


class GermRequest(BaseModel):
    """Body of /germ and /renormalize: the same documents as the CLI files."""

    graph: GraphDocument
    geometry: GeometryDocument
    testfn: Union[List[GaussianTermDocument], TestFunctionDocument]
    order: Optional[int] = Field(default=None, ge=0, le=12)
    heat_order: Optional[int] = Field(default=None, ge=0)

    def to_testfn(self) -> TestFunction:
        doc = self.testfn
        if isinstance(doc, list):
            doc = TestFunctionDocument(terms=doc)
        return doc.to_testfn(len(self.graph.vertices), self.geometry.dim)


class CombinationEntry(BaseModel):
    """One `{"coefficient": c, "graph": {...}}` summand of a formal linear combination."""

    coefficient: float = 1.0
    graph: GraphDocument


__all__ = [
    "CombinationEntry",
    "GaussianTermDocument",
    "GeometryDocument",
    "GermRequest",
    "GraphDocument",
    "PolesRequest",
    "TestFunctionDocument",
    "TreeRequest",
    "form_from_document",
    "form_to_document",
    "forms_to_edges",
    "germ_from_document",
    "germ_to_document",
    "jet_from_document",
    "jet_to_document",
    "load_json",
    "parse_model",
    "parse_testfn",
    "report_to_document",
]
