"""
Renormalization by projection: R(t_G) = ev|_{s₀} ∘ π applied to the amplitude germ.
"""

from dataclasses import dataclass
from logging import getLogger
from typing import Any, Dict, List, Optional, Sequence, Tuple

from germrenorm.config import EngineConfig, QuadratureConfig
from germrenorm.continuation.amplitude import AmplitudeGermResult, assemble_full_amplitude
from germrenorm.core.exceptions import InputError
from germrenorm.geometry.flat import FlatGeometry
from germrenorm.geometry.testfn import EffectiveTestFunction, TestFunction
from germrenorm.germs.germ import MeromorphicGerm, project_holomorphic
from germrenorm.germs.jet import Jet, evaluate_at_base
from germrenorm.graphs.model import FeynmanGraph, LabelledGraph
from germrenorm.schemas import form_to_document, germ_to_document, jet_to_document
from germrenorm.sectors.cache import ChiJetCache

logger = getLogger(__name__)


@dataclass(frozen=True)
class RenormResult:
    """
    Attributes:
        value: the renormalized pairing ⟨R(t_G), φ⟩.
        germ: the amplitude germ it was projected from.
        holo_jet: π(germ).
        amplitude: the continuation diagnostics.
    """

    value: complex
    germ: MeromorphicGerm
    holo_jet: Jet
    amplitude: AmplitudeGermResult

    @property
    def quad_error(self) -> float:
        return self.amplitude.quad_error

    def to_document(self) -> Dict[str, Any]:
        return {
            "value": [self.value.real, self.value.imag],
            "quad_error": self.quad_error,
            "heat_order": self.amplitude.heat_order,
            "realized_poles": [form_to_document(f) for f in self.amplitude.realized],
            "holo": jet_to_document(self.holo_jet),
            "germ": germ_to_document(self.germ),
        }


def renormalize(
    graph: FeynmanGraph | LabelledGraph,
    fn: TestFunction | EffectiveTestFunction,
    geometry: FlatGeometry,
    quadcfg: Optional[QuadratureConfig] = None,
    engine: Optional[EngineConfig] = None,
    order: Optional[int] = None,
    heat_order: Optional[int] = None,
    cache: Optional[ChiJetCache] = None,
) -> RenormResult:
    """
    ⟨R(t_G), φ⟩ for the full amplitude germ at s₀ = (1, …, 1).

    Raises:
        DivergentTailError: massless fields in d ≤ 2.
        ResourceCapError: too many edges.
    """
    if isinstance(graph, LabelledGraph):
        graph = graph.graph
    amplitude = assemble_full_amplitude(
        graph, fn, geometry, quadcfg, engine, order=order, heat_order=heat_order, cache=cache
    )
    holo = project_holomorphic(amplitude.germ)
    value = complex(evaluate_at_base(holo))
    logger.info(f"renormalized value {value:.10g} (error {amplitude.quad_error:.2e})")
    return RenormResult(value, amplitude.germ, holo, amplitude)


@dataclass(frozen=True)
class CombinationResult:
    value: complex
    parts: Tuple[Tuple[float, RenormResult], ...]

    def to_document(self) -> Dict[str, Any]:
        return {
            "value": [self.value.real, self.value.imag],
            "quad_error": sum(abs(c) * r.quad_error for c, r in self.parts),
            "parts": [{"coefficient": c, **r.to_document()} for c, r in self.parts],
        }


def renormalize_combination(
    terms: Sequence[Tuple[float, FeynmanGraph]],
    fn: TestFunction | EffectiveTestFunction,
    geometry: FlatGeometry,
    quadcfg: Optional[QuadratureConfig] = None,
    engine: Optional[EngineConfig] = None,
    order: Optional[int] = None,
) -> CombinationResult:
    """R extended linearly over a formal combination Σ c_i t_{G_i} of graphs on the same points."""
    if not terms:
        raise InputError("an empty linear combination of graphs")
    parts: List[Tuple[float, RenormResult]] = []
    for coefficient, graph in terms:
        parts.append((float(coefficient), renormalize(graph, fn, geometry, quadcfg, engine, order)))
    value = sum((c * r.value for c, r in parts), 0j)
    return CombinationResult(value, tuple(parts))


__all__ = ["CombinationResult", "RenormResult", "renormalize", "renormalize_combination"]
