"""Meromorphic germs with linear poles: forms, jets, canonical decomposition."""

from .decompose import (
    decompose,
    embed_germ,
    external_product,
    from_polar,
    multiply_by_holomorphic,
    reduce_dependent_denominators,
)
from .forms import (
    LinearForm,
    are_independent,
    basis_change,
    complement_basis,
    qstar_inner,
    rank,
    solve_in_span,
)
from .germ import (
    Denominator,
    MeromorphicGerm,
    PolarTerm,
    RawGerm,
    RawTerm,
    evaluate_germ,
    project_holomorphic,
    realized_poles,
    recompose,
    residue_along,
    slice_germ,
    sum_germs,
)
from .jet import Jet, evaluate_at_base, rgamma_jet, rgamma_taylor_fd

__all__ = [
    "Denominator",
    "Jet",
    "LinearForm",
    "MeromorphicGerm",
    "PolarTerm",
    "RawGerm",
    "RawTerm",
    "are_independent",
    "basis_change",
    "complement_basis",
    "decompose",
    "embed_germ",
    "evaluate_at_base",
    "evaluate_germ",
    "external_product",
    "from_polar",
    "multiply_by_holomorphic",
    "project_holomorphic",
    "qstar_inner",
    "rank",
    "realized_poles",
    "recompose",
    "reduce_dependent_denominators",
    "residue_along",
    "rgamma_jet",
    "rgamma_taylor_fd",
    "slice_germ",
    "solve_in_span",
    "sum_germs",
]
