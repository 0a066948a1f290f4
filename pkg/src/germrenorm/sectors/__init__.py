"""Hepp-sector blow-up charts and the smooth sector integrand χ_σ."""

from .cache import ChiJetCache
from .chart import (
    SectorChart,
    build_chart,
    pi_forward,
    pi_inverse,
    pullback_edge,
    required_ibp_depths,
    sector_exponent_forms,
)
from .chi import AnalyticChi, QuadratureChi, chi_evaluate, chi_t_jet, make_chi_factor

__all__ = [
    "AnalyticChi",
    "ChiJetCache",
    "QuadratureChi",
    "SectorChart",
    "build_chart",
    "chi_evaluate",
    "chi_t_jet",
    "make_chi_factor",
    "pi_forward",
    "pi_inverse",
    "pullback_edge",
    "required_ibp_depths",
    "sector_exponent_forms",
]
