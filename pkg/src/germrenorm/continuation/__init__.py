from germrenorm.continuation.amplitude import (
    AmplitudeGermResult,
    SectorContribution,
    assemble_full_amplitude,
    default_heat_order,
    default_order,
    labelled_amplitude_germ,
    sector_sum_value,
)
from germrenorm.continuation.cube import (
    CubeIntegralSpec,
    PolynomialFactor,
    ibp_extend_cube,
    ibp_raw_germ,
    model_integral_exact,
)
from germrenorm.continuation.oracle import batched_pairing, direct_amplitude_oracle, direct_pairing

__all__ = [
    "AmplitudeGermResult",
    "CubeIntegralSpec",
    "PolynomialFactor",
    "SectorContribution",
    "assemble_full_amplitude",
    "batched_pairing",
    "default_heat_order",
    "default_order",
    "direct_amplitude_oracle",
    "direct_pairing",
    "ibp_extend_cube",
    "ibp_raw_germ",
    "labelled_amplitude_germ",
    "model_integral_exact",
    "sector_sum_value",
]
