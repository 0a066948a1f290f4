"""Flat geometry, complex powers of the Laplacian and Gaussian test functions."""

from .flat import FlatGeometry, flat_heat_kernel
from .green import (
    full_green_mixture,
    green_function,
    green_power_closed_form,
    green_power_quadrature,
    green_tail,
    head_remainder_mixture,
    remainder_ratio,
    tail_mixture,
)
from .testfn import (
    DERIVATIVE_CAP,
    Coupling,
    EffectiveTestFunction,
    GaussianTerm,
    TestFunction,
    effective,
    testfn_eval_deriv,
)

__all__ = [
    "DERIVATIVE_CAP",
    "Coupling",
    "EffectiveTestFunction",
    "FlatGeometry",
    "GaussianTerm",
    "TestFunction",
    "effective",
    "flat_heat_kernel",
    "full_green_mixture",
    "green_function",
    "green_power_closed_form",
    "green_power_quadrature",
    "green_tail",
    "head_remainder_mixture",
    "remainder_ratio",
    "tail_mixture",
    "testfn_eval_deriv",
]
