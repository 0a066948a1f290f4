"""Quadrature rules, batched Taylor arithmetic and closed-form Gaussian integrals."""

from .gaussian import (
    GaussianMixture,
    GaussianProfile,
    couple_mixtures,
    gaussian_moment,
    integrate_profile,
    profile_value,
    tensor_nodes,
)
from .quadrature import (
    UnitRule,
    coarse_weights,
    exp_sinh,
    gauss_hermite,
    gauss_jacobi_unit,
    gauss_legendre,
    integrate_half_line,
    integrate_unit,
    tanh_sinh_unit,
    tensor_grid,
)
from .taylor import TaylorArray, gauss_jordan, monomial

__all__ = [
    "GaussianMixture",
    "GaussianProfile",
    "TaylorArray",
    "UnitRule",
    "coarse_weights",
    "couple_mixtures",
    "exp_sinh",
    "gauss_hermite",
    "gauss_jacobi_unit",
    "gauss_jordan",
    "gauss_legendre",
    "gaussian_moment",
    "integrate_half_line",
    "integrate_profile",
    "integrate_unit",
    "monomial",
    "profile_value",
    "tanh_sinh_unit",
    "tensor_grid",
    "tensor_nodes",
]
