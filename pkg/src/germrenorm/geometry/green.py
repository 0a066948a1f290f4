"""
Complex powers of the flat Laplacian and their pieces.

𝖦^s(x, y) = (1/Γ(s)) ∫₀^∞ K_t(x, y) t^{s-1} dt. The amplitude engine splits the t-integral at
t = 1: the head ∫₀¹ is continued sector by sector, while the tail ∫₁^∞ and, for a massive field,
the remainder of the Taylor expansion of e^{-tm²} are holomorphic near s = 1 and enter as
Gaussian mixtures in the vertex positions.
"""

from __future__ import annotations

from logging import getLogger
from math import factorial

import numpy as np
from scipy.special import gamma, kv, rgamma

from germrenorm.core.exceptions import (
    ConvergenceRegionError,
    DivergentTailError,
    PreconditionError,
)
from germrenorm.geometry.flat import FlatGeometry
from germrenorm.germs.jet import Jet, rgamma_jet
from germrenorm.numerics.gaussian import GaussianMixture
from germrenorm.numerics.quadrature import (
    gauss_jacobi_unit,
    gauss_legendre,
    integrate_half_line,
    integrate_unit,
)

logger = getLogger(__name__)

_FULL_LINE_SPAN = 4.0


def _kernel(geom: FlatGeometry, r2: float, t: np.ndarray) -> np.ndarray:
    d = geom.dim
    with np.errstate(under="ignore", over="ignore"):
        return (4.0 * np.pi * t) ** (-d / 2.0) * np.exp(-r2 / (4.0 * t) - t * geom.mass**2)


def green_power_quadrature(geom: FlatGeometry, s: complex, r: float, tol: float = 1e-12) -> complex:
    """
    𝖦^s at distance r by double-exponential quadrature: tanh–sinh on [0, 1], exp–sinh on
    [1, ∞). This is the brute-force oracle for the complex powers.

    Raises:
        ConvergenceRegionError: outside 0 < Re s < d/2 (massless) or Re s > 0 (massive), or r = 0.
    """
    s = complex(s)
    if r <= 0:
        raise ConvergenceRegionError("the Green function is evaluated off the diagonal only")
    if s.real <= 0 or (geom.mass == 0 and s.real >= geom.dim / 2.0):
        raise ConvergenceRegionError(f"s = {s} is outside the convergence region in d={geom.dim}")
    r2 = float(r) ** 2

    def integrand(t: np.ndarray) -> np.ndarray:
        return _kernel(geom, r2, t) * t ** (s - 1.0)

    head, head_err = integrate_unit(integrand, tol=tol, max_level=10)
    tail, tail_err = integrate_half_line(integrand, 1.0, tol=tol, max_level=10)
    logger.debug(f"green quadrature s={s} r={r}: errors {head_err:.2e}, {tail_err:.2e}")
    return complex((head + tail) * rgamma(s))


def green_power_closed_form(dim: int, s: complex, r: float) -> complex:
    """Massless 𝖦^s = Γ(d/2 - s) / (4^s π^{d/2} Γ(s)) · r^{2s-d}."""
    s = complex(s)
    if r <= 0:
        raise ConvergenceRegionError("the Green function is evaluated off the diagonal only")
    if not 0 < s.real < dim / 2.0:
        raise ConvergenceRegionError(f"s = {s} is outside 0 < Re s < {dim / 2}")
    prefactor = gamma(dim / 2.0 - s) * rgamma(s) / (4.0**s * np.pi ** (dim / 2.0))
    return complex(prefactor * r ** (2 * s - dim))


def green_function(geom: FlatGeometry, r: np.ndarray) -> np.ndarray:
    """
    The s = 1 Green function of Δ + m².

    Massless: Γ(d/2 - 1) / (4 π^{d/2}) r^{2-d}, defined for d ≥ 3.
    Massive: (2π)^{-d/2} (m/r)^{d/2-1} K_{d/2-1}(m r).
    """
    d = geom.dim
    r = np.asarray(r, dtype=float)
    if geom.mass == 0:
        if d <= 2:
            raise PreconditionError(f"the massless Green function does not exist in d={d}")
        return gamma(d / 2.0 - 1.0) / (4.0 * np.pi ** (d / 2.0)) * r ** (2.0 - d)
    m = geom.mass
    nu = d / 2.0 - 1.0
    return (2.0 * np.pi) ** (-d / 2.0) * (m / r) ** nu * kv(nu, m * r)


def _check_tail(geom: FlatGeometry) -> None:
    if geom.mass == 0 and geom.dim <= 2:
        raise DivergentTailError(
            f"the t ≥ 1 tail of the massless Green function diverges in d={geom.dim}"
        )


def green_tail(geom: FlatGeometry, r: float, order: int, tol: float = 1e-12) -> Jet:
    """
    σ-jet at s = 1 + σ of (1/Γ(s)) ∫₁^∞ K_t(r) t^{s-1} dt.

    s-derivatives enter as powers of ln t under the integral; the 1/Γ factor multiplies the
    resulting jet exactly.
    """
    _check_tail(geom)
    r2 = float(r) ** 2
    moments = []
    for j in range(order + 1):
        value, _ = integrate_half_line(
            lambda t, j=j: _kernel(geom, r2, t) * np.log(t) ** j / factorial(j),
            1.0,
            tol=tol,
            atol=1e-300,
            max_level=10,
        )
        moments.append(value.real)
    return Jet(1, order, np.array(moments, dtype=complex)) * rgamma_jet(1, order)


def tail_mixture(geom: FlatGeometry, nodes: int) -> GaussianMixture:
    """
    𝖦¹ restricted to t ≥ 1 as Σ_n w_n exp(-α_n |x - y|²_g).

    With t = 1/u the tail is (4π)^{-d/2} ∫₀¹ u^{d/2-2} e^{-u r²/4} e^{-m²/u} du. Massless tails
    use the Gauss–Jacobi rule for the weight u^{d/2-2}; massive ones integrate the whole smooth
    factor u^{d/2-2} e^{-m²/u} by Gauss–Legendre.
    """
    _check_tail(geom)
    d = geom.dim
    if geom.mass == 0:
        u, w = gauss_jacobi_unit(nodes, d / 2.0 - 2.0)
    else:
        u, w = gauss_legendre(0.0, 1.0, nodes)
        w = w * u ** (d / 2.0 - 2.0) * np.exp(-(geom.mass**2) / u)
    return GaussianMixture((4.0 * np.pi) ** (-d / 2.0) * w, u / 4.0)


def remainder_ratio(p: int, x: np.ndarray, terms: int = 40) -> np.ndarray:
    """
    R_p(x) / x^{p+1} with R_p(x) = e^{-x} - Σ_{k≤p} (-x)^k / k!.

    Summed as a power series for x ≤ 1 and directly above, where the series cancels badly.
    """
    x = np.asarray(x, dtype=float)
    series = np.zeros_like(x)
    for j in range(terms):
        series = series + (-1.0) ** (p + 1 + j) * x**j / factorial(p + 1 + j)
    partial = sum((-x) ** k / factorial(k) for k in range(p + 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (np.exp(-x) - partial) / x ** (p + 1)
    return np.where(x > 1.0, direct, series)


def head_remainder_mixture(geom: FlatGeometry, p: int, nodes: int) -> GaussianMixture:
    """
    ∫₀¹ (4πℓ)^{-d/2} e^{-r²/4ℓ} R_p(ℓ m²) dℓ as a Gaussian mixture in r² = |x - y|²_g.

    R_p(ℓm²) = (ℓm²)^{p+1} · (smooth), so the rule is Gauss–Jacobi for the weight ℓ^{p+1-d/2}.
    """
    d = geom.dim
    beta = p + 1 - d / 2.0
    if beta <= -1:
        raise PreconditionError(f"heat order p={p} is too small for d={d}: need p > d/2 - 2")
    if geom.mass == 0:
        return GaussianMixture(np.zeros(0), np.zeros(0))
    ell, w = gauss_jacobi_unit(nodes, beta)
    m2 = geom.mass**2
    weights = (4.0 * np.pi) ** (-d / 2.0) * w * m2 ** (p + 1) * remainder_ratio(p, ell * m2)
    return GaussianMixture(weights, 1.0 / (4.0 * ell))


def full_green_mixture(geom: FlatGeometry, level: int = 4) -> GaussianMixture:
    """
    𝖦¹ on the whole half line t ∈ (0, ∞) as a Gaussian mixture.

    The substitution t = exp((π/2) sinh u) with a trapezoidal rule in u makes both ends decay
    double exponentially.
    """
    _check_tail(geom)
    d = geom.dim
    h = 2.0**-level
    k = int(np.ceil(_FULL_LINE_SPAN / h))
    u = h * np.arange(-k, k + 1, dtype=float)
    log_t = 0.5 * np.pi * np.sinh(u)
    t = np.exp(log_t)
    jacobian = h * 0.5 * np.pi * np.cosh(u) * t
    with np.errstate(under="ignore"):
        weights = jacobian * (4.0 * np.pi * t) ** (-d / 2.0) * np.exp(-t * geom.mass**2)
    keep = (weights > 1e-300) & (t > 1e-14)
    return GaussianMixture(weights[keep], 1.0 / (4.0 * t[keep]))


__all__ = [
    "full_green_mixture",
    "green_function",
    "green_power_closed_form",
    "green_power_quadrature",
    "green_tail",
    "head_remainder_mixture",
    "remainder_ratio",
    "tail_mixture",
]
