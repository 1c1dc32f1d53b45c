"""
Radial kernels and multipliers: Ω̂ and its sharp/flat variants, the Bochner–Riesz
kernel Ω^δ, the weight ω(r), the cone multiplier Λ̂^α and the ring cutoff φ̂.
"""
import cmath
import math
from enum import Enum
from functools import lru_cache
from typing import Tuple, Union

import numpy as np

from brlab.core import (DEFAULT_CESARO_DEPTH, DEFAULT_SERIES_CUT, ComplexParam,
                        Number, as_param, require_re_range)
from brlab.errors import DomainError, SingularSetError
from brlab.logging_config import get_logger
from brlab.services.specfun import bessel_j, gamma_complex, rgamma
from brlab.utils.quadrature import panel_rule, tanh_sinh

logger = get_logger(__name__)

_SERIES_TERMS = 4
_LAMBDA_CHUNK = 1 << 18


class RadialKernelKind(str, Enum):
    STANDARD = "standard"
    SHARP = "sharp"
    FLAT = "flat"


def kernel_order(kind: Union[str, RadialKernelKind], alpha: Union[Number, ComplexParam],
                 n: int = 2) -> complex:
    """Bessel order of Ω̂ for each kernel kind."""
    kind = RadialKernelKind(kind)
    a = as_param("α", alpha).value
    if kind is RadialKernelKind.STANDARD:
        return a - 0.5
    if kind is RadialKernelKind.SHARP:
        return a - 1.0
    return (n - 1) / 2.0 + a - 0.5


def radial_bessel(nu: Number, rho: Union[float, np.ndarray],
                  cut: float = DEFAULT_SERIES_CUT) -> Union[complex, np.ndarray]:
    """(1/ρ)^ν J_ν(2πρ), with the ascending series below ``cut``."""
    nu = complex(nu)
    scalar = np.ndim(rho) == 0
    r = np.atleast_1d(np.asarray(rho, dtype=float))
    out = np.empty(r.shape, dtype=complex)
    small = r < cut
    if small.any():
        x = (math.pi * r[small]) ** 2
        series = np.zeros(x.shape, dtype=complex)
        for k in reversed(range(_SERIES_TERMS)):
            series = series * x + (-1) ** k * rgamma(nu + k + 1) / math.factorial(k)
        out[small] = cmath.exp(nu * math.log(math.pi)) * series
    big = ~small
    if big.any():
        rb = r[big]
        out[big] = np.exp(-nu * np.log(rb)) * bessel_j(nu, 2.0 * math.pi * rb)
    return complex(out[0]) if scalar else out


def omega_hat(kind: Union[str, RadialKernelKind], alpha: Union[Number, ComplexParam],
              rho: Union[float, np.ndarray], n: int = 2):
    """Ω̂(ρ) = (1/ρ)^ν J_ν(2πρ) with ν from ``kernel_order``."""
    if np.any(np.asarray(rho) < 0):
        raise DomainError("requires ρ >= 0")
    return radial_bessel(kernel_order(kind, alpha, n), rho)


def omega_hat_integral(alpha: Union[Number, ComplexParam], rho: float) -> complex:
    """π^{α-1} Γ(α)^{-1} ∫_{-1}^{1} e^{2πiρs}(1-s²)^{α-1} ds, the integral form of standard Ω̂."""
    a = as_param("α", alpha).value
    if a.real <= 0:
        raise DomainError("requires Re α > 0 for the integral form")

    def integrand(s, d):
        # (1-s²) = d(2-d) with d the distance to -1; integrand is even in s
        return 2.0 * np.cos(2.0 * math.pi * rho * (d - 1.0)) * np.exp((a - 1.0) * np.log(d * (2.0 - d)))

    value = tanh_sinh(integrand, -1.0, 0.0, rtol=1e-13)
    return cmath.exp((a - 1.0) * math.log(math.pi)) * rgamma(a) * value


def omega_kernel(delta: Union[Number, ComplexParam], radius: Union[float, np.ndarray], n: int = 2):
    """Ω^δ(u) = (1/|u|)^{n/2+δ} J_{n/2+δ}(2π|u|)."""
    if np.any(np.asarray(radius) < 0):
        raise DomainError("requires radius >= 0")
    d = as_param("δ", delta).value
    return radial_bessel(n / 2.0 + d, radius)


def omega_weight(r: Union[float, np.ndarray]) -> Union[complex, np.ndarray]:
    """ω(r) = e^{2πir} ∫₀¹ e^{-2πiτr} τ dτ = -1/(2πir) - (e^{2πir} - 1)/(4π²r²)."""
    scalar = np.ndim(r) == 0
    x = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty(x.shape, dtype=complex)
    small = np.abs(x) < DEFAULT_SERIES_CUT
    c = 2j * math.pi * x[small]
    out[small] = 0.5 + c / 6.0 + c ** 2 / 24.0 + c ** 3 / 120.0
    xb = x[~small]
    out[~small] = -1.0 / (2j * math.pi * xb) - np.expm1(2j * math.pi * xb) / (4.0 * math.pi ** 2 * xb ** 2)
    return complex(out[0]) if scalar else out


def two_sided_weight(r: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """e^{-2πir}ω(r) + e^{2πir}ω(-r) = 2∫₀¹ cos(2πτr) τ dτ (real, even)."""
    scalar = np.ndim(r) == 0
    x = np.atleast_1d(np.asarray(r, dtype=float))
    a = 2.0 * math.pi * np.abs(x)
    out = np.empty(x.shape, dtype=float)
    small = a < 2.0 * math.pi * DEFAULT_SERIES_CUT
    s = a[small] ** 2
    out[small] = 1.0 - s / 4.0 + s * s / 72.0
    ab = a[~small]
    out[~small] = 2.0 * (np.sin(ab) / ab + (np.cos(ab) - 1.0) / ab ** 2)
    return float(out[0]) if scalar else out


# =============================================================================
# Cutoffs
# =============================================================================


def _psi(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x, dtype=float)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def cutoff_phi(t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Smooth plateau: 1 on |t| ≤ 1, 0 on |t| ≥ 2."""
    scalar = np.ndim(t) == 0
    a = np.abs(np.atleast_1d(np.asarray(t, dtype=float)))
    up = _psi(2.0 - a)
    down = _psi(a - 1.0)
    out = up / (up + down)
    return float(out[0]) if scalar else out


def cutoff_phi_hat(xi_norm: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """φ̂(ξ) = ϕ(2|ξ|/3) - ϕ(3|ξ|); equals 1 on 2/3 < |ξ| < 3/2, supported in 1/3 < |ξ| ≤ 3."""
    rho = np.asarray(xi_norm, dtype=float)
    if np.any(rho < 0):
        raise DomainError("requires |ξ| >= 0")
    out = cutoff_phi(2.0 * rho / 3.0) - cutoff_phi(3.0 * rho)
    return float(out) if np.ndim(out) == 0 else out


# =============================================================================
# Cone multiplier
# =============================================================================

NORMALIZATIONS = ("closed_form", "integral")


def lambda_prefactor(alpha: Union[Number, ComplexParam], n: int = 2,
                     normalization: str = "closed_form") -> complex:
    a = as_param("α", alpha).value
    if normalization == "closed_form":
        power = (n - 1) / 2.0 - 2.0 * a
    elif normalization == "integral":
        power = -1.0 - a
    else:
        raise ValueError(f"Unknown normalization: {normalization}")
    return cmath.exp(power * math.log(math.pi)) * gamma_complex(a)


def lambda_hat(alpha: Union[Number, ComplexParam], xi_norm: float, tau: float, n: int = 2,
               normalization: str = "closed_form") -> complex:
    """Λ̂^α(ξ, τ) = C {(τ²-|ξ|²)_-^{-α} - sin π(α-1/2) (τ²-|ξ|²)_+^{-α}}.

    ``closed_form`` uses C = π^{(n-1)/2-2α}Γ(α); ``integral`` uses
    C = π^{-1-α}Γ(α), the constant the r-integral representation produces.
    """
    alpha = as_param("α", alpha)
    require_re_range(alpha, 0.0, 1.0, "0 < Re α < 1")
    if abs(tau) == abs(xi_norm):
        raise SingularSetError(f"Λ̂ is singular on |τ| = |ξ| (got τ={tau!r}, |ξ|={xi_norm!r})")
    a = alpha.value
    base = tau * tau - xi_norm * xi_norm
    power = cmath.exp(-a * math.log(abs(base)))
    bracket = power if base < 0 else -cmath.sin(math.pi * (a - 0.5)) * power
    return lambda_prefactor(alpha, n, normalization) * bracket


@lru_cache(maxsize=16)
def cesaro_weight(depth: int, grid_points: int = 4000):
    """Taper w(s) = P(S_1⋯S_depth ≥ s), S_i ~ U[1/2, 1], as a callable on s = r/R.

    This is the weight of ``depth`` nested averages of the truncated integral
    over R' ∈ [R/2, R].
    """
    if depth <= 0:
        return lambda s: (np.asarray(s) <= 1.0).astype(float)
    step = math.log(2.0) / grid_points
    y = (np.arange(grid_points) + 0.5) * step
    density = 2.0 * np.exp(-y) * step
    mass = density
    for _ in range(depth - 1):
        mass = np.convolve(mass, density)
    cdf = np.concatenate(([0.0], np.cumsum(mass)))
    edges = np.arange(cdf.size) * step
    cdf /= cdf[-1]

    def weight(s):
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape)
        inside = (s > 0) & (s <= 1.0)
        out[inside] = np.interp(-np.log(s[inside]), edges, cdf, right=1.0)
        out[s <= 0] = 1.0
        return out

    return weight


def lambda_hat_via_integral(alpha: Union[Number, ComplexParam], xi_norm: float, tau: float,
                            r_max: float = 2.0 ** 14, averaging: int = DEFAULT_CESARO_DEPTH,
                            return_tail: bool = False):
    """∫_{-R}^{R} e^{-2πiτr} Ω̂^α(r|ξ|) |r|^{2α-1} dr with nested Cesàro averaging.

    The tail estimate compares the averaged value at R with the one at R/2.
    """
    alpha = as_param("α", alpha)
    require_re_range(alpha, 0.0, 1.0, "0 < Re α < 1")
    if not (1.0 / 3.0 < xi_norm <= 3.0):
        raise DomainError(f"requires 1/3 < |ξ| ≤ 3 (got {xi_norm!r})")
    if abs(tau) == abs(xi_norm):
        raise SingularSetError(f"Λ̂ is singular on |τ| = |ξ| (got τ={tau!r}, |ξ|={xi_norm!r})")
    if r_max <= 2.0:
        raise DomainError("requires r_max > 2")
    a = alpha.value
    nu = a - 0.5
    weight = cesaro_weight(averaging)

    def even_part(r):
        return 2.0 * np.cos(2.0 * math.pi * tau * r) * radial_bessel(nu, r * xi_norm) \
            * np.exp((2.0 * a - 1.0) * np.log(r))

    head = tanh_sinh(lambda x, d: even_part(d), 0.0, 1.0, rtol=1e-12)

    frequency = max(1.0, abs(tau) + xi_norm)
    panels = math.ceil((r_max - 1.0) * 4.0 * frequency)
    nodes, weights = panel_rule(1.0, r_max, panels)
    full = 0j
    half = 0j
    for start in range(0, nodes.size, _LAMBDA_CHUNK):
        r = nodes[start:start + _LAMBDA_CHUNK]
        f = even_part(r) * weights[start:start + _LAMBDA_CHUNK]
        full += np.sum(f * weight(r / r_max))
        half += np.sum(f * weight(2.0 * r / r_max))
    value = head + full
    tail = 2.0 * abs(full - half) + 1e-8 * abs(value)
    logger.debug("Λ̂ integral α=%s |ξ|=%g τ=%g R=%g tail=%.3e", a, xi_norm, tau, r_max, tail)
    if return_tail:
        return value, tail
    return value
