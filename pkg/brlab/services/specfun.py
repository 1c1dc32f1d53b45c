"""
Special functions: complex Gamma and complex-order Bessel J.

J_ν(ρ) for real ρ ≥ 0 and complex ν = a + ib is evaluated by
  - the Poisson integral (ρ/2)^ν / (√π Γ(ν+1/2)) ∫_{-1}^{1} e^{iρs}(1-s²)^{ν-1/2} ds
    for Re ν > -1/2 and ρ below the switchover, with s = sin θ and tanh–sinh in θ;
  - the Hankel asymptotic series for ρ at or above the switchover;
  - downward recurrence J_{μ-1} = (2μ/ρ)J_μ - J_{μ+1} for Re ν ≤ -1/2.
"""
import cmath
import math
from dataclasses import dataclass, field
from typing import List, Tuple, Union

import numpy as np

from brlab.core import (DEFAULT_ASYMPTOTIC_TERMS, DEFAULT_SWITCHOVER_RHO, Number)
from brlab.errors import DomainError
from brlab.logging_config import get_logger

logger = get_logger(__name__)

# =============================================================================
# Configuration Constants
# =============================================================================

LANCZOS_G = 7
LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_PI2_OVER_4 = math.log(math.pi ** 2 / 4.0)
_LOG2 = math.log(2.0)

BESSEL_RTOL = 1e-13
BESSEL_MAX_LEVELS = 12
BESSEL_CHUNK = 1024
T_MAX_CAP = 8.5

ArrayLike = Union[float, np.ndarray]

# =============================================================================
# Core Data Structures
# =============================================================================


@dataclass(frozen=True)
class ComplexOrder:
    """Bessel order a + ib."""
    re: float
    im: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise DomainError(f"order must be finite, got {self.re}+{self.im}i")

    @classmethod
    def of(cls, value: Union[Number, "ComplexOrder"]) -> "ComplexOrder":
        if isinstance(value, ComplexOrder):
            return value
        value = complex(value)
        return cls(value.real, value.imag)

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def shifted(self, k: float) -> "ComplexOrder":
        return ComplexOrder(self.re + k, self.im)


@dataclass
class AsymptoticCoefficients:
    """a_k = (-1)^k [ν,2k] 2^{-2k}, b_k = (-1)^{k+1} [ν,2k-1] 2^{-2k+1}, k = 1..N."""
    order: ComplexOrder
    terms: List[Tuple[complex, complex]] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.terms)


# =============================================================================
# Gamma
# =============================================================================


def _is_pole(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def log_gamma_complex(z: Number) -> complex:
    """log Γ(z) (some branch; exp of it is Γ(z))."""
    z = complex(z)
    if _is_pole(z):
        raise DomainError(f"Gamma has a pole at z = {z.real:g}")
    if z.real < 0.5:
        return math.log(math.pi) - cmath.log(cmath.sin(math.pi * z)) - log_gamma_complex(1.0 - z)
    z -= 1.0
    series = LANCZOS_COEFFICIENTS[0]
    for k in range(1, len(LANCZOS_COEFFICIENTS)):
        series += LANCZOS_COEFFICIENTS[k] / (z + k)
    t = z + LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(series)


def gamma_complex(z: Number) -> complex:
    """Γ(z) for complex z; raises DomainError at the poles 0, -1, -2, ..."""
    return cmath.exp(log_gamma_complex(z))


def rgamma(z: Number) -> complex:
    """1/Γ(z), zero at the poles."""
    z = complex(z)
    if _is_pole(z):
        return 0j
    return cmath.exp(-log_gamma_complex(z))


# =============================================================================
# Bessel: integral branch
# =============================================================================


def _poisson_prefactor(nu: complex, rho: np.ndarray) -> np.ndarray:
    return np.exp(nu * np.log(rho / 2.0) - log_gamma_complex(nu + 0.5)) / math.sqrt(math.pi)


def _theta_terms(t: np.ndarray, two_nu: complex) -> Tuple[np.ndarray, np.ndarray]:
    """Weights cos^{2ν}θ · dθ/dt and sin θ at tanh–sinh abscissae t."""
    au = 0.5 * math.pi * np.sinh(np.abs(t))
    tail = np.log1p(np.exp(-2.0 * au))
    log_c = _LOG2 - 2.0 * au - tail           # c = 1 - |tanh u|
    delta = 0.5 * math.pi * np.exp(log_c)     # θ = ±(π/2 - δ)
    log_cos = np.log(0.5 * math.pi) + log_c + np.log(np.sinc(delta / math.pi))
    log_jac = _LOG_PI2_OVER_4 + np.log(np.cosh(t)) + 2.0 * (_LOG2 - au - tail)
    weight = np.exp(two_nu * log_cos + log_jac)
    sin_theta = np.sign(t) * np.cos(delta)
    return weight, sin_theta


def _t_max(a: float) -> float:
    return min(math.asinh(80.0 / (math.pi * max(2.0 * a + 1.0, 1e-3))), T_MAX_CAP)


def _poisson_integral(nu: complex, rho: np.ndarray, rtol: float) -> np.ndarray:
    """∫_{-π/2}^{π/2} cos^{2ν}θ e^{iρ sin θ} dθ by tanh–sinh with step halving."""
    t_max = _t_max(nu.real)
    two_nu = 2.0 * nu
    h = 0.25
    k = np.arange(-math.ceil(t_max / h), math.ceil(t_max / h) + 1)
    w, s = _theta_terms(k * h, two_nu)
    terms = w[:, None] * np.exp(1j * np.outer(s, rho))
    total = terms.sum(axis=0)
    scale = np.abs(terms).sum(axis=0)
    value = h * total
    for level in range(BESSEL_MAX_LEVELS):
        h *= 0.5
        k = np.arange(-math.ceil(t_max / h), math.ceil(t_max / h) + 1)
        k = k[k % 2 != 0]
        w, s = _theta_terms(k * h, two_nu)
        terms = w[:, None] * np.exp(1j * np.outer(s, rho))
        total = total + terms.sum(axis=0)
        scale = scale + np.abs(terms).sum(axis=0)
        new_value = h * total
        change = np.abs(new_value - value)
        value = new_value
        if np.all(change <= rtol * (np.abs(value) + h * scale)):
            logger.debug("Bessel integral converged at h=%g for %d radii", h, rho.size)
            return value
    logger.warning("Bessel integral for order %s hit the refinement limit", nu)
    return value


def bessel_j_integral(order: Union[Number, ComplexOrder], rho: ArrayLike,
                      rtol: float = BESSEL_RTOL) -> Union[complex, np.ndarray]:
    """J_ν(ρ) from the Poisson integral; requires Re ν > -1/2 and ρ > 0."""
    order = ComplexOrder.of(order)
    if order.re <= -0.5:
        raise DomainError(f"requires Re ν > -1/2 for the integral form (got {order.re!r})")
    scalar = np.ndim(rho) == 0
    r = np.atleast_1d(np.asarray(rho, dtype=float))
    if np.any(r <= 0):
        raise DomainError("requires ρ > 0 for the integral form")
    nu = order.value
    out = np.empty(r.shape, dtype=complex)
    flat_r = r.ravel()
    flat_out = out.reshape(-1)
    for start in range(0, flat_r.size, BESSEL_CHUNK):
        chunk = flat_r[start:start + BESSEL_CHUNK]
        flat_out[start:start + chunk.size] = (_poisson_prefactor(nu, chunk)
                                              * _poisson_integral(nu, chunk, rtol))
    return complex(out[0]) if scalar else out


# =============================================================================
# Bessel: asymptotic branch
# =============================================================================


def bracket(nu: Number, m: int) -> complex:
    """[ν, m] = Π_{k=1}^{m} (4ν² - (2k-1)²) / (m! 4^m), with [ν, 0] = 1."""
    nu = complex(nu)
    value = 1.0 + 0j
    for k in range(1, m + 1):
        value *= (4.0 * nu * nu - (2 * k - 1) ** 2) / (4.0 * k)
    return value


def asymptotic_coefficients(order: Union[Number, ComplexOrder], n_terms: int) -> AsymptoticCoefficients:
    order = ComplexOrder.of(order)
    nu = order.value
    terms = []
    for k in range(1, n_terms + 1):
        a_k = (-1) ** k * bracket(nu, 2 * k) * 2.0 ** (-2 * k)
        b_k = (-1) ** (k + 1) * bracket(nu, 2 * k - 1) * 2.0 ** (-2 * k + 1)
        terms.append((a_k, b_k))
    return AsymptoticCoefficients(order=order, terms=terms)


def bessel_j_asymptotic(order: Union[Number, ComplexOrder], rho: ArrayLike,
                        n_terms: int = DEFAULT_ASYMPTOTIC_TERMS):
    """Hankel expansion with ``n_terms`` correction pairs.

    Returns (value, error_bound); the bound is the first omitted pair times
    2 cosh(|Im ω|) √(2/(πρ)).
    """
    if n_terms < 0:
        raise DomainError("requires n_terms >= 0")
    order = ComplexOrder.of(order)
    nu = order.value
    scalar = np.ndim(rho) == 0
    r = np.atleast_1d(np.asarray(rho, dtype=float))
    if np.any(r <= 0):
        raise DomainError("requires ρ > 0 for the asymptotic form")
    coeffs = asymptotic_coefficients(order, n_terms + 1)
    omega = r - nu * math.pi / 2.0 - math.pi / 4.0
    inv2 = 1.0 / (r * r)
    p = np.zeros_like(r, dtype=complex)
    q = np.zeros_like(r, dtype=complex)
    # Horner in 1/ρ²
    for a_k, b_k in reversed(coeffs.terms[:n_terms]):
        p = (p + a_k) * inv2
        q = q * inv2 + b_k
    p = 1.0 + p
    q = q / r if n_terms else q
    amp = np.sqrt(2.0 / (math.pi * r))
    value = amp * (np.cos(omega) * p - np.sin(omega) * q)
    a_next, b_next = coeffs.terms[n_terms]
    bound = 2.0 * amp * np.cosh(abs(nu.imag) * math.pi / 2.0) * (
        abs(a_next) * r ** (-2 * n_terms - 2) + abs(b_next) * r ** (-2 * n_terms - 1))
    if scalar:
        return complex(value[0]), float(bound[0])
    return value, bound


# =============================================================================
# Bessel: dispatch
# =============================================================================


def _value_at_zero(order: ComplexOrder) -> complex:
    if order.re == 0.0 and order.im == 0.0:
        return 1.0 + 0j
    if order.re > 0.0:
        return 0j
    raise DomainError(f"J_ν(0) diverges for Re ν < 0 or purely imaginary ν (got ν = {order.value})")


def _bessel_positive(order: ComplexOrder, r: np.ndarray, switchover: float) -> np.ndarray:
    out = np.empty(r.shape, dtype=complex)
    near = r < switchover
    if near.any():
        out[near] = bessel_j_integral(order, r[near])
    if (~near).any():
        out[~near] = bessel_j_asymptotic(order, r[~near])[0]
    return out


def bessel_j(order: Union[Number, ComplexOrder], rho: ArrayLike,
             switchover: float = DEFAULT_SWITCHOVER_RHO) -> Union[complex, np.ndarray]:
    """J_ν(ρ) for complex ν and real ρ ≥ 0 (scalar or array)."""
    order = ComplexOrder.of(order)
    scalar = np.ndim(rho) == 0
    r = np.atleast_1d(np.asarray(rho, dtype=float))
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise DomainError("requires finite ρ >= 0")
    out = np.empty(r.shape, dtype=complex)
    zero = r == 0
    if zero.any():
        out[zero] = _value_at_zero(order)
    pos = ~zero
    if pos.any():
        rp = r[pos]
        if order.re > -0.5:
            out[pos] = _bessel_positive(order, rp, switchover)
        else:
            out[pos] = _bessel_recurrence(order, rp, switchover)
    return complex(out[0]) if scalar else out


def _bessel_recurrence(order: ComplexOrder, r: np.ndarray, switchover: float) -> np.ndarray:
    """Downward recurrence from an order with Re > -1/2."""
    out = np.empty(r.shape, dtype=complex)
    far = r >= switchover
    if far.any():
        out[far] = bessel_j_asymptotic(order, r[far])[0]
    near = ~far
    if near.any():
        rn = r[near]
        k = math.floor(-0.5 - order.re) + 1
        top = order.shifted(k)
        j_mu = bessel_j_integral(top, rn)
        j_up = bessel_j_integral(top.shifted(1), rn)
        mu = top.value
        for _ in range(k):
            j_mu, j_up = (2.0 * mu / rn) * j_mu - j_up, j_mu
            mu -= 1.0
        out[near] = j_mu
    return out


def bessel_norm_constant(order: Union[Number, ComplexOrder], rho: np.ndarray) -> float:
    """Smallest B with |ρ^{-ν} J_ν(ρ)| ≤ B (1+ρ)^{-1/2-a} on the sample radii."""
    order = ComplexOrder.of(order)
    r = np.asarray(rho, dtype=float)
    r = r[r > 0]
    values = np.abs(np.exp(-order.value * np.log(r)) * bessel_j(order, r))
    return float(np.max(values * (1.0 + r) ** (0.5 + order.re)))
