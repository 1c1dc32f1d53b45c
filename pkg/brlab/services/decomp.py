"""
Frequency-side decomposition of the Bochner–Riesz multiplier.

Pieces have the form

    P̂(ξ) = c · φ̂(ξ) ∫_{λ_{m-1} ≤ |r| < λ_m} e^{-2πir} Ω̂(rξ) ω(r) |r|^{2β-1} dr

with the variant fixing the Bessel order of Ω̂, the exponent β and the prefactor c.
Both signs of r are combined into the real weight e^{-2πir}ω(r) + e^{2πir}ω(-r),
so every integral runs over r > 0 only.
"""
import cmath
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from brlab.core import ComplexParam, Number, QuadratureConfig, as_param, require_re_range
from brlab.errors import ConstructionError, DomainError, InfeasibleError
from brlab.logging_config import get_logger
from brlab.services.kernels import (cutoff_phi_hat, kernel_order, radial_bessel,
                                    two_sided_weight)
from brlab.utils.quadrature import oscillatory_r_integral, tanh_sinh

logger = get_logger(__name__)

LOW = "low"
AB_SCAN_POINTS = 10001
_TOL = 1e-12

# =============================================================================
# Core Data Structures
# =============================================================================


@dataclass
class DyadicScale:
    """Radial partition 2^{j-1} = λ_0 < … < λ_M = 2^j with gaps in [2^{σj-1}, 2^{σj})."""
    j: int
    sigma: float
    lambdas: List[float] = field(default_factory=list)

    @property
    def M(self) -> int:
        return len(self.lambdas) - 1

    def interval(self, m: int):
        if not 1 <= m <= self.M:
            raise DomainError(f"requires 1 ≤ m ≤ {self.M} (got m={m})")
        return self.lambdas[m - 1], self.lambdas[m]

    def gaps(self) -> np.ndarray:
        return np.diff(self.lambdas)

    def to_dict(self) -> Dict[str, Any]:
        return {"j": self.j, "sigma": self.sigma, "lambdas": list(self.lambdas)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DyadicScale":
        return cls(j=int(data["j"]), sigma=float(data["sigma"]),
                   lambdas=[float(x) for x in data["lambdas"]])


@dataclass
class ABCoefficients:
    """Exponent pairs interpolating Re α between the sharp (z=0) and flat (z=1) ends."""
    a1: float
    a2: float
    b1: float
    b2: float
    re_alpha: float
    n: int = 2

    def to_dict(self) -> Dict[str, Any]:
        return {"a1": self.a1, "a2": self.a2, "b1": self.b1, "b2": self.b2,
                "re_alpha": self.re_alpha, "n": self.n}


@dataclass(frozen=True)
class PieceVariant:
    """Ω̂ order, r-exponent and prefactor of one family of multiplier pieces."""
    tag: str
    alpha: ComplexParam
    beta: ComplexParam
    n: int = 2
    z: Optional[complex] = None
    ab: Optional[ABCoefficients] = None

    @classmethod
    def standard(cls, alpha: Union[Number, ComplexParam], n: int = 2) -> "PieceVariant":
        alpha = as_param("α", alpha)
        require_re_range(alpha, 0.5, 1.0, "1/2 < Re α < 1")
        return cls("standard", alpha, ComplexParam.of("β", alpha.value), n)

    @classmethod
    def sharp(cls, alpha: Union[Number, ComplexParam], beta: Union[Number, ComplexParam],
              n: int = 2) -> "PieceVariant":
        alpha, beta = as_param("α", alpha), as_param("β", beta)
        lo, hi = (2 * n - 1) / (4 * n), (2 * n - 1) / (2 * n - 2)
        require_re_range(beta, lo, hi, f"(2n-1)/(4n) < Re β < (2n-1)/(2n-2) = {lo:g} < Re β < {hi:g}")
        ratio = 2 * n / (2 * n - 1)
        if alpha.re < ratio * beta.re - _TOL:
            raise DomainError(f"requires Re α ≥ (2n/(2n-1)) Re β = {ratio * beta.re:.12g} "
                              f"(got Re α = {alpha.re!r})")
        return cls("sharp", alpha, beta, n)

    @classmethod
    def flat(cls, alpha: Union[Number, ComplexParam], beta: Union[Number, ComplexParam],
             n: int = 2) -> "PieceVariant":
        alpha, beta = as_param("α", alpha), as_param("β", beta)
        require_re_range(alpha, 0.0, None, "Re α > 0")
        require_re_range(beta, 0.0, 0.5, "0 < Re β < 1/2")
        return cls("flat", alpha, beta, n)

    @classmethod
    def analytic(cls, alpha: Union[Number, ComplexParam], z: Number, n: int = 2,
                 ab: Optional[ABCoefficients] = None) -> "PieceVariant":
        alpha = as_param("α", alpha)
        require_re_range(alpha, 0.5, 1.0, "1/2 < Re α < 1")
        z = complex(z)
        if not 0.0 <= z.real <= 1.0:
            raise DomainError(f"requires 0 ≤ Re z ≤ 1 (got Re z = {z.real!r})")
        if ab is None:
            ab = ab_coefficients(alpha.re, n)
        beta = ComplexParam.of("β", (ab.b1 * z + ab.b2 * (1 - z)) + 1j * alpha.im)
        return cls("analytic", alpha, beta, n, z=z, ab=ab)

    @property
    def order(self) -> complex:
        if self.tag == "analytic":
            z, ab = self.z, self.ab
            return (ab.a1 * z + ab.a2 * (1 - z) - 0.5 + 0.5 * (self.n - 1) * z
                    - 0.5 * (1 - z) + 1j * self.alpha.im)
        return kernel_order(self.tag, self.alpha, self.n)

    @property
    def exponent(self) -> complex:
        return 2.0 * self.beta.value - 1.0

    @property
    def prefactor(self) -> complex:
        if self.tag == "analytic":
            return cmath.exp((self.z - 1.0 / self.n) ** 2)
        return 1.0 + 0j

    def params(self) -> Dict[str, Any]:
        out = {"variant": self.tag, "n": self.n, "alpha": self.alpha.to_dict(),
               "beta": self.beta.to_dict()}
        if self.z is not None:
            out["z"] = {"re": self.z.real, "im": self.z.imag}
            out["ab"] = self.ab.to_dict()
        return out


def make_variant(tag: str, alpha: Number, beta: Optional[Number] = None, n: int = 2,
                 z: Optional[Number] = None) -> PieceVariant:
    """Build a PieceVariant from a tag"""
    if tag == "standard":
        return PieceVariant.standard(alpha, n)
    if tag == "sharp":
        return PieceVariant.sharp(alpha, beta, n)
    if tag == "flat":
        return PieceVariant.flat(alpha, beta, n)
    if tag == "analytic":
        return PieceVariant.analytic(alpha, 1.0 / n if z is None else z, n)
    raise ValueError(f"Unknown variant: {tag}")


# =============================================================================
# Partition and coefficients
# =============================================================================


def lambda_partition(j: int, sigma: float) -> DyadicScale:
    """Equal-gap partition of [2^{j-1}, 2^j] into M = ⌊2^{(1-σ)j}⌋ intervals."""
    if j < 1:
        raise DomainError(f"requires j ≥ 1 (got {j})")
    if not 0.0 < sigma < 0.5:
        raise DomainError(f"requires 0 < σ < 1/2 (got {sigma!r})")
    count = int(math.floor(2.0 ** ((1.0 - sigma) * j)))
    start = 2.0 ** (j - 1)
    gap = start / count
    lambdas = [start + k * gap for k in range(count)] + [2.0 ** j]
    check_partition_gaps(lambdas, j, sigma)
    return DyadicScale(j=j, sigma=sigma, lambdas=lambdas)


def check_partition_gaps(lambdas: Sequence[float], j: int, sigma: float) -> None:
    """Gap certificate 2^{σj-1} ≤ λ_m - λ_{m-1} < 2^{σj}."""
    gaps = np.diff(lambdas)
    lo, hi = 2.0 ** (sigma * j - 1), 2.0 ** (sigma * j)
    if gaps.min() < lo * (1 - 1e-12) or gaps.max() >= hi:
        raise ConstructionError(f"partition gaps {gaps.min():g}..{gaps.max():g} outside [{lo:g}, {hi:g})")


def ab_coefficients(re_alpha: float, n: int = 2) -> ABCoefficients:
    """Midpoint of the feasible b1 interval found by scanning (0, 1/2)."""
    if not 0.5 < re_alpha < 1.0:
        raise DomainError(f"requires 1/2 < Re α < 1 (got {re_alpha!r})")
    if n < 2:
        raise DomainError(f"requires n ≥ 2 (got {n})")
    b1 = np.linspace(0.0, 0.5, AB_SCAN_POINTS + 2)[1:-1]
    b2 = (n * re_alpha - b1) / (n - 1)
    a2 = (2 * n / (2 * n - 1)) * b2
    a1 = n * re_alpha - (n - 1) * a2
    checks = {
        "a1 > 0": a1 > 0,
        "b2 > (2n-1)/(4n)": b2 > (2 * n - 1) / (4 * n),
        "b2 < (2n-1)/(2n-2)": b2 < (2 * n - 1) / (2 * n - 2),
    }
    feasible = np.logical_and.reduce(list(checks.values()))
    if not feasible.any():
        for name, ok in checks.items():
            if not ok.any():
                raise InfeasibleError(f"no b1 in (0, 1/2) satisfies {name}")
        raise InfeasibleError("constraints on a1, b2 are jointly infeasible")
    chosen = 0.5 * (b1[feasible].min() + b1[feasible].max())
    b2c = (n * re_alpha - chosen) / (n - 1)
    a2c = (2 * n / (2 * n - 1)) * b2c
    a1c = n * re_alpha - (n - 1) * a2c
    return ABCoefficients(a1=float(a1c), a2=float(a2c), b1=float(chosen), b2=float(b2c),
                          re_alpha=float(re_alpha), n=n)


# =============================================================================
# Pieces
# =============================================================================


def _norms(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 0:
        return np.abs(xi)
    return np.linalg.norm(xi, axis=-1)


def _r_integral(variant: PieceVariant, a: float, b: float, rho: np.ndarray,
                quadrature: QuadratureConfig) -> np.ndarray:
    nu = variant.order
    e = variant.exponent
    panels_per_unit, order = quadrature.panels_per_unit, quadrature.gauss_order
    out = np.empty(rho.shape, dtype=complex)
    rows = max(1, quadrature.max_cells // max(1, int(math.ceil((b - a) * panels_per_unit)) * order))
    for start in range(0, rho.size, rows):
        block = rho[start:start + rows]

        def integrand(r, block=block):
            return (two_sided_weight(r) * np.exp(e * np.log(r)))[None, :] \
                * radial_bessel(nu, block[:, None] * r[None, :])

        out[start:start + rows] = oscillatory_r_integral(
            integrand, a, b, panels_per_period=panels_per_unit, order=order)
    return out


def _low_integral(variant: PieceVariant, rho: np.ndarray,
                  quadrature: QuadratureConfig) -> np.ndarray:
    nu = variant.order
    e = variant.exponent

    def integrand(x, d):
        return (two_sided_weight(d) * np.exp(e * np.log(d)))[None, :] \
            * radial_bessel(nu, rho[:, None] * d[None, :])

    return tanh_sinh(integrand, 0.0, 1.0, rtol=quadrature.tanh_sinh_rtol)


def p_hat_radial(variant: PieceVariant, scale: Union[DyadicScale, str], m: Optional[int],
                 rho, quadrature: Optional[QuadratureConfig] = None) -> np.ndarray:
    """Radial profile of a piece at |ξ| = rho.

    ``scale == "low"`` gives the piece over |r| ≤ 1; ``m is None`` gives the whole
    octave 2^{j-1} ≤ |r| < 2^j.
    """
    quadrature = quadrature or QuadratureConfig()
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    out = np.zeros(rho.shape, dtype=complex)
    cut = cutoff_phi_hat(rho)
    live = cut != 0
    if not live.any():
        return out
    r_live = rho[live]
    if isinstance(scale, str):
        if scale != LOW:
            raise ValueError(f"Unknown scale: {scale}")
        integral = _low_integral(variant, r_live, quadrature)
    else:
        a, b = (scale.lambdas[0], scale.lambdas[-1]) if m is None else scale.interval(m)
        integral = _r_integral(variant, a, b, r_live, quadrature)
    out[live] = variant.prefactor * cut[live] * integral
    return out


def p_hat_piece(variant: PieceVariant, scale: Union[DyadicScale, str], m: Optional[int], xi,
                **kwargs) -> Union[complex, np.ndarray]:
    """P̂ piece at frequency vectors ``xi`` (last axis = coordinates)."""
    norms = _norms(xi)
    values = p_hat_radial(variant, scale, m, np.ravel(norms), **kwargs).reshape(np.shape(norms))
    return complex(values) if values.ndim == 0 else values


def p_hat_octave(variant: PieceVariant, scale: DyadicScale, xi, **kwargs):
    """Whole-octave piece P̂_j = Σ_m P̂_{j m}."""
    return p_hat_piece(variant, scale, None, xi, **kwargs)


def p_hat_capped(variant: PieceVariant, scale: Union[DyadicScale, str], m: Optional[int],
                 cap_weight: Callable[[np.ndarray], np.ndarray], xi, **kwargs):
    """Piece localized to one cap: φ^ν_j(ξ) · P̂(ξ)."""
    xi = np.asarray(xi, dtype=float)
    weight = np.asarray(cap_weight(xi), dtype=float)
    return weight * p_hat_piece(variant, scale, m, xi, **kwargs)


@dataclass
class RadialTable:
    """Cubic-spline table of a piece's r-integral over the φ̂ ring."""
    variant: PieceVariant
    rho: np.ndarray
    values: np.ndarray
    _re: CubicSpline = field(init=False, repr=False)
    _im: CubicSpline = field(init=False, repr=False)

    def __post_init__(self):
        self._re = CubicSpline(self.rho, self.values.real)
        self._im = CubicSpline(self.rho, self.values.imag)

    def __call__(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        out = np.zeros(rho.shape, dtype=complex)
        cut = cutoff_phi_hat(rho)
        inside = (cut != 0) & (rho >= self.rho[0]) & (rho <= self.rho[-1])
        r = rho[inside]
        out[inside] = self.variant.prefactor * cut[inside] * (self._re(r) + 1j * self._im(r))
        return out


def p_hat_radial_table(variant: PieceVariant, scale: Union[DyadicScale, str], m: Optional[int],
                       rho_max: float = 3.0, spacing: Optional[float] = None,
                       quadrature: Optional[QuadratureConfig] = None) -> RadialTable:
    """Tabulate the r-integral on [1/3, min(3, rho_max)] for fast grid filling."""
    quadrature = quadrature or QuadratureConfig()
    hi = min(3.0, rho_max)
    if spacing is None:
        j = 0 if isinstance(scale, str) else scale.j
        spacing = 2.0 ** (-j - 7)
    count = max(16, int(math.ceil((hi - 1.0 / 3.0) / spacing)) + 1)
    rho = np.linspace(1.0 / 3.0, hi, count)
    if isinstance(scale, str):
        integral = _low_integral(variant, rho, quadrature)
    else:
        a, b = (scale.lambdas[0], scale.lambdas[-1]) if m is None else scale.interval(m)
        integral = _r_integral(variant, a, b, rho, quadrature)
    logger.debug("radial table %s m=%s: %d radii", variant.tag, m, count)
    return RadialTable(variant=variant, rho=rho, values=integral)


# =============================================================================
# Multiplier identities
# =============================================================================


def _pos_power(base: np.ndarray, power: complex) -> np.ndarray:
    """base^power on base > 0, zero elsewhere."""
    out = np.zeros(base.shape, dtype=complex)
    pos = base > 0
    out[pos] = np.exp(power * np.log(base[pos]))
    return out


def m_alpha(which: str, alpha: Union[Number, ComplexParam], xi) -> Union[complex, np.ndarray]:
    """m^α_+, m^α_- or m^α at frequency vectors ``xi``.

    Minus parts follow (x)_-^λ = |x|^λ on x < 0, which absorbs (-1)^{-α}.
    """
    alpha = as_param("α", alpha)
    if alpha.value == 1.0:
        raise DomainError("m^α has a pole at α = 1")
    require_re_range(alpha, 0.0, 1.0, "0 < Re α < 1")
    rho = np.atleast_1d(_norms(xi)).astype(float)
    a = alpha.value
    cut = cutoff_phi_hat(rho)
    inner = 1.0 - rho ** 2
    if which == "plus":
        value = 0.5 / (1.0 - a) * cut * _pos_power(inner, 1.0 - a)
    elif which == "minus":
        value = 0.5 / (1.0 - a) * cut * (_pos_power(rho ** 2, 1.0 - a) - _pos_power(-inner, 1.0 - a))
    elif which == "combined":
        value = cut * (-_pos_power(-inner, 1.0 - a)
                       - cmath.sin(math.pi * (a - 0.5)) * _pos_power(inner, 1.0 - a))
    else:
        raise ValueError(f"Unknown multiplier part: {which}")
    return complex(value[0]) if np.ndim(_norms(xi)) == 0 else value


def m_plus_quadrature(alpha: float, xi_norm: float) -> float:
    """φ̂(ξ) ∫_{|ξ|}^{1} (τ²-|ξ|²)^{-α} τ dτ by algebraic-weight quadrature (real α)."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"requires 0 < α < 1 (got {alpha!r})")
    if xi_norm >= 1.0:
        return 0.0
    cut = cutoff_phi_hat(xi_norm)
    if cut == 0.0:
        return 0.0
    if xi_norm == 0.0:
        value, _ = integrate.quad(lambda t: 1.0, 0.0, 1.0, weight="alg", wvar=(1.0 - 2.0 * alpha, 0.0),
                                  epsabs=1e-14, epsrel=1e-13)
    else:
        value, _ = integrate.quad(lambda t: (t + xi_norm) ** (-alpha) * t, xi_norm, 1.0,
                                  weight="alg", wvar=(-alpha, 0.0), epsabs=1e-14, epsrel=1e-13)
    return cut * value


def key_observation_check(delta: float, xi_norm: float):
    """(1-|ξ|²)_+^δ against 2δ∫₀¹ (τ²-|ξ|²)_+^{δ-1} τ dτ; returns (lhs, rhs, residual)."""
    if not 0.0 < delta < 1.0:
        raise DomainError(f"requires 0 < δ < 1 (got {delta!r})")
    if xi_norm < 0:
        raise DomainError("requires |ξ| ≥ 0")
    lhs = (1.0 - xi_norm ** 2) ** delta if xi_norm < 1.0 else 0.0
    if xi_norm >= 1.0:
        rhs = 0.0
    elif xi_norm == 0.0:
        integral, _ = integrate.quad(lambda t: 1.0, 0.0, 1.0, weight="alg",
                                     wvar=(2.0 * delta - 1.0, 0.0), epsabs=1e-14, epsrel=1e-13)
        rhs = 2.0 * delta * integral
    else:
        integral, _ = integrate.quad(lambda t: (t + xi_norm) ** (delta - 1.0) * t, xi_norm, 1.0,
                                     weight="alg", wvar=(delta - 1.0, 0.0),
                                     epsabs=1e-14, epsrel=1e-13)
        rhs = 2.0 * delta * integral
    return lhs, rhs, abs(lhs - rhs)


def nonvanishing_factor(alpha: Union[Number, np.ndarray]):
    """sin²(πα/2) - sin π(α - 1/2)."""
    a = np.asarray(alpha, dtype=complex)
    value = np.sin(0.5 * np.pi * a) ** 2 - np.sin(np.pi * (a - 0.5))
    return complex(value) if value.ndim == 0 else value


def subtraction_identity_check(alpha: Union[Number, ComplexParam], xi):
    """(m^{(1+α)/2})² + φ̂ m^α against φ̂² [sin²(πα/2) - sin π(α-1/2)] (1-|ξ|²)_+^{1-α}.

    Returns (lhs, rhs, max residual).
    """
    alpha = as_param("α", alpha)
    require_re_range(alpha, 0.0, 1.0, "0 < Re α < 1")
    a = alpha.value
    rho = np.atleast_1d(_norms(xi)).astype(float)
    cut = cutoff_phi_hat(rho)
    half = m_alpha("combined", (1.0 + a) / 2.0, rho[:, None])
    lhs = half ** 2 + cut * m_alpha("combined", a, rho[:, None])
    rhs = cut ** 2 * nonvanishing_factor(a) * _pos_power(1.0 - rho ** 2, 1.0 - a)
    return lhs, rhs, float(np.max(np.abs(lhs - rhs)))
