"""
Grid operators: FFT multiplier application, the kernel-convolution route for
S^δ, the I^α operator, and materialization of the P/U/V kernel split.

Grid convention: x_k = (k - N/2)·dx with dx = 2X/N, frequencies from
``fftfreq(N, dx)``. Kernels are ``fftshift(ifftn(m)) / dx^n``.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np
from scipy import fft

from brlab.core import (DEFAULT_MAX_SIDE, DEFAULT_MIN_SIDE, DEFAULT_NYQUIST_TARGET, DEFAULT_SIGMA,
                        ComplexParam, IRadialMultiplier, Number, QuadratureConfig, as_param,
                        require_re_range)
from brlab.errors import ConfigError, DomainError
from brlab.logging_config import get_logger
from brlab.models.fields import GridSpec, MultiplierField, SampledFunction, SpatialKernel
from brlab.services.decomp import (LOW, DyadicScale, PieceVariant, RadialTable,
                                   lambda_partition, p_hat_radial_table)
from brlab.services.kernels import omega_kernel
from brlab.services.specfun import gamma_complex
from brlab.services.sphere import SubsetFamily, bump_psi, bump_rectangle, cap_weight
from brlab.settings import get_settings

logger = get_logger(__name__)

Multiplier = Union[IRadialMultiplier, MultiplierField, np.ndarray, Callable[[np.ndarray], np.ndarray]]


def _workers(workers: Optional[int]) -> int:
    return workers if workers else get_settings().resolved_threads()


# =============================================================================
# Radial multipliers
# =============================================================================


class BochnerRieszMultiplier(IRadialMultiplier):
    """(1 - |ξ|²)_+^δ; δ = 0 is the ball indicator."""

    def __init__(self, delta: Union[Number, ComplexParam]):
        self.delta = as_param("δ", delta)
        require_re_range(self.delta, 0.0, None, "Re δ ≥ 0", lo_closed=True)

    @property
    def name(self) -> str:
        return "bochner-riesz"

    def params(self) -> Dict[str, Any]:
        return {"delta": self.delta.value}

    def radial(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        out = np.zeros(rho.shape, dtype=complex)
        inside = rho < 1.0
        out[inside] = np.exp(self.delta.value * np.log1p(-rho[inside] ** 2))
        return out


class PieceMultiplier(IRadialMultiplier):
    """A decomposition piece (low, one octave, or one cell) through its radial table."""

    def __init__(self, variant: PieceVariant, scale: Union[DyadicScale, str],
                 m: Optional[int] = None, spacing: Optional[float] = None,
                 quadrature: Optional[QuadratureConfig] = None):
        self.variant = variant
        self.scale = scale
        self.m = m
        self._table = p_hat_radial_table(variant, scale, m, spacing=spacing, quadrature=quadrature)

    @property
    def name(self) -> str:
        return f"piece-{self.variant.tag}"

    @property
    def table(self) -> RadialTable:
        return self._table

    def params(self) -> Dict[str, Any]:
        data = dict(self.variant.params())
        data["scale"] = LOW if isinstance(self.scale, str) else self.scale.to_dict()
        data["m"] = self.m
        return data

    def radial(self, rho: np.ndarray) -> np.ndarray:
        return self._table(rho)

    def sup(self) -> float:
        return float(np.max(np.abs(self._table(self._table.rho)))) if self._table.rho.size else 0.0


class IAlphaMultiplier(IRadialMultiplier):
    """P̂_< + Σ_{0<j≤j_max} P̂_j for the standard variant."""

    def __init__(self, alpha: Union[Number, ComplexParam], j_max: int, n: int = 2,
                 sigma: float = DEFAULT_SIGMA):
        self.alpha = as_param("α", alpha)
        require_re_range(self.alpha, 0.5, 1.0, "1/2 < Re α < 1")
        if j_max < 0:
            raise DomainError(f"requires j_max ≥ 0 (got {j_max})")
        self.j_max = j_max
        self.sigma = sigma
        variant = PieceVariant.standard(self.alpha, n)
        self.pieces: List[PieceMultiplier] = [PieceMultiplier(variant, LOW)]
        for j in range(1, j_max + 1):
            self.pieces.append(PieceMultiplier(variant, lambda_partition(j, sigma)))
        self._next = PieceMultiplier(variant, lambda_partition(j_max + 1, sigma))

    @property
    def name(self) -> str:
        return "i-alpha"

    def params(self) -> Dict[str, Any]:
        return {"alpha": self.alpha.value, "j_max": self.j_max, "sigma": self.sigma}

    def radial(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        total = np.zeros(rho.shape, dtype=complex)
        for piece in self.pieces:
            total += piece.radial(rho)
        return total

    def tail_estimate(self) -> float:
        """Geometric-tail bound for the discarded j > j_max: 2·sup|P̂_{j_max+1}|."""
        return 2.0 * self._next.sup()


def create_multiplier(name: str, **params) -> IRadialMultiplier:
    """Factory for the radial multipliers understood by the CLI."""
    if name == "bochner-riesz":
        return BochnerRieszMultiplier(params["delta"])
    if name == "piece":
        return PieceMultiplier(params["variant"], params["scale"], params.get("m"))
    if name == "i-alpha":
        return IAlphaMultiplier(params["alpha"], params["j_max"], params.get("n", 2),
                                params.get("sigma", DEFAULT_SIGMA))
    raise ValueError(f"Unknown multiplier: {name}")


# =============================================================================
# Grid helpers
# =============================================================================


def kernel_grid(scale: DyadicScale, m: int, n: int = 2, side: Optional[int] = None,
                extent: Optional[float] = None,
                nyquist_target: float = DEFAULT_NYQUIST_TARGET,
                min_side: int = DEFAULT_MIN_SIDE, max_side: int = DEFAULT_MAX_SIDE) -> GridSpec:
    """Default grid for kernels at radius λ_m: X = 2^j, Nyquist ≥ ``nyquist_target``.

    The default target 3 keeps the whole cutoff support |ξ| ≤ 3 inside the
    frequency box, so no piece multiplier is truncated by the grid.
    """
    if extent is None:
        extent = 2.0 ** scale.j
    if side is None:
        side = min_side
        while side / (4.0 * extent) < nyquist_target and side < max_side:
            side *= 2
        if n == 3:
            side = min(side, 128)
    grid = GridSpec(n=n, side=side, extent=float(extent))
    if grid.nyquist < 1.0:
        logger.warning("grid Nyquist %.3g < 1 cuts through the unit sphere", grid.nyquist)
    elif grid.nyquist < 3.0:
        logger.info("grid Nyquist %.3g truncates the cutoff support |ξ| ≤ 3", grid.nyquist)
    return grid


def required_extent(scale: DyadicScale, m: int) -> float:
    lo, hi = scale.interval(m)
    return hi + 2.0 ** (scale.sigma * scale.j + 2.0)


def sample_multiplier(grid: GridSpec, multiplier: Multiplier) -> np.ndarray:
    """Multiplier values on the frequency grid, FFT order."""
    if isinstance(multiplier, MultiplierField):
        if multiplier.grid != grid:
            raise ConfigError("multiplier grid does not match the function grid")
        return multiplier.values
    if isinstance(multiplier, np.ndarray):
        if multiplier.shape != grid.shape:
            raise ConfigError(f"multiplier shape {multiplier.shape} does not match grid {grid.shape}")
        return multiplier
    if isinstance(multiplier, IRadialMultiplier):
        return np.broadcast_to(multiplier.radial(grid.frequency_radii()), grid.shape)
    return np.broadcast_to(np.asarray(multiplier(grid.frequencies())), grid.shape)


def multiplier_field(grid: GridSpec, multiplier: IRadialMultiplier,
                     metadata: Optional[Dict[str, Any]] = None) -> MultiplierField:
    meta = {"multiplier": multiplier.name, "params": multiplier.params()}
    meta.update(metadata or {})
    return MultiplierField(grid=grid, values=np.array(sample_multiplier(grid, multiplier)),
                           metadata=meta)


def gaussian_field(grid: GridSpec, width: float = 1.0,
                   center: Optional[np.ndarray] = None) -> SampledFunction:
    """exp(-π|x - c|²/w²); its transform is w^n exp(-π w²|ξ|²) e^{-2πi c·ξ}."""
    if width <= 0:
        raise ConfigError(f"gaussian width must be positive (got {width})")
    x = grid.points()
    if center is not None:
        x = x - np.asarray(center, dtype=float)
    return SampledFunction(grid, np.exp(-math.pi * np.sum(x * x, axis=-1) / width ** 2))


# =============================================================================
# Operators
# =============================================================================


def apply_multiplier(f: SampledFunction, multiplier: Multiplier,
                     workers: Optional[int] = None) -> SampledFunction:
    """Forward DFT, pointwise multiply on the physical frequency grid, inverse DFT."""
    w = _workers(workers)
    m = sample_multiplier(f.grid, multiplier)
    spectrum = fft.fftn(fft.ifftshift(f.values), workers=w)
    out = fft.fftshift(fft.ifftn(spectrum * m, workers=w))
    return SampledFunction(f.grid, out)


def bochner_riesz_apply(delta: Union[Number, ComplexParam], f: SampledFunction,
                        workers: Optional[int] = None) -> SampledFunction:
    return apply_multiplier(f, BochnerRieszMultiplier(delta), workers)


def bochner_riesz_kernel(delta: Union[Number, ComplexParam], grid: GridSpec) -> np.ndarray:
    """Γ(δ+1) π^{-δ} Ω^δ(x) sampled on ``grid``."""
    d = as_param("δ", delta)
    require_re_range(d, 0.0, None, "Re δ ≥ 0", lo_closed=True)
    scale = gamma_complex(d.value + 1.0) * math.pi ** (-d.value)
    return scale * np.asarray(omega_kernel(d, grid.radii(), grid.n), dtype=complex)


def bochner_riesz_kernel_apply(delta: Union[Number, ComplexParam], f: SampledFunction,
                               workers: Optional[int] = None) -> SampledFunction:
    """S^δ f by linear convolution with the sampled kernel on the doubled window."""
    grid = f.grid
    w = _workers(workers)
    big = GridSpec(n=grid.n, side=2 * grid.side, extent=2.0 * grid.extent)
    kernel = bochner_riesz_kernel(delta, big)
    N = grid.side
    shape = [fft.next_fast_len(3 * N - 1)] * grid.n
    spectrum = fft.fftn(f.values, s=shape, workers=w) * fft.fftn(kernel, s=shape, workers=w)
    full = fft.ifftn(spectrum, workers=w)
    window = tuple(slice(N, 2 * N) for _ in range(grid.n))
    return SampledFunction(grid, full[window] * grid.cell_volume)


@dataclass
class IAlphaResult:
    function: SampledFunction
    tail_estimate: float
    j_max: int


def i_alpha_apply(alpha: Union[Number, ComplexParam], f: SampledFunction, j_max: int,
                  sigma: float = DEFAULT_SIGMA, workers: Optional[int] = None) -> IAlphaResult:
    """I^α truncated after octave j_max, with the tail estimate for the rest."""
    multiplier = IAlphaMultiplier(alpha, j_max, f.grid.n, sigma)
    out = apply_multiplier(f, multiplier, workers)
    tail = multiplier.tail_estimate()
    logger.info("I^α applied through j=%d, tail estimate %.3e", j_max, tail)
    return IAlphaResult(function=out, tail_estimate=tail, j_max=j_max)


# =============================================================================
# Kernels
# =============================================================================


def kernel_from_multiplier(grid: GridSpec, values: np.ndarray,
                           workers: Optional[int] = None) -> np.ndarray:
    return fft.fftshift(fft.ifftn(values, workers=_workers(workers))) / grid.cell_volume


def fourier_sup(kernel: Union[SpatialKernel, SampledFunction],
                workers: Optional[int] = None) -> float:
    """sup |K̂| over the frequency grid."""
    grid = kernel.grid
    spectrum = fft.fftn(fft.ifftshift(kernel.values), workers=_workers(workers))
    return float(np.max(np.abs(spectrum))) * grid.cell_volume


class _CompensatedSum:
    """Kahan accumulator over arrays."""

    def __init__(self, shape):
        self.total = np.zeros(shape, dtype=complex)
        self._carry = np.zeros(shape, dtype=complex)

    def add(self, term: np.ndarray) -> None:
        y = term - self._carry
        t = self.total + y
        self._carry = (t - self.total) - y
        self.total = t


@dataclass
class KernelSplit:
    P: SpatialKernel
    U: SpatialKernel
    V: SpatialKernel
    caps: List[int] = field(default_factory=list)

    def residual(self) -> float:
        """max |U + V - P| / max |P|."""
        scale = self.P.sup_norm or 1.0
        return float(np.max(np.abs(self.U.values + self.V.values - self.P.values))) / scale


def materialize_kernels(variant: PieceVariant, scale: DyadicScale, m: int, family: SubsetFamily,
                        ell: int, grid: Optional[GridSpec] = None,
                        workers: Optional[int] = None,
                        quadrature: Optional[QuadratureConfig] = None) -> KernelSplit:
    """P^ℓ, U and V for cell (j, m) and cap family Z_ℓ.

    U = P^ℓ(1 - Ψ^ℓ) + Σ_μ Ψ^μ Σ_{ν≠μ} P^ν and V = Σ_μ Ψ^μ P^μ, with
    Ψ^ℓ = Σ_μ Ψ^μ. Per-cap work runs on a thread pool; reductions are in cap order.
    """
    caps_grid = family.parent
    if caps_grid.j != scale.j:
        raise ConfigError(f"cap grid is for j={caps_grid.j}, scale for j={scale.j}")
    if grid is None:
        grid = kernel_grid(scale, m, caps_grid.n)
    if grid.n != caps_grid.n:
        raise ConfigError(f"grid dimension {grid.n} does not match caps dimension {caps_grid.n}")
    need = required_extent(scale, m)
    if grid.extent < need:
        raise ConfigError(f"grid extent {grid.extent:g} too small: requires extent ≥ {need:.6g}")

    caps = family.subset(ell)
    w = _workers(workers)
    table = p_hat_radial_table(variant, scale, m, quadrature=quadrature)
    freqs = grid.frequencies()
    radial = table(grid.frequency_radii())
    radial = np.broadcast_to(radial, grid.shape)
    points = grid.points()

    def cap_kernel(index: int) -> np.ndarray:
        weight = cap_weight(caps_grid, index)(freqs)
        return kernel_from_multiplier(grid, weight * radial, workers=1)

    def cap_terms(index: int):
        return cap_kernel(index), bump_psi(bump_rectangle(caps_grid, index, scale, m), points)

    threads = max(1, min(w, len(caps)))
    p_sum = _CompensatedSum(grid.shape)
    v_sum = _CompensatedSum(grid.shape)
    psi_sum = np.zeros(grid.shape)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for kernel, bump in pool.map(cap_terms, caps):
            p_sum.add(kernel)
            v_sum.add(bump * kernel)
            psi_sum += bump
        p_total = p_sum.total
        u_sum = _CompensatedSum(grid.shape)
        u_sum.add(p_total * (1.0 - psi_sum))
        for kernel, bump in pool.map(cap_terms, caps):
            u_sum.add(bump * (p_total - kernel))

    meta = {"variant": variant.tag, "params": variant.params(), "j": scale.j, "m": m,
            "ell": ell, "sigma": scale.sigma, "caps": list(caps)}
    logger.info("materialized j=%d m=%d ℓ=%d over %d caps on side %d", scale.j, m, ell,
                len(caps), grid.side)

    def wrap(values: np.ndarray, part: str) -> SpatialKernel:
        data = dict(meta)
        data["part"] = part
        return SpatialKernel(function=SampledFunction(grid, values), metadata=data)

    return KernelSplit(P=wrap(p_total, "P"), U=wrap(u_sum.total, "U"), V=wrap(v_sum.total, "V"),
                       caps=list(caps))


def piece_kernel(variant: PieceVariant, scale: Union[DyadicScale, str], m: Optional[int],
                 grid: GridSpec, workers: Optional[int] = None) -> SpatialKernel:
    """Spatial kernel of a whole (uncapped) piece."""
    multiplier = PieceMultiplier(variant, scale, m)
    values = kernel_from_multiplier(grid, sample_multiplier(grid, multiplier), workers)
    meta = {"variant": variant.tag, "params": variant.params(), "m": m,
            "j": None if isinstance(scale, str) else scale.j}
    return SpatialKernel(function=SampledFunction(grid, values), metadata=meta)
