import math

import numpy as np
import pytest
from scipy import integrate, special

from brlab.core import QuadratureConfig
from brlab.errors import ConfigError, DomainError
from brlab.models.fields import GridSpec, SampledFunction
from brlab.services.decomp import PieceVariant, lambda_partition, make_variant
from brlab.services.engine import (BochnerRieszMultiplier, IAlphaMultiplier, apply_multiplier,
                                   bochner_riesz_apply, bochner_riesz_kernel,
                                   bochner_riesz_kernel_apply, create_multiplier,
                                   fourier_sup, gaussian_field, i_alpha_apply, kernel_from_multiplier,
                                   kernel_grid, materialize_kernels, multiplier_field,
                                   piece_kernel, required_extent, sample_multiplier)
from brlab.services.sphere import cap_grid, select_subsets

SIGMA = 0.1
SEPARATION_C = 8.0
ROUTE_TOLERANCE = 1e-3


@pytest.fixture(scope="module")
def grid():
    return GridSpec(n=2, side=256, extent=32.0)


@pytest.fixture(scope="module")
def gaussian(grid):
    return gaussian_field(grid)


def _plane_wave(grid, xi0):
    x = grid.points()
    return SampledFunction(grid, np.exp(2j * math.pi * (x @ np.asarray(xi0))))


def _bochner_riesz_gaussian(radius, delta):
    """S^δ of exp(-π|x|²) at |x| = radius in two dimensions, by radial quadrature."""
    def integrand(rho):
        return math.exp(-math.pi * rho ** 2) * (1 - rho ** 2) ** delta \
            * special.j0(2 * math.pi * radius * rho) * rho
    value, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-14, epsrel=1e-12, limit=200)
    return 2 * math.pi * value


# =============================================================================
# Multipliers
# =============================================================================


def test_bochner_riesz_multiplier_values():
    ball = BochnerRieszMultiplier(0.0)
    assert ball.radial(np.array([0.5, 1.0, 2.0])).tolist() == [1.0, 0.0, 0.0]
    half = BochnerRieszMultiplier(0.5)
    assert half(np.array([[0.6, 0.0]]))[0] == pytest.approx(0.8)
    with pytest.raises(DomainError, match="Re δ ≥ 0"):
        BochnerRieszMultiplier(-0.5)


def test_multiplier_factory():
    assert create_multiplier("bochner-riesz", delta=1.0).name == "bochner-riesz"
    with pytest.raises(ValueError, match="Unknown multiplier"):
        create_multiplier("cone")


def test_sample_multiplier_shape_check(grid):
    with pytest.raises(ConfigError):
        sample_multiplier(grid, np.ones((4, 4)))
    field = multiplier_field(grid, BochnerRieszMultiplier(1.0))
    assert field.values.shape == grid.shape
    assert field.metadata["multiplier"] == "bochner-riesz"
    assert np.array_equal(sample_multiplier(grid, field), field.values)


# =============================================================================
# Operators
# =============================================================================


def test_identity_and_zero_multipliers(gaussian, grid):
    same = apply_multiplier(gaussian, np.ones(grid.shape), workers=1)
    assert np.max(np.abs(same.values - gaussian.values)) <= 1e-12
    zero = apply_multiplier(gaussian, np.zeros(grid.shape), workers=1)
    assert np.all(zero.values == 0)


def test_linearity(grid, gaussian):
    other = gaussian_field(grid, width=2.0, center=[1.0, -0.5])
    combined = bochner_riesz_apply(0.5, gaussian.scaled(2.0) + other.scaled(-3j), workers=1)
    separate = (bochner_riesz_apply(0.5, gaussian, workers=1).scaled(2.0)
                + bochner_riesz_apply(0.5, other, workers=1).scaled(-3j))
    assert np.allclose(combined.values, separate.values, atol=1e-12)


def test_plane_waves_are_eigenfunctions():
    grid = GridSpec(n=2, side=64, extent=8.0)
    inside = _plane_wave(grid, (0.5, 0.25))
    out = bochner_riesz_apply(0.5, inside, workers=1)
    assert np.allclose(out.values, math.sqrt(1 - 0.3125) * inside.values, atol=1e-12)
    outside = _plane_wave(grid, (1.0, 0.5))
    assert np.max(np.abs(bochner_riesz_apply(0.0, outside, workers=1).values)) <= 1e-12


def test_gaussian_against_radial_quadrature(grid, gaussian):
    out = bochner_riesz_apply(1.0, gaussian, workers=1)
    center = grid.side // 2
    for i, k in [(0, 0), (2, 0), (4, 3), (-6, 2)]:
        radius = math.hypot(i * grid.dx, k * grid.dx)
        ref = _bochner_riesz_gaussian(radius, 1.0)
        assert abs(out.values[center + i, center + k] - ref) <= 1e-3 * 0.7


def test_kernel_value_at_origin():
    grid = GridSpec(n=2, side=16, extent=2.0)
    kernel = bochner_riesz_kernel(1.0, grid)
    assert kernel[8, 8] == pytest.approx(math.pi / 2.0)
    assert np.max(np.abs(kernel.imag)) <= 1e-12


def test_kernel_route_matches_multiplier_route(grid, gaussian):
    via_fft = bochner_riesz_apply(1.0, gaussian, workers=1)
    via_kernel = bochner_riesz_kernel_apply(1.0, gaussian, workers=1)
    diff = np.linalg.norm(via_fft.values - via_kernel.values) / np.linalg.norm(via_kernel.values)
    assert diff <= ROUTE_TOLERANCE


@pytest.mark.slow
def test_extent_doubling_is_stable(grid, gaussian):
    wide = GridSpec(n=2, side=512, extent=64.0)
    narrow = bochner_riesz_apply(1.0, gaussian, workers=1).values
    doubled = bochner_riesz_apply(1.0, gaussian_field(wide), workers=1).values[128:384, 128:384]
    assert np.linalg.norm(narrow - doubled) / np.linalg.norm(narrow) <= ROUTE_TOLERANCE


def test_i_alpha_ignores_low_frequencies():
    grid = GridSpec(n=2, side=256, extent=64.0)
    f = gaussian_field(grid, width=12.0)
    result = i_alpha_apply(0.75, f, j_max=1, workers=1)
    assert result.j_max == 1
    assert np.isfinite(result.tail_estimate) and result.tail_estimate >= 0
    assert np.max(np.abs(result.function.values)) <= 1e-10


def test_i_alpha_domain(gaussian):
    with pytest.raises(DomainError, match="1/2 < Re α < 1"):
        i_alpha_apply(0.4, gaussian, j_max=1)
    with pytest.raises(DomainError, match="j_max"):
        IAlphaMultiplier(0.75, -1)


# =============================================================================
# Kernels
# =============================================================================


def test_fourier_sup_inverts_kernel_from_multiplier(grid):
    m = np.broadcast_to(BochnerRieszMultiplier(0.5).radial(grid.frequency_radii()), grid.shape)
    kernel = SampledFunction(grid, kernel_from_multiplier(grid, m, workers=1))
    assert fourier_sup(kernel, workers=1) == pytest.approx(1.0, rel=1e-12)


def test_kernel_grid_defaults():
    scale = lambda_partition(6, SIGMA)
    g = kernel_grid(scale, 1)
    assert g.extent == 64.0 and g.side == 1024 and g.nyquist == 4.0
    assert kernel_grid(scale, 1, nyquist_target=1.5).side == 512
    assert kernel_grid(scale, 1, n=3).side == 128
    assert required_extent(scale, 1) == pytest.approx(scale.interval(1)[1] + 2.0 ** (0.6 + 2))


def test_octave_kernel_is_real():
    scale = lambda_partition(4, SIGMA)
    kernel = piece_kernel(PieceVariant.sharp(0.8, 0.6), scale, 1, GridSpec(n=2, side=256, extent=16.0),
                          workers=1)
    assert np.max(np.abs(kernel.values.imag)) <= 1e-12 * kernel.sup_norm
    assert kernel.metadata["j"] == 4


@pytest.fixture(scope="module")
def family4():
    return select_subsets(cap_grid(4, 2), SIGMA, SEPARATION_C)


def test_split_reconstructs_piece(family4):
    scale = lambda_partition(4, SIGMA)
    split = materialize_kernels(PieceVariant.sharp(0.8, 0.6), scale, 1, family4, 1, workers=2)
    assert split.residual() <= 1e-12
    assert split.caps == family4.subset(1)
    assert split.P.metadata["part"] == "P"
    assert split.V.sup_norm > 0


@pytest.mark.slow
@pytest.mark.parametrize("tag,alpha,beta", [("flat", 0.5, 0.3), ("analytic", 0.8, None)])
def test_split_reconstructs_other_variants(family4, tag, alpha, beta):
    scale = lambda_partition(4, SIGMA)
    split = materialize_kernels(make_variant(tag, alpha, beta), scale, 1, family4, 2, workers=2)
    assert split.residual() <= 1e-12


def test_split_rejects_small_extent(family4):
    scale = lambda_partition(4, SIGMA)
    small = GridSpec(n=2, side=256, extent=8.0)
    with pytest.raises(ConfigError, match="too small"):
        materialize_kernels(PieceVariant.sharp(0.8, 0.6), scale, 1, family4, 1, grid=small)


def test_split_rejects_mismatched_scale(family4):
    with pytest.raises(ConfigError, match="j="):
        materialize_kernels(PieceVariant.sharp(0.8, 0.6), lambda_partition(5, SIGMA), 1,
                            family4, 1)


@pytest.mark.parametrize("j", [4, 5, 6, 7, 8])
def test_default_kernel_grids_cover_cutoff_support(j):
    grid = kernel_grid(lambda_partition(j, SIGMA), 1)
    assert grid.nyquist == 4.0
    assert grid.side <= 4096


def test_quadrature_config_validation():
    assert QuadratureConfig().to_dict()["panels_per_unit"] == 16
    with pytest.raises(ConfigError, match="panels_per_unit"):
        QuadratureConfig(panels_per_unit=0)
    with pytest.raises(ConfigError, match="tanh_sinh_rtol"):
        QuadratureConfig(tanh_sinh_rtol=0.0)


def test_split_honours_quadrature_settings(family4):
    scale = lambda_partition(4, SIGMA)
    split = materialize_kernels(PieceVariant.sharp(0.8, 0.6), scale, 1, family4, 1, workers=2,
                                quadrature=QuadratureConfig(panels_per_unit=32, gauss_order=10))
    assert split.residual() <= 1e-12
