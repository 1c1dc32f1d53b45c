import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from brlab.core import QuadratureConfig
from brlab.errors import ConstructionError, DomainError
from brlab.services.sphere import cap_grid, cap_weight
from brlab.services.decomp import (LOW, DyadicScale, PieceVariant, ab_coefficients,
                                   check_partition_gaps,
                                   key_observation_check, lambda_partition, m_alpha,
                                   m_plus_quadrature, make_variant, nonvanishing_factor,
                                   p_hat_capped, p_hat_octave, p_hat_piece, p_hat_radial,
                                   p_hat_radial_table, subtraction_identity_check)

IDENTITY_TOLERANCE = 1e-8


# =============================================================================
# Partition
# =============================================================================


@seed(3)
@settings(max_examples=40, deadline=None)
@given(j=st.integers(2, 14), sigma=st.floats(0.05, 0.45))
def test_partition_gaps(j, sigma):
    scale = lambda_partition(j, sigma)
    assert scale.lambdas[0] == 2.0 ** (j - 1)
    assert scale.lambdas[-1] == 2.0 ** j
    assert scale.M == math.floor(2.0 ** ((1.0 - sigma) * j))
    gaps = scale.gaps()
    assert gaps.min() >= 2.0 ** (sigma * j - 1) * (1 - 1e-12)
    assert gaps.max() < 2.0 ** (sigma * j)


def test_partition_domain():
    with pytest.raises(DomainError):
        lambda_partition(0, 0.1)
    with pytest.raises(DomainError, match="σ"):
        lambda_partition(4, 0.5)
    with pytest.raises(DomainError, match="1 ≤ m"):
        lambda_partition(4, 0.1).interval(0)


def test_gap_certificate_failure_is_construction_error():
    with pytest.raises(ConstructionError, match="partition gaps"):
        check_partition_gaps([8.0, 9.0, 16.0], 4, 0.1)
    check_partition_gaps(lambda_partition(4, 0.1).lambdas, 4, 0.1)


def test_scale_round_trip():
    scale = lambda_partition(5, 0.2)
    assert DyadicScale.from_dict(scale.to_dict()) == scale


# =============================================================================
# Variants
# =============================================================================


def test_variant_constraints():
    with pytest.raises(DomainError, match="1/2 < Re α < 1"):
        PieceVariant.standard(0.5)
    with pytest.raises(DomainError, match="Re β"):
        PieceVariant.sharp(0.9, 0.3)
    with pytest.raises(DomainError, match="Re α ≥"):
        PieceVariant.sharp(0.7, 0.6)
    with pytest.raises(DomainError, match="0 < Re β < 1/2"):
        PieceVariant.flat(0.5, 0.5)
    with pytest.raises(ValueError, match="Unknown variant"):
        make_variant("round", 0.7)


def test_sharp_boundary_alpha_is_accepted():
    variant = PieceVariant.sharp(0.8, 0.6)
    assert variant.order == pytest.approx(-0.2)
    assert variant.exponent == pytest.approx(0.2)


def test_ab_coefficients_relations():
    ab = ab_coefficients(0.8, 2)
    n = 2
    assert ab.a1 + (n - 1) * ab.a2 == pytest.approx(n * 0.8)
    assert ab.b1 + (n - 1) * ab.b2 == pytest.approx(n * 0.8)
    assert ab.a2 == pytest.approx(2 * n / (2 * n - 1) * ab.b2)
    assert ab.a1 > 0 and 0 < ab.b1 < 0.5
    assert (2 * n - 1) / (4 * n) < ab.b2 < (2 * n - 1) / (2 * n - 2)
    assert ab.b1 == pytest.approx(0.45, abs=1e-3)


@pytest.mark.parametrize("n", [2, 3])
def test_ab_coefficients_approach_sharp_limit(n):
    family = [ab_coefficients(a, n) for a in (0.9, 0.95, 0.99, 0.999)]
    b2 = [ab.b2 for ab in family]
    a1 = [ab.a1 for ab in family]
    assert all(x < y for x, y in zip(b2, b2[1:]))
    assert all(x > y > 0 for x, y in zip(a1, a1[1:]))
    assert b2[-1] == pytest.approx((2 * n - 1) / (2 * n - 2), abs=1e-2)
    assert a1[-1] < 1e-2
    assert family[-1].b1 == pytest.approx(0.5, abs=1e-3)


def test_ab_coefficients_domain():
    with pytest.raises(DomainError):
        ab_coefficients(0.4)
    with pytest.raises(DomainError):
        ab_coefficients(0.8, n=1)


def test_analytic_family_endpoints():
    alpha = 0.8
    ab = ab_coefficients(alpha)
    sharp_end = PieceVariant.analytic(alpha, 0.0)
    assert sharp_end.order == pytest.approx(ab.a2 - 1.0)
    assert sharp_end.beta.re == pytest.approx(ab.b2)
    flat_end = PieceVariant.analytic(alpha, 1.0)
    assert flat_end.order == pytest.approx(ab.a1 - 0.5 + 0.5)
    assert flat_end.beta.re == pytest.approx(ab.b1)
    assert PieceVariant.analytic(alpha, 0.5).prefactor == pytest.approx(1.0)
    with pytest.raises(DomainError, match="Re z"):
        PieceVariant.analytic(alpha, 1.5)


# =============================================================================
# Multiplier identities
# =============================================================================


@pytest.mark.parametrize("delta", [0.1, 0.3, 0.49])
@pytest.mark.parametrize("xi", [0.0, 0.3, 0.7, 0.99])
def test_key_observation(delta, xi):
    _, _, residual = key_observation_check(delta, xi)
    assert residual <= IDENTITY_TOLERANCE


def test_key_observation_outside_ball():
    assert key_observation_check(0.3, 1.2) == (0.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        key_observation_check(1.0, 0.5)


@pytest.mark.parametrize("rho", np.linspace(0.35, 0.98, 8))
def test_m_plus_closed_form(rho):
    closed = complex(m_alpha("plus", 0.7, np.array([rho])))
    assert abs(closed - m_plus_quadrature(0.7, float(rho))) <= IDENTITY_TOLERANCE


def test_m_alpha_parts():
    xi = np.array([[0.8, 0.0], [0.0, 1.5]])
    plus = m_alpha("plus", 0.6, xi)
    assert plus[1] == 0
    minus = m_alpha("minus", 0.6, xi)
    assert abs(minus[0] - 0.5 / 0.4 * 0.64 ** 0.4) < 1e-14
    with pytest.raises(ValueError, match="Unknown multiplier part"):
        m_alpha("half", 0.6, xi)
    with pytest.raises(DomainError, match="pole"):
        m_alpha("plus", 1.0, xi)


def test_m_alpha_scalar_input():
    assert isinstance(m_alpha("combined", 0.7, 0.5), complex)


def test_nonvanishing_factor_is_cos_squared():
    re = np.linspace(0.05, 0.95, 50)
    im = np.linspace(-2.0, 2.0, 50)
    alpha = re[:, None] + 1j * im[None, :]
    factor = nonvanishing_factor(alpha)
    assert np.allclose(factor, np.cos(0.5 * np.pi * alpha) ** 2, rtol=1e-12, atol=1e-12)
    assert np.abs(factor).min() >= 1e-6


@pytest.mark.parametrize("alpha", [0.55, 0.7, 0.9, 0.7 + 0.3j])
def test_subtraction_identity(alpha):
    rho = np.linspace(0.34, 2.9, 60)
    rho = rho[np.abs(rho - 1.0) > 1e-9]
    _, rhs, residual = subtraction_identity_check(alpha, rho[:, None])
    assert residual <= 1e-12 * max(1.0, float(np.abs(rhs).max()))


# =============================================================================
# Pieces
# =============================================================================


@pytest.fixture(scope="module")
def sharp_variant():
    return PieceVariant.sharp(0.8, 0.6)


@pytest.fixture(scope="module")
def scale4():
    return lambda_partition(4, 0.1)


def test_piece_vanishes_off_ring(sharp_variant, scale4):
    values = p_hat_radial(sharp_variant, scale4, 1, [0.0, 0.2, 3.2])
    assert np.all(values == 0)


def test_cells_sum_to_octave(sharp_variant, scale4):
    rho = np.array([0.5, 0.9, 1.0, 1.4, 2.2])
    total = sum(p_hat_radial(sharp_variant, scale4, m, rho) for m in range(1, scale4.M + 1))
    octave = p_hat_radial(sharp_variant, scale4, None, rho)
    assert np.allclose(total, octave, rtol=1e-8, atol=1e-10 * np.abs(octave).max())


def test_piece_on_vectors_is_radial(sharp_variant, scale4):
    xi = np.array([[0.6, 0.8], [-0.8, 0.6], [0.0, 1.0]])
    values = p_hat_piece(sharp_variant, scale4, 2, xi)
    assert values.shape == (3,)
    assert np.allclose(values, values[0], rtol=1e-12)
    assert np.allclose(p_hat_octave(sharp_variant, scale4, xi),
                       p_hat_radial(sharp_variant, scale4, None, [1.0]))


def test_capped_piece_uses_weight(sharp_variant, scale4):
    xi = np.array([[1.0, 0.0], [0.0, 1.0]])
    values = p_hat_capped(sharp_variant, scale4, 1, lambda x: (x[..., 0] > 0.5).astype(float), xi)
    assert values[1] == 0 and values[0] != 0


def test_capped_pieces_sum_to_piece(sharp_variant, scale4):
    caps = cap_grid(4, 2)
    rng = np.random.default_rng(5)
    angle = rng.uniform(0.0, 2.0 * np.pi, 20)
    radius = rng.uniform(0.35, 2.95, 20)
    xi = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1)
    total = sum(p_hat_capped(sharp_variant, scale4, 1, cap_weight(caps, k), xi)
                for k in range(caps.size))
    piece = p_hat_piece(sharp_variant, scale4, 1, xi)
    assert np.allclose(total, piece, rtol=1e-12, atol=1e-14 * np.abs(piece).max())


@pytest.mark.parametrize("n,alpha", [(2, 0.75), (3, 0.7 + 0.2j)])
def test_analytic_piece_at_one_over_n_is_standard(n, alpha):
    scale = lambda_partition(4, 0.1)
    rho = np.array([0.45, 0.9, 1.0, 1.3, 2.6])
    analytic = p_hat_radial(PieceVariant.analytic(alpha, 1.0 / n, n), scale, 1, rho)
    standard = p_hat_radial(PieceVariant.standard(alpha, n), scale, 1, rho)
    assert np.allclose(analytic, standard, rtol=1e-10, atol=1e-12 * np.abs(standard).max())


def test_piece_is_stable_under_quadrature_refinement(sharp_variant):
    scale = lambda_partition(8, 0.1)
    rho = np.array([0.6, 0.99, 1.0, 1.02, 2.4])
    coarse = p_hat_radial(sharp_variant, scale, 1, rho)
    fine = p_hat_radial(sharp_variant, scale, 1, rho, QuadratureConfig(panels_per_unit=32))
    assert np.allclose(fine, coarse, rtol=1e-9, atol=1e-12 * np.abs(fine).max())
    table = p_hat_radial_table(sharp_variant, scale, 1, quadrature=QuadratureConfig(gauss_order=10))
    assert table.values.shape == table.rho.shape


def test_low_piece_is_finite():
    variant = PieceVariant.standard(0.75)
    values = p_hat_radial(variant, LOW, None, np.linspace(0.4, 2.8, 7))
    assert np.all(np.isfinite(values)) and np.abs(values).max() > 0
    with pytest.raises(ValueError, match="Unknown scale"):
        p_hat_radial(variant, "high", None, [1.0])


def test_radial_table_interpolates(sharp_variant, scale4):
    table = p_hat_radial_table(sharp_variant, scale4, 1, spacing=2.0 ** -9)
    rho = np.array([0.41, 0.77, 1.003, 1.61, 2.47])
    direct = p_hat_radial(sharp_variant, scale4, 1, rho)
    assert np.allclose(table(rho), direct, atol=1e-4 * np.abs(direct).max())
    assert table(np.array([0.1, 3.5])).tolist() == [0j, 0j]
