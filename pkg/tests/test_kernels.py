import math

import numpy as np
import pytest
from scipy import integrate, special

from brlab.errors import DomainError, SingularSetError
from brlab.services.kernels import (cesaro_weight, cutoff_phi, cutoff_phi_hat, kernel_order,
                                    lambda_hat, lambda_prefactor, omega_hat,
                                    omega_hat_integral, omega_kernel, omega_weight,
                                    radial_bessel, two_sided_weight)
from brlab.services.specfun import gamma_complex


def test_kernel_orders():
    assert kernel_order("standard", 0.7) == pytest.approx(0.2)
    assert kernel_order("sharp", 0.7) == pytest.approx(-0.3)
    assert kernel_order("flat", 0.7, n=3) == pytest.approx(1.2)
    with pytest.raises(ValueError):
        kernel_order("round", 0.7)


def test_standard_half_order_is_j0():
    rho = np.linspace(0.0, 6.0, 50)
    assert np.allclose(omega_hat("standard", 0.5, rho), special.j0(2.0 * math.pi * rho),
                       rtol=1e-10, atol=1e-12)


def test_radial_bessel_at_origin():
    nu = 0.4 + 0.3j
    assert abs(radial_bessel(nu, 0.0) - math.pi ** nu / gamma_complex(nu + 1.0)) < 1e-13


def test_radial_bessel_series_joins_bessel_branch():
    nu = 1.2 - 0.5j
    below = radial_bessel(nu, 0.999e-4)
    above = radial_bessel(nu, 1.001e-4)
    assert abs(below - above) < 1e-8 * abs(below)


@pytest.mark.parametrize("alpha", [0.7, 0.6 + 0.4j])
@pytest.mark.parametrize("rho", [0.25, 1.3, 4.0])
def test_integral_form_matches_closed_form(alpha, rho):
    closed = omega_hat("standard", alpha, rho)
    assert abs(omega_hat_integral(alpha, rho) - closed) <= 1e-9 * max(abs(closed), 1e-3)


def test_omega_kernel_negative_radius():
    with pytest.raises(DomainError):
        omega_kernel(0.5, -1.0)


def test_omega_weight_against_quadrature():
    for r in (0.37, -1.6, 5.0):
        re, _ = integrate.quad(lambda t: t * math.cos(2 * math.pi * r * (1 - t)), 0.0, 1.0)
        im, _ = integrate.quad(lambda t: t * math.sin(2 * math.pi * r * (1 - t)), 0.0, 1.0)
        assert abs(omega_weight(r) - complex(re, im)) < 1e-12


def test_omega_weight_small_argument():
    assert abs(omega_weight(0.0) - 0.5) < 1e-15
    assert abs(omega_weight(5e-5) - omega_weight(2e-4)) < 1e-2


def test_two_sided_weight_is_twice_cosine_moment():
    for r in (0.0, 0.2, 3.3):
        ref, _ = integrate.quad(lambda t: 2.0 * t * math.cos(2 * math.pi * r * t), 0.0, 1.0)
        assert two_sided_weight(r) == pytest.approx(ref, abs=1e-12)
    r = 0.8
    combined = (np.exp(-2j * math.pi * r) * omega_weight(r)
                + np.exp(2j * math.pi * r) * omega_weight(-r))
    assert abs(combined - two_sided_weight(r)) < 1e-12


def test_cutoffs():
    assert cutoff_phi(0.5) == 1.0
    assert cutoff_phi(2.5) == 0.0
    assert 0.0 < cutoff_phi(1.5) < 1.0
    assert cutoff_phi_hat(1.0) == 1.0
    assert cutoff_phi_hat(0.2) == 0.0
    assert cutoff_phi_hat(3.5) == 0.0
    values = cutoff_phi_hat(np.linspace(0.0, 4.0, 401))
    assert np.all((values >= 0.0) & (values <= 1.0))


def test_lambda_hat_branches():
    alpha = 0.7
    c = lambda_prefactor(alpha)
    inside = lambda_hat(alpha, 1.0, 0.5)
    assert abs(inside - c * 0.75 ** (-alpha)) < 1e-13
    outside = lambda_hat(alpha, 0.5, 1.0)
    assert abs(outside + c * math.sin(math.pi * (alpha - 0.5)) * 0.75 ** (-alpha)) < 1e-13


def test_lambda_normalizations():
    ratio = lambda_prefactor(0.7, 2, "closed_form") / lambda_prefactor(0.7, 2, "integral")
    assert ratio == pytest.approx(math.pi ** (0.5 - 1.4 + 1.7))
    with pytest.raises(ValueError, match="Unknown normalization"):
        lambda_prefactor(0.7, 2, "other")


def test_lambda_hat_domain():
    with pytest.raises(SingularSetError):
        lambda_hat(0.7, 1.0, -1.0)
    with pytest.raises(DomainError, match="requires 0 < Re α < 1"):
        lambda_hat(1.0, 1.0, 0.5)


def test_cesaro_weight_shape():
    w = cesaro_weight(8)
    s = np.array([1e-3, 0.2, 0.6, 0.9, 1.0, 1.5])
    values = w(s)
    assert values[0] == 1.0
    assert values[-2] == 0.0 and values[-1] == 0.0
    assert np.all(np.diff(values) <= 0)
    assert np.array_equal(cesaro_weight(0)(np.array([0.5, 1.0, 1.2])), [1.0, 1.0, 0.0])
