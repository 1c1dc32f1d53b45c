import math

import numpy as np
import pytest

from brlab.errors import DomainError, NumericalError
from brlab.utils.quadrature import (gauss_legendre, oscillatory_r_integral, panel_rule,
                                    tanh_sinh, tanh_sinh_rule)


def test_gauss_legendre_is_cached_and_read_only():
    x, w = gauss_legendre(8)
    assert gauss_legendre(8)[0] is x
    assert w.sum() == pytest.approx(2.0)
    with pytest.raises(ValueError):
        x[0] = 0.0


def test_panel_rule_is_exact_for_polynomials():
    nodes, weights = panel_rule(0.0, 2.0, 3, order=8)
    assert nodes.shape == (24,)
    assert (nodes ** 7) @ weights == pytest.approx(32.0, rel=1e-14)


def test_tanh_sinh_rule_distances():
    x, d, w = tanh_sinh_rule(1.0, 3.0, 0.25)
    assert np.all(d > 0)
    assert np.allclose(x, 1.0 + d)
    assert w.sum() == pytest.approx(2.0, rel=1e-10)


@pytest.mark.parametrize("power,exact", [(-0.5, 2.0), (0.3, 1.0 / 1.3)])
def test_tanh_sinh_endpoint_singularity(power, exact):
    value = tanh_sinh(lambda x, d: d ** power, 0.0, 1.0)
    assert value == pytest.approx(exact, rel=1e-9)


def test_tanh_sinh_vector_integrand():
    value = tanh_sinh(lambda x, d: np.stack([x, x ** 2]), 0.0, 1.0)
    assert np.allclose(value, [0.5, 1.0 / 3.0], rtol=1e-12)


def test_oscillatory_integral_many_frequencies():
    freqs = np.array([1.0, 2.5])

    def integrand(r):
        return np.cos(2 * math.pi * freqs[:, None] * r[None, :])

    value, error = oscillatory_r_integral(integrand, 0.0, 10.25, max_frequency=2.5,
                                          return_error=True)
    exact = np.sin(2 * math.pi * freqs * 10.25) / (2 * math.pi * freqs)
    assert np.allclose(value, exact, atol=1e-12)
    assert np.all(error <= 1e-12)


def test_oscillatory_integral_errors():
    with pytest.raises(DomainError, match="a < b"):
        oscillatory_r_integral(np.cos, 1.0, 1.0)
    with pytest.raises(NumericalError, match="non-finite"):
        oscillatory_r_integral(lambda r: np.where(r > 0.5, np.nan, r), 0.0, 1.0)
