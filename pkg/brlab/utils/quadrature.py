"""Quadrature rules: panel Gauss–Legendre, tanh–sinh, oscillatory r-integrals"""
import math
from functools import lru_cache
from typing import Callable, Tuple, Union

import numpy as np

from brlab.core import DEFAULT_GAUSS_ORDER, DEFAULT_PANELS_PER_UNIT
from brlab.errors import DomainError, NumericalError
from brlab.logging_config import get_logger

logger = get_logger(__name__)


@lru_cache(maxsize=32)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Reference nodes and weights on [-1, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def panel_rule(a: float, b: float, panels: int,
               order: int = DEFAULT_GAUSS_ORDER) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss–Legendre rule with ``panels`` equal panels on [a, b]."""
    panels = max(int(panels), 1)
    x, w = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def tanh_sinh_rule(a: float, b: float, h: float,
                   t_max: float = 4.0) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tanh–sinh nodes on [a, b].

    Returns (nodes, distance to a, weights). The distance to the left endpoint is
    computed without cancellation so integrands singular at ``a`` can use it.
    """
    k = np.arange(-math.floor(t_max / h), math.floor(t_max / h) + 1)
    t = k * h
    u = 0.5 * np.pi * np.sinh(t)
    u = np.clip(u, -350.0, 350.0)
    # x = (1 + tanh u)/2, accurate near the left endpoint
    x = 1.0 / (1.0 + np.exp(-2.0 * u))
    dist = x
    w = 0.25 * np.pi * h * np.cosh(t) / np.cosh(u) ** 2
    keep = (dist > 0.0) & (w > 0.0)
    length = b - a
    return a + length * x[keep], length * dist[keep], length * w[keep]


def tanh_sinh(f: Callable[[np.ndarray, np.ndarray], np.ndarray], a: float, b: float,
              rtol: float = 1e-12, max_levels: int = 8):
    """Adaptive tanh–sinh integration by step halving.

    ``f(x, d)`` receives nodes and their distance to ``a``; its last axis runs
    over the nodes, so vector-valued integrands are integrated componentwise.
    """
    h = 0.5
    previous = None
    for level in range(max_levels):
        x, d, w = tanh_sinh_rule(a, b, h)
        vals = f(x, d)
        _require_finite(vals, x)
        value = vals @ w
        floor = 1e-3 * (np.abs(vals) @ w) + 1e-300
        if previous is not None and np.all(np.abs(value - previous) <= rtol * np.maximum(np.abs(value), floor)):
            logger.debug("tanh-sinh converged at level %d (h=%g)", level, h)
            return value
        previous = value
        h *= 0.5
    logger.debug("tanh-sinh stopped at h=%g without meeting rtol=%g", h, rtol)
    return previous


def oscillatory_r_integral(integrand: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                           panels_per_period: int = DEFAULT_PANELS_PER_UNIT,
                           max_frequency: float = 1.0,
                           order: int = DEFAULT_GAUSS_ORDER,
                           return_error: bool = False
                           ) -> Union[np.ndarray, Tuple[np.ndarray, np.ndarray]]:
    """Integrate an oscillatory integrand over [a, b] with panel Gauss–Legendre.

    ``integrand(r)`` takes the 1-D node array and returns values whose last axis
    runs over the nodes, so many integrals (e.g. one per |ξ|) share one call.
    Panel width is at most 1/(panels_per_period * max_frequency). With
    ``return_error`` the rule is repeated with doubled panels and the absolute
    difference is returned as the error estimate.
    """
    if not a < b:
        raise DomainError(f"requires a < b (got a={a!r}, b={b!r})")
    panels = math.ceil((b - a) * panels_per_period * max(max_frequency, 1e-12))
    value = _panel_integral(integrand, a, b, panels, order)
    if not return_error:
        return value
    refined = _panel_integral(integrand, a, b, 2 * panels, order)
    return refined, np.abs(refined - value)


def _panel_integral(integrand, a, b, panels, order):
    nodes, weights = panel_rule(a, b, panels, order)
    vals = np.asarray(integrand(nodes))
    _require_finite(vals, nodes)
    return vals @ weights


def _require_finite(vals: np.ndarray, nodes: np.ndarray) -> None:
    finite = np.isfinite(vals)
    if finite.all():
        return
    bad = np.nonzero(~finite.reshape(-1, nodes.shape[0]).all(axis=0))[0]
    r = float(nodes[bad[0]]) if bad.size else float("nan")
    raise NumericalError(f"non-finite integrand sample at r={r!r}")
