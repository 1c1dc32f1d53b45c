"""
brlab - Core Types and Interfaces

Bochner–Riesz computational toolkit: shared constants, parameter types,
configuration dataclasses and the radial-multiplier interface.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, Optional, Union

import numpy as np

from brlab.errors import ConfigError, DomainError

# =============================================================================
# Configuration Constants
# =============================================================================

DEFAULT_SIGMA = 0.1
DEFAULT_SEPARATION_C = 8.0
DEFAULT_SWITCHOVER_RHO = 30.0
DEFAULT_ASYMPTOTIC_TERMS = 10
DEFAULT_PANELS_PER_UNIT = 16
DEFAULT_GAUSS_ORDER = 8
DEFAULT_CESARO_DEPTH = 8
DEFAULT_SERIES_CUT = 1e-4
DEFAULT_SHARP_ALPHA = 0.8
DEFAULT_SHARP_BETA = 0.6
DEFAULT_FLAT_ALPHA = 0.5
DEFAULT_FLAT_BETA = 0.3
DEFAULT_SLOPE_MARGIN = 0.25
DEFAULT_MIN_R2 = 0.9
DEFAULT_SEED = 20240601
DEFAULT_MAX_SIDE = 4096
DEFAULT_MIN_SIDE = 256
DEFAULT_NYQUIST_TARGET = 3.0

Number = Union[int, float, complex]

# =============================================================================
# Core Data Structures
# =============================================================================


@dataclass(frozen=True)
class ComplexParam:
    """A complex analytic parameter (δ, α, β or z) with a display name."""
    name: str
    value: complex

    @classmethod
    def of(cls, name: str, value: Number) -> "ComplexParam":
        value = complex(value)
        if not (np.isfinite(value.real) and np.isfinite(value.imag)):
            raise DomainError(f"{name} must be finite, got {value}")
        return cls(name=name, value=value)

    @property
    def re(self) -> float:
        return self.value.real

    @property
    def im(self) -> float:
        return self.value.imag

    def is_real(self) -> bool:
        return self.value.imag == 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "re": self.re, "im": self.im}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ComplexParam":
        return cls.of(data["name"], complex(data.get("re", 0.0), data.get("im", 0.0)))


def as_param(name: str, value: Union[Number, ComplexParam]) -> ComplexParam:
    if isinstance(value, ComplexParam):
        return value
    return ComplexParam.of(name, value)


def require_re_range(param: ComplexParam, lo: Optional[float], hi: Optional[float],
                     text: str, lo_closed: bool = False,
                     hi_closed: bool = False) -> None:
    """Raise DomainError(``requires <text>``) unless lo (<|≤) Re p (<|≤) hi."""
    re = param.re
    ok = True
    if lo is not None:
        ok &= re >= lo if lo_closed else re > lo
    if hi is not None:
        ok &= re <= hi if hi_closed else re < hi
    if not ok:
        raise DomainError(f"requires {text} (got Re {param.name} = {re!r})")


@dataclass
class QuadratureConfig:
    """Settings of the piece r-integrals: Gauss–Legendre panels and the tanh–sinh low piece."""
    panels_per_unit: int = DEFAULT_PANELS_PER_UNIT
    gauss_order: int = DEFAULT_GAUSS_ORDER
    tanh_sinh_rtol: float = 1e-12
    max_cells: int = 2_000_000

    def __post_init__(self):
        if self.panels_per_unit < 1 or self.gauss_order < 1:
            raise ConfigError("quadrature needs panels_per_unit ≥ 1 and gauss_order ≥ 1")
        if not 0.0 < self.tanh_sinh_rtol < 1.0:
            raise ConfigError(f"tanh_sinh_rtol must lie in (0, 1) (got {self.tanh_sinh_rtol})")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class GridConfig:
    """Physical grid policy for kernel materialization."""
    side: Optional[int] = None
    extent: Optional[float] = None
    min_side: int = DEFAULT_MIN_SIDE
    max_side: int = DEFAULT_MAX_SIDE
    nyquist_target: float = DEFAULT_NYQUIST_TARGET

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class ExperimentConfig:
    """Shared parameters of the verification experiments."""
    n: int = 2
    sigma: float = DEFAULT_SIGMA
    c: float = DEFAULT_SEPARATION_C
    m: int = 1
    ell: int = 1
    seed: int = DEFAULT_SEED
    margin: float = DEFAULT_SLOPE_MARGIN
    min_r2: float = DEFAULT_MIN_R2
    samples: int = 10_000
    threads: int = 0
    grid: GridConfig = field(default_factory=GridConfig)
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


# =============================================================================
# Interfaces
# =============================================================================


class IRadialMultiplier(ABC):
    """A Fourier multiplier depending only on |ξ|."""

    @property
    @abstractmethod
    def name(self) -> str:
        pass

    @abstractmethod
    def radial(self, rho: np.ndarray) -> np.ndarray:
        """Evaluate on an array of radii |ξ| >= 0."""
        pass

    def params(self) -> Dict[str, Any]:
        return {}

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        """Evaluate on frequency vectors, last axis = coordinates."""
        xi = np.asarray(xi, dtype=float)
        return self.radial(np.linalg.norm(xi, axis=-1))
