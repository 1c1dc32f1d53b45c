"""Sampled fields on regular grids and their file formats"""
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd

from brlab.errors import ConfigError
from brlab.utils.io import atomic_write_bytes, read_json, write_csv, write_json

DTYPE = "<c16"
PathLike = Union[str, Path]


@dataclass(frozen=True)
class GridSpec:
    """Grid [-X, X)^n with N points per axis, origin at index N/2."""
    n: int
    side: int
    extent: float

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ConfigError(f"requires n ∈ {{1, 2, 3}} (got {self.n})")
        if self.side < 2 or self.side & (self.side - 1):
            raise ConfigError(f"grid side must be a power of two (got {self.side})")
        if not self.extent > 0:
            raise ConfigError(f"grid extent must be positive (got {self.extent})")

    @property
    def dx(self) -> float:
        return 2.0 * self.extent / self.side

    @property
    def dxi(self) -> float:
        return 1.0 / (2.0 * self.extent)

    @property
    def nyquist(self) -> float:
        return self.side / (4.0 * self.extent)

    @property
    def shape(self):
        return (self.side,) * self.n

    @property
    def cell_volume(self) -> float:
        return self.dx ** self.n

    def axis(self) -> np.ndarray:
        return (np.arange(self.side) - self.side // 2) * self.dx

    def frequency_axis(self) -> np.ndarray:
        """Frequencies in FFT order."""
        return np.fft.fftfreq(self.side, d=self.dx)

    def points(self) -> np.ndarray:
        """Physical coordinates, shape (N,)*n + (n,)."""
        return np.stack(np.meshgrid(*([self.axis()] * self.n), indexing="ij"), axis=-1)

    def frequencies(self) -> np.ndarray:
        """Frequency vectors in FFT order, shape (N,)*n + (n,)."""
        return np.stack(np.meshgrid(*([self.frequency_axis()] * self.n), indexing="ij"), axis=-1)

    def radii(self) -> np.ndarray:
        axes = np.meshgrid(*([self.axis() ** 2] * self.n), indexing="ij", sparse=True)
        return np.sqrt(sum(axes))

    def frequency_radii(self) -> np.ndarray:
        axes = np.meshgrid(*([self.frequency_axis() ** 2] * self.n), indexing="ij", sparse=True)
        return np.sqrt(sum(axes))

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "side": self.side, "extent": self.extent}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GridSpec":
        return cls(n=int(data["n"]), side=int(data["side"]), extent=float(data["extent"]))


@dataclass
class SampledFunction:
    """Complex samples on a GridSpec (physical layout, origin at index N/2)."""
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise ConfigError(f"values shape {self.values.shape} does not match grid {self.grid.shape}")

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell_volume))

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        return SampledFunction(self.grid, self.values + other.values)

    def scaled(self, factor: complex) -> "SampledFunction":
        return SampledFunction(self.grid, factor * self.values)


@dataclass
class MultiplierField:
    """Frequency-side samples in FFT order with their provenance."""
    grid: GridSpec
    values: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)
    layout: str = "fft"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)


@dataclass
class SpatialKernel:
    """Physical-space kernel obtained from a multiplier by inverse DFT."""
    function: SampledFunction
    metadata: Dict[str, Any] = field(default_factory=dict)
    normalization: str = "fftshift(ifftn(m)) / dx^n"

    @property
    def grid(self) -> GridSpec:
        return self.function.grid

    @property
    def values(self) -> np.ndarray:
        return self.function.values

    @cached_property
    def l1_norm(self) -> float:
        return float(np.sum(np.abs(self.values)) * self.grid.cell_volume)

    @cached_property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def norms(self) -> Dict[str, float]:
        return {"l1": self.l1_norm, "sup": self.sup_norm}


# =============================================================================
# File formats
# =============================================================================


def sidecar_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def save_field(path: PathLike, grid: GridSpec, values: np.ndarray, metadata: Dict[str, Any],
               layout: str, config: Optional[Dict[str, Any]] = None) -> Path:
    """Flat little-endian complex128 binary plus a JSON sidecar."""
    data = np.ascontiguousarray(values, dtype=DTYPE).tobytes()
    atomic_write_bytes(path, data)
    sidecar = dict(grid.to_dict())
    sidecar.update({"dtype": "complex128-le", "layout": layout, "order": "C"})
    sidecar.update(metadata)
    if config is not None:
        sidecar["config"] = config
    write_json(sidecar_path(path), sidecar)
    return Path(path)


def load_field(path: PathLike):
    """Inverse of ``save_field``: (grid, values, sidecar)."""
    sidecar = read_json(sidecar_path(path))
    grid = GridSpec.from_dict(sidecar)
    raw = Path(path).read_bytes()
    values = np.frombuffer(raw, dtype=DTYPE).reshape(grid.shape).astype(complex)
    return grid, values, sidecar


def save_multiplier(path: PathLike, mult: MultiplierField, config=None) -> Path:
    return save_field(path, mult.grid, mult.values, mult.metadata, mult.layout, config)


def load_multiplier(path: PathLike) -> MultiplierField:
    grid, values, sidecar = load_field(path)
    meta = {k: v for k, v in sidecar.items()
            if k not in ("n", "side", "extent", "dtype", "layout", "order", "config")}
    return MultiplierField(grid=grid, values=values, metadata=meta, layout=sidecar["layout"])


def save_kernel(path: PathLike, kernel: SpatialKernel, config=None) -> Path:
    meta = dict(kernel.metadata)
    meta.update({"normalization": kernel.normalization, "norms": kernel.norms()})
    return save_field(path, kernel.grid, kernel.values, meta, "physical", config)


def load_kernel(path: PathLike) -> SpatialKernel:
    grid, values, sidecar = load_field(path)
    meta = {k: v for k, v in sidecar.items()
            if k not in ("n", "side", "extent", "dtype", "layout", "order", "config",
                         "normalization", "norms")}
    return SpatialKernel(function=SampledFunction(grid, values), metadata=meta)


def radial_profile(kernel: SpatialKernel) -> pd.DataFrame:
    """Max |value| per radial bin of width dx."""
    grid = kernel.grid
    radii = np.broadcast_to(grid.radii(), grid.shape).ravel()
    mags = np.abs(kernel.values).ravel()
    bins = np.floor(radii / grid.dx).astype(np.int64)
    frame = pd.DataFrame({"bin": bins, "value_abs": mags})
    profile = frame.groupby("bin", sort=True)["value_abs"].max().reset_index()
    profile["radius"] = (profile["bin"] + 0.5) * grid.dx
    return profile[["radius", "value_abs"]]


def save_radial_profile(path: PathLike, kernel: SpatialKernel, config=None) -> Path:
    return write_csv(path, radial_profile(kernel), config)
