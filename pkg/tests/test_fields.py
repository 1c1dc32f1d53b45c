import numpy as np
import pytest

from brlab.errors import ConfigError
from brlab.models.fields import (GridSpec, MultiplierField, SampledFunction, SpatialKernel,
                                 load_field, load_kernel, load_multiplier, radial_profile,
                                 save_field, save_kernel, save_multiplier, sidecar_path)
from brlab.utils.io import read_csv, read_json


@pytest.mark.parametrize("kwargs", [dict(n=4, side=64, extent=1.0),
                                    dict(n=2, side=100, extent=1.0),
                                    dict(n=2, side=64, extent=0.0)])
def test_grid_validation(kwargs):
    with pytest.raises(ConfigError):
        GridSpec(**kwargs)


def test_grid_geometry():
    grid = GridSpec(n=2, side=256, extent=32.0)
    assert grid.dx == 0.25
    assert grid.nyquist == 2.0
    assert grid.axis()[grid.side // 2] == 0.0
    assert grid.points().shape == (256, 256, 2)
    assert grid.frequencies().shape == (256, 256, 2)
    assert grid.radii()[128, 128] == 0.0
    assert np.isclose(grid.frequency_radii()[0, 1], grid.dxi)
    assert GridSpec.from_dict(grid.to_dict()) == grid


def test_sampled_function_shape_check():
    grid = GridSpec(n=1, side=8, extent=1.0)
    with pytest.raises(ConfigError):
        SampledFunction(grid, np.zeros(4))
    f = SampledFunction(grid, np.ones(8))
    assert f.l2_norm() == pytest.approx(np.sqrt(2.0))
    assert np.array_equal((f + f.scaled(2.0)).values, np.full(8, 3.0 + 0j))


def test_field_round_trip_is_bit_exact(tmp_path):
    grid = GridSpec(n=2, side=16, extent=4.0)
    rng = np.random.default_rng(0)
    values = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    path = tmp_path / "f.bin"
    save_field(path, grid, values, {"note": "random"}, "physical", {"seed": 0})
    assert path.stat().st_size == 16 * 16 * 16
    loaded_grid, loaded, sidecar = load_field(path)
    assert loaded_grid == grid
    assert np.array_equal(loaded, values)
    assert sidecar["dtype"] == "complex128-le"
    assert sidecar["layout"] == "physical"
    assert sidecar["config"] == {"seed": 0}
    assert sidecar_path(path).name == "f.bin.json"


def test_multiplier_and_kernel_files(tmp_path):
    grid = GridSpec(n=1, side=32, extent=2.0)
    mult = MultiplierField(grid, np.linspace(0.0, 1.0, 32), {"multiplier": "ramp"})
    save_multiplier(tmp_path / "m.bin", mult)
    again = load_multiplier(tmp_path / "m.bin")
    assert again.layout == "fft"
    assert again.metadata == {"multiplier": "ramp"}
    assert np.array_equal(again.values, mult.values)

    kernel = SpatialKernel(SampledFunction(grid, np.arange(32.0) - 16.0), {"part": "P"})
    save_kernel(tmp_path / "k.bin", kernel)
    sidecar = read_json(tmp_path / "k.bin.json")
    assert sidecar["norms"]["sup"] == 16.0
    assert load_kernel(tmp_path / "k.bin").metadata == {"part": "P"}


def test_kernel_norms():
    grid = GridSpec(n=2, side=4, extent=1.0)
    kernel = SpatialKernel(SampledFunction(grid, np.full(grid.shape, -2.0)))
    assert kernel.sup_norm == 2.0
    assert kernel.l1_norm == pytest.approx(2.0 * 16 * 0.25)


def test_radial_profile(tmp_path):
    grid = GridSpec(n=2, side=32, extent=4.0)
    r = np.broadcast_to(grid.radii(), grid.shape)
    kernel = SpatialKernel(SampledFunction(grid, np.exp(-r)))
    profile = radial_profile(kernel)
    assert list(profile.columns) == ["radius", "value_abs"]
    assert profile["value_abs"].iloc[0] == 1.0
    assert profile["value_abs"].is_monotonic_decreasing
