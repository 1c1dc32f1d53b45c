import numpy as np
import pytest

from brlab.cli.app import (EXIT_FAILED, EXIT_OK, EXIT_USAGE, _experiment_config, load_caps,
                           load_subsets, main, parse_config)
from brlab.cli.config import load_config_file, parse_complex
from brlab.errors import ConfigError, ConstructionError
from brlab.models.schemas import Command, Experiment
from brlab.services.sphere import cap_grid
from brlab.utils.io import read_csv, read_json


# =============================================================================
# Configuration
# =============================================================================


@pytest.mark.parametrize("text,value", [("0.7", 0.7), ("0.7+0.3i", 0.7 + 0.3j),
                                        ("0.7 - 0.3j", 0.7 - 0.3j), ("2i", 2j)])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


def test_parse_complex_rejects_garbage():
    with pytest.raises(ConfigError, match="cannot parse"):
        parse_complex("seven")


def test_config_file_errors(tmp_path):
    path = tmp_path / "bad.conf"
    path.write_text("sigma = 0.2\nno separator here\n")
    with pytest.raises(ConfigError, match=":2: expected key=value"):
        load_config_file(path)
    with pytest.raises(ConfigError, match="not found"):
        load_config_file(tmp_path / "missing.conf")


def test_quadrature_flags_reach_experiment_config():
    config = parse_config(["verify", "--experiment", "lemma-one", "--panels-per-unit", "32",
                           "--gauss-order", "10"])
    quadrature = _experiment_config(config).quadrature
    assert (quadrature.panels_per_unit, quadrature.gauss_order) == (32, 10)
    assert main(["verify", "--experiment", "lemma-one", "--gauss-order", "0"]) == EXIT_USAGE


def test_flags_override_config_file(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("# sweep defaults\nsigma = 0.2\nalpha = 0.7+0.3i  # complex\nj-range = 4..6\n")
    config = parse_config(["verify", "--config", str(path), "--experiment", "m-plus",
                           "--sigma", "0.3"])
    assert config.command is Command.VERIFY
    assert config.experiment is Experiment.M_PLUS
    assert config.sigma == 0.3
    assert config.alpha == 0.7 + 0.3j
    assert config.j_values("2..3") == [4, 5, 6]


# =============================================================================
# Exit codes
# =============================================================================


@pytest.mark.parametrize("argv", [[],
                                  ["verify"],
                                  ["verify", "--experiment", "m-plus", "--sigma", "0.7"],
                                  ["verify", "--experiment", "m-plus", "--j-range", "8..4"],
                                  ["caps", "--j", "6"],
                                  ["report"],
                                  ["verify", "--experiment", "nope"]])
def test_usage_errors(argv):
    assert main(argv) == EXIT_USAGE


def test_missing_config_file_is_usage_error(tmp_path):
    assert main(["verify", "--experiment", "m-plus", "--config", str(tmp_path / "x.conf")]) == EXIT_USAGE


def test_domain_error_is_usage_error(tmp_path):
    argv = ["multiplier", "--j", "4", "--variant", "sharp", "--alpha", "0.7", "--beta", "0.6",
            "--out", str(tmp_path / "m.bin")]
    assert main(argv) == EXIT_USAGE


def test_construction_error_is_failure(tmp_path, monkeypatch, capsys):
    def broken(j, sigma):
        raise ConstructionError("partition gaps 1..7 outside [0.66, 1.32)")

    monkeypatch.setattr("brlab.cli.app.lambda_partition", broken)
    argv = ["multiplier", "--j", "4", "--out", str(tmp_path / "m.bin")]
    assert main(argv) == EXIT_FAILED
    assert "partition gaps" in capsys.readouterr().err


# =============================================================================
# Subcommands
# =============================================================================


def test_bessel_to_stdout(capsys):
    assert main(["bessel", "--order", "0.5", "--rho", "1"]) == EXIT_OK
    assert "J(1) = " in capsys.readouterr().out


def test_bessel_to_csv(tmp_path):
    out = tmp_path / "j.csv"
    assert main(["bessel", "--order", "1", "--rho", "0.5,2", "--format", "csv",
                 "--out", str(out)]) == EXIT_OK
    frame = read_csv(out)
    assert frame["rho"].tolist() == [0.5, 2.0]
    assert frame["re"].iloc[0] == pytest.approx(0.24226845767487387, rel=1e-12)


def test_caps_round_trip(tmp_path):
    out = tmp_path / "caps.json"
    assert main(["caps", "--j", "6", "--out", str(out)]) == EXIT_OK
    grid = load_caps(out)
    expected = cap_grid(6, 2)
    assert grid.size == expected.size
    assert np.allclose(grid.centers, expected.centers, rtol=0, atol=1e-15)
    family = load_subsets(out)
    assert sum(len(s) for s in family.subsets) == expected.size


def test_verify_key_observation(tmp_path):
    out = tmp_path / "key.json"
    assert main(["verify", "--experiment", "key-observation", "--delta", "0.3",
                 "--out", str(out)]) == EXIT_OK
    document = read_json(out)
    assert document["config"]["delta"] == 0.3
    (report,) = document["reports"]
    assert report["pass"] is True
    assert report["params"]["deltas"] == [0.3]


def test_verify_is_deterministic(tmp_path):
    out = tmp_path / "m.json"
    argv = ["verify", "--experiment", "m-plus", "--out", str(out)]
    assert main(argv) == EXIT_OK
    first = out.read_bytes()
    assert main(argv) == EXIT_OK
    assert out.read_bytes() == first


def test_verify_csv(tmp_path):
    out = tmp_path / "key.csv"
    assert main(["verify", "--experiment", "key-observation", "--format", "csv",
                 "--out", str(out)]) == EXIT_OK
    assert out.read_text().startswith("# config: ")
    frame = read_csv(out)
    assert set(frame["experiment"]) == {"key-observation"}
    assert len(frame) == 12


def test_report_summarizes(tmp_path):
    report_in = tmp_path / "key.json"
    main(["verify", "--experiment", "key-observation", "--out", str(report_in)])
    summary = tmp_path / "summary.csv"
    assert main(["report", "--out", str(summary), str(report_in)]) == EXIT_OK
    frame = read_csv(summary)
    assert frame["experiment"].tolist() == ["key-observation"]
    assert bool(frame["pass"].iloc[0])
