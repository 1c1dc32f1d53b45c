"""Flat key=value configuration files merged with command-line flags"""
from pathlib import Path
from typing import Any, Dict, Optional, Union

from brlab.errors import ConfigError
from brlab.models.schemas import RunConfig

COMPLEX_KEYS = ("alpha", "beta", "order")


def normalize_key(key: str) -> str:
    return key.strip().lstrip("-").replace("-", "_")


def parse_complex(text: Union[str, complex, float]) -> complex:
    """'0.7', '0.7+0.3i' or '0.7+0.3j' to a complex number."""
    if not isinstance(text, str):
        return complex(text)
    cleaned = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(cleaned)
    except ValueError:
        raise ConfigError(f"cannot parse complex value {text!r}") from None


def load_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """Read key=value lines; '#' starts a comment, blank lines are skipped."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    values: Dict[str, str] = {}
    for number, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{number}: expected key=value, got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = normalize_key(key)
        if not key:
            raise ConfigError(f"{path}:{number}: empty key")
        values[key] = value.strip()
    return values


def _expand(values: Dict[str, Any]) -> Dict[str, Any]:
    """Split complex keys into re/im parts and list-valued keys into lists."""
    out: Dict[str, Any] = {}
    for key, value in values.items():
        key = normalize_key(key)
        if key in COMPLEX_KEYS:
            z = parse_complex(value)
            out[f"{key}_re"] = z.real
            out[f"{key}_im"] = z.imag
        elif key == "inputs" and isinstance(value, str):
            out[key] = [part.strip() for part in value.split(",") if part.strip()]
        else:
            out[key] = value
    return out


def merge(file_values: Dict[str, Any], flag_values: Dict[str, Any]) -> Dict[str, Any]:
    """Flags override file values key by key (after complex expansion)."""
    merged = _expand(file_values)
    merged.update(_expand(flag_values))
    return merged


def build_run_config(command: str, flag_values: Dict[str, Any],
                     config_path: Optional[Union[str, Path]] = None) -> RunConfig:
    """Resolve a RunConfig; raises pydantic ValidationError or ConfigError."""
    file_values = load_config_file(config_path) if config_path else {}
    file_values.pop("command", None)
    merged = merge(file_values, flag_values)
    merged["command"] = command
    return RunConfig(**merged)
