"""Deterministic, atomic file output"""
import json
import math
import os
import tempfile
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

import numpy as np
import pandas as pd

FLOAT_FORMAT = "%.17g"

PathLike = Union[str, Path]


def format_float(x: float) -> str:
    """Fixed 17-significant-digit text; non-finite values become JSON null."""
    if not math.isfinite(x):
        return "null"
    text = FLOAT_FORMAT % x
    if text in ("0", "-0"):
        return "0.0"
    return text


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with every float written at 17 significant digits."""
    return _emit(obj, indent, 0) + "\n"


def _emit(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return _emit({"re": obj.real, "im": obj.imag}, indent, level)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, Enum):
        return _emit(obj.value, indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_emit(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}{_emit(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def atomic_write_bytes(path: PathLike, data: bytes) -> Path:
    """Write via a temp file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=str(path.parent))
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def atomic_write_text(path: PathLike, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def write_json(path: PathLike, obj: Any) -> Path:
    return atomic_write_text(path, dumps(obj))


def read_json(path: PathLike) -> Any:
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def write_csv(path: PathLike, frame: pd.DataFrame,
              config: Optional[Dict[str, Any]] = None) -> Path:
    """CSV with fixed float format; the resolved config goes in a leading comment."""
    header = ""
    if config is not None:
        header = "# config: " + json.dumps(_plain(config), sort_keys=False,
                                           ensure_ascii=False) + "\n"
    body = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return atomic_write_text(path, header + body)


def read_csv(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def _plain(obj: Any) -> Any:
    """Round-trip through the fixed-format emitter so config text is stable."""
    return json.loads(dumps(obj))


def _flatten(row: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for key, value in row.items():
        name = f"{prefix}{key}"
        if isinstance(value, (complex, np.complexfloating)):
            out[f"{name}_re"] = float(value.real)
            out[f"{name}_im"] = float(value.imag)
        elif isinstance(value, dict):
            out.update(_flatten(value, f"{name}_"))
        elif isinstance(value, (list, tuple, np.ndarray)):
            out[name] = dumps(value, indent=0).replace("\n", "")
        elif isinstance(value, Enum):
            out[name] = value.value
        else:
            out[name] = value
    return out


def rows_to_frame(rows: Iterable[Dict[str, Any]]) -> pd.DataFrame:
    """One row per record; complex values and nested dicts become flat columns."""
    return pd.DataFrame([_flatten(row) for row in rows])
