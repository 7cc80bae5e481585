"""JSON output with every float written to 17 significant digits."""

from __future__ import annotations

import enum
import json
import math

import numpy as np


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj, indent: int | None = None) -> str:
    """Serialize ``obj``; complex numbers become ``[re, im]``, objects use ``to_json``."""
    return _encode(obj, indent, 0)


def _encode(obj, indent, level) -> str:
    if hasattr(obj, "to_json"):
        obj = obj.to_json()
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, enum.Enum):
        return json.dumps(obj.value)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, complex):
        obj = [obj.real, obj.imag]
    if isinstance(obj, str):
        return json.dumps(obj)
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = "," if indent is None else ","
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        colon = ":" if indent is None else ": "
        items = [pad + json.dumps(str(k)) + colon + _encode(v, indent, level + 1) for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + sep.join(pad + _encode(v, indent, level + 1) for v in obj) + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")
