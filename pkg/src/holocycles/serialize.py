"""JSON helpers: complex numbers as ``[re, im]`` and byte-stable output."""
from __future__ import annotations

import json
import math

import numpy as np


def complex_to_pair(c) -> list[float]:
    c = complex(c)
    return [c.real, c.imag]


def pair_to_complex(pair) -> complex:
    if isinstance(pair, (int, float)) and not isinstance(pair, bool):
        return complex(pair)
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise ValueError(f"expected [re, im], got {pair!r}")
    re, im = (float(v) for v in pair)
    if not (math.isfinite(re) and math.isfinite(im)):
        raise ValueError(f"non-finite complex {pair!r}")
    return complex(re, im)


def _float(x: float) -> str:
    if not math.isfinite(x):
        # e.g. the log-margin of a first inequality with an empty product
        return "null"
    text = f"{x:.17g}"
    if "e" not in text and "." not in text and "inf" not in text:
        text += ".0"
    return text


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    close = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        parts = [_encode(v, indent, level + 1) for v in obj]
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(pad + p for p in parts) + "\n" + close + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 1) -> str:
    """Serialize with insertion-ordered keys and floats at 17 significant digits.

    Non-finite floats become ``null``.
    """
    return _encode(obj, indent, 0) + "\n"
