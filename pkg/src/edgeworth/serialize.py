"""Deterministic serialization: fixed key order, floats at 17 significant
digits, so identical inputs give byte-identical primary outputs."""

from __future__ import annotations

import math


def format_float(x: float) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return f"{x:.17g}"
    return str(x)


def json_dumps(obj, indent: int = 0) -> str:
    """JSON with sorted keys and %.17g floats (NaN/Infinity as in json.dumps)."""
    pieces: list = []
    _encode(obj, pieces, indent, 0)
    return "".join(pieces)


def _encode(obj, out: list, indent: int, depth: int):
    pad = "\n" + " " * (indent * (depth + 1)) if indent else ""
    endpad = "\n" + " " * (indent * depth) if indent else ""
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, str):
        import json

        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, key in enumerate(sorted(obj, key=str)):
            if i:
                out.append("," if not indent else ",")
            out.append(pad)
            import json

            out.append(json.dumps(str(key)))
            out.append(": " if indent else ":")
            _encode(obj[key], out, indent, depth + 1)
        out.append(endpad)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        if not len(obj):
            out.append("[]")
            return
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            out.append(pad)
            _encode(item, out, indent, depth + 1)
        out.append(endpad)
        out.append("]")
    else:
        try:
            import numpy as np

            if isinstance(obj, np.integer):
                out.append(str(int(obj)))
                return
            if isinstance(obj, np.floating):
                out.append(format_float(float(obj)))
                return
            if isinstance(obj, np.ndarray):
                _encode(obj.tolist(), out, indent, depth)
                return
        except ImportError:  # pragma: no cover
            pass
        raise TypeError(f"cannot serialize {type(obj)!r}")


def write_json(obj, path, indent: int = 2):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json_dumps(obj, indent=indent))
        fh.write("\n")


def write_series_csv(path, rows, header=("n", "statistic", "prediction")):
    """Plot-data CSV: one row per series point, floats at 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_float(v) for v in row) + "\n")
