"""Deterministic JSON and plain-text rendering of results."""

from __future__ import annotations

import json
import platform
from fractions import Fraction

from . import __version__


def _default(obj):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}" if obj.denominator != 1 else str(obj.numerator)
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def metadata() -> dict:
    import numpy
    import scipy

    return {
        "augtree": __version__,
        "python": platform.python_version(),
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
    }


def document(command: str, payload: dict, with_metadata: bool = True) -> dict:
    doc = {"command": command, "result": payload}
    if with_metadata:
        doc["metadata"] = metadata()
    return doc


def dumps(doc) -> str:
    return json.dumps(doc, default=_default, indent=2, ensure_ascii=False) + "\n"


def _matrix(name: str, M) -> list:
    rows = [" ".join(f"{v:>3}" for v in r) for r in M]
    if not rows:
        return [f"{name} = []"]
    pad = " " * (len(name) + 3)
    return [f"{name} = [{rows[0]} ]"] + [f"{pad}[{r} ]" for r in rows[1:]]


def render_text(command: str, payload: dict) -> str:
    """A compact human-readable view; the JSON form is the canonical output."""
    lines = [f"# {command}"]
    for key, value in payload.items():
        if key in ("A", "B", "u") and isinstance(value, list):
            lines.extend(_matrix(key, value))
        elif isinstance(value, dict):
            lines.append(f"{key}:")
            for k2, v2 in value.items():
                lines.append(f"  {k2}: {json.dumps(v2, default=_default, ensure_ascii=False)}")
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{key}:")
            for item in value:
                lines.append("  - " + json.dumps(item, default=_default, ensure_ascii=False))
        else:
            lines.append(f"{key}: {json.dumps(value, default=_default, ensure_ascii=False)}")
    return "\n".join(lines) + "\n"
