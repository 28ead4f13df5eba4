"""Report documents: JSON-safe conversion, CSV tables and the report schema."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from fractions import Fraction

import numpy as np

from .core import Family, FamilySystem, GroundElement, system_to_doc

FLOAT_FORMAT = ".12g"

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "rainbow report",
    "type": "object",
    "required": ["command", "config", "status", "exit_code", "result"],
    "properties": {
        "command": {"type": "string", "minLength": 1},
        "config": {
            "type": "object",
            "required": ["seed"],
            "properties": {"seed": {"type": "integer"}},
        },
        "status": {"type": "string"},
        "exit_code": {"type": "integer", "enum": [0, 1, 2, 3]},
        "result": {"type": "object"},
    },
    "additionalProperties": False,
}


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, FLOAT_FORMAT)


def element_doc(e) -> list:
    return [e[0] + 1, e[1] + 1]


def block_doc(block, k: int | None = None) -> list:
    """1-based form; complete blocks abbreviate to their values."""
    if k is not None and len(block) == k:
        return [e[1] + 1 for e in block]
    return [element_doc(e) for e in block]


def jsonable(obj):
    """Convert results to JSON-safe values; non-integral numbers become strings."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj.numerator) if obj.denominator == 1 else f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (float, np.floating)):
        return fmt_float(float(obj))
    if isinstance(obj, GroundElement):
        return element_doc(obj)
    if isinstance(obj, FamilySystem):
        return system_to_doc(obj)
    if isinstance(obj, Family):
        return [block_doc(b, obj.params.k) for b in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(x) for x in obj.tolist()]
    if dataclasses.is_dataclass(obj):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(jsonable(k)) if not isinstance(k, str) else k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [jsonable(x) for x in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(report: dict) -> str:
    return json.dumps(jsonable(report), indent=2, sort_keys=True) + "\n"


def _cell(x):
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return "true" if x else "false"
    return jsonable(x)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(x) for x in row])
    return buf.getvalue()


def validate_report(doc: dict) -> None:
    import jsonschema

    jsonschema.validate(doc, REPORT_SCHEMA)
