"""JSON/CSV serialization, report schemas and atomic file output."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable

import jsonschema
import numpy as np

_RATIONAL = {"type": "string", "pattern": r"^-?\d+(/\d+)?$"}
_NUM_OR_RATIONAL = {"anyOf": [{"type": "integer"}, _RATIONAL]}

SCHEMAS = {
    "growth": {
        "type": "object",
        "required": ["kind", "horizon"],
        "properties": {
            "kind": {"enum": ["table", "poly", "exp"]},
            "horizon": {"type": "integer", "minimum": 2},
            "values": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            "coeffs": {"type": "array", "items": _NUM_OR_RATIONAL},
            "base": _NUM_OR_RATIONAL,
            "coeff": _NUM_OR_RATIONAL,
        },
    },
    "bgd": {
        "type": "object",
        "required": ["is_bgd", "minimal_L", "failing_index"],
        "properties": {
            "is_bgd": {"type": "boolean"},
            "minimal_L": {"type": ["integer", "null"]},
            "failing_index": {"type": ["integer", "null"]},
        },
    },
    "certificate": {
        "type": "object",
        "required": ["A", "horizon", "direction_witnesses"],
        "properties": {
            "A": {"type": ["integer", "null"]},
            "horizon": {"type": "integer"},
            "direction_witnesses": {"type": "array", "minItems": 2, "maxItems": 2},
        },
    },
    "tree": {
        "type": "object",
        "required": ["levels"],
        "properties": {
            "levels": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["count", "parents"],
                    "properties": {
                        "count": {"type": "integer", "minimum": 1},
                        "parents": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                    },
                },
            }
        },
    },
    "levelset": {
        "type": "object",
        "required": ["intervals"],
        "properties": {
            "intervals": {
                "type": "array",
                "items": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2, "maxItems": 2},
            }
        },
    },
    "plan": {
        "type": "object",
        "required": ["S", "l", "horizon", "pieces", "placements"],
        "properties": {
            "l": {"type": "integer", "minimum": 1},
            "pieces": {"type": "array", "items": {"type": "object", "required": ["kind", "offset", "profiles"]}},
            "placements": {"type": "object", "additionalProperties": {"type": "integer"}},
        },
    },
    "summary": {
        "type": "object",
        "required": ["command", "checks", "passed"],
        "properties": {
            "checks": {"type": "object", "additionalProperties": {"type": "boolean"}},
            "passed": {"type": "boolean"},
        },
    },
    "report": {"type": "object"},
}


def validate(obj: Any, schema: str) -> None:
    jsonschema.validate(obj, SCHEMAS[schema])


def to_jsonable(obj: Any) -> Any:
    """Plain JSON types; rationals become ``"p/q"`` strings."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(x) for x in items]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def csv_text(header: Iterable[str], rows: Iterable[Iterable[Any]]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(list(header))
    for row in rows:
        wr.writerow([str(x) if isinstance(x, Fraction) else x for x in row])
    return buf.getvalue()


def exact_and_decimal(x: Any) -> tuple:
    x = Fraction(x)
    return (str(x), f"{float(x):.12g}")


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_json(path: Path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
