"""Check records, verification reports and their JSON/CSV rendering."""

from __future__ import annotations

import csv
import io
import json
import math
import platform
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__

SCHEMA = "conekit/1"
PROVENANCE = ("paper", "trivial", "derived")


@dataclass
class CheckRecord:
    name: str
    expected: object
    computed: object
    tolerance: object
    passed: bool
    provenance: str

    def __post_init__(self):
        if self.provenance not in PROVENANCE:
            raise ValueError(f"provenance must be one of {PROVENANCE}")
        self.passed = bool(self.passed)

    def to_json(self) -> dict:
        return {"name": self.name, "expected": self.expected, "computed": self.computed,
                "tolerance": self.tolerance, "pass": self.passed, "provenance": self.provenance}


def exact_record(name: str, expected, computed, provenance: str = "paper") -> CheckRecord:
    return CheckRecord(name, expected, computed, "exact", expected == computed, provenance)


def close_record(name: str, expected: float, computed: float, tol: float,
                 provenance: str = "paper", relative: bool = True) -> CheckRecord:
    scale = abs(expected) if relative and expected != 0 else 1.0
    ok = math.isfinite(computed) and abs(computed - expected) <= tol * scale
    return CheckRecord(name, expected, computed, tol, ok, provenance)


def bound_record(name: str, computed: float, bound: float, provenance: str = "derived") -> CheckRecord:
    """``computed <= bound``; used for deviations whose expected value is 0."""
    ok = math.isfinite(computed) and computed <= bound
    return CheckRecord(name, 0, computed, bound, ok, provenance)


@dataclass
class VerificationReport:
    command: str
    inputs: dict = field(default_factory=dict)
    records: list = field(default_factory=list)
    seed: int = 0x5EED
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def add(self, record: CheckRecord) -> CheckRecord:
        self.records.append(record)
        return record

    def extend(self, records) -> None:
        self.records.extend(records)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "command": self.command,
            "inputs": self.inputs,
            "status": "pass" if self.passed else "fail",
            "checks": [r.to_json() for r in self.records],
            "environment": {"version": __version__, "seed": hex(self.seed),
                            "python": platform.python_version(), "numpy": np.__version__},
            **({"data": self.extra} if self.extra else {}),
        }

    def text(self) -> str:
        width = max([len(r.name) for r in self.records] + [10])
        lines = [f"{self.command}: {'PASS' if self.passed else 'FAIL'}"]
        for r in self.records:
            lines.append(f"  {'ok  ' if r.passed else 'FAIL'} {r.name:<{width}}  "
                         f"expected={_short(r.expected)}  computed={_short(r.computed)}  "
                         f"tol={_short(r.tolerance)}  [{r.provenance}]")
        return "\n".join(lines)


def _short(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(_plain(x))


def _plain(x):
    """Convert numbers to JSON-friendly values; rationals become ``"p/q"``."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    if hasattr(x, "to_json"):
        return _plain(x.to_json())
    return str(x)


def dumps(obj, indent: int = 2) -> str:
    """JSON text with floats at 17 significant digits and rationals as strings."""
    return _render(_plain(obj), indent, 0)


def _render(x, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(x, float):
        if not math.isfinite(x):
            return json.dumps(str(x))
        return format(x, ".17g")
    if isinstance(x, dict):
        if not x:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_render(v, indent, level + 1)}" for k, v in x.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(x, list):
        if not x:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in x) and len(x) <= 8:
            return "[" + ", ".join(_render(v, indent, level + 1) for v in x) + "]"
        return "[\n" + ",\n".join(pad + _render(v, indent, level + 1) for v in x) + "\n" + end + "]"
    return json.dumps(x)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(header)
    for row in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return buf.getvalue()
