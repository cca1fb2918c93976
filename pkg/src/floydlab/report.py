"""Reports and their byte-stable CSV / JSON serialization.

Floats are always written with 17 significant digits, which round-trips any
double exactly. Nothing time- or host-dependent enters a report.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["Check", "Report", "format_float", "to_json", "to_csv", "checks_csv", "emit_report"]


@dataclass(frozen=True)
class Check:
    name: str
    error: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.error <= self.tol)


@dataclass
class Report:
    meta: dict
    columns: list[str]
    rows: list[list]
    summary: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def format_float(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def _scalar(v) -> str:
    # numpy scalars arrive here too; map them onto the Python types first
    if hasattr(v, "item") and not isinstance(v, (list, tuple, dict, str)):
        v = v.item()
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format_float(v)
    if v is None:
        return ""
    return str(v)


def _json_string(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch in '"\\':
            out.append("\\" + ch)
        elif ch == "\n":
            out.append("\\n")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _json(v, indent: int) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if hasattr(v, "item") and not isinstance(v, (list, tuple, dict, str)):
        v = v.item()
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f"{pad}{_json_string(str(k))}: {_json(x, indent + 1)}" for k, x in v.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(v, (list, tuple)):
        if not v:
            return "[]"
        if all(not isinstance(x, (dict, list, tuple)) for x in v):
            return "[" + ", ".join(_json(x, indent + 1) for x in v) + "]"
        return "[\n" + ",\n".join(pad + _json(x, indent + 1) for x in v) + "\n" + end + "]"
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        # JSON has no NaN or infinity
        return format_float(v) if math.isfinite(v) else "null"
    return _json_string(str(v))


def to_json(report: Report) -> str:
    doc = {
        "meta": report.meta,
        "data": {"columns": report.columns, "rows": report.rows, "summary": report.summary},
        "checks": [
            {"name": c.name, "error": c.error, "tol": c.tol, "passed": c.passed} for c in report.checks
        ],
    }
    return _json(doc, 0) + "\n"


def _csv_field(s: str) -> str:
    if any(ch in s for ch in ',"\n'):
        return '"' + s.replace('"', '""') + '"'
    return s


def to_csv(report: Report) -> str:
    lines = [",".join(_csv_field(c) for c in report.columns)]
    lines += [",".join(_csv_field(_scalar(v)) for v in row) for row in report.rows]
    return "\n".join(lines) + "\n"


def checks_csv(report: Report) -> str:
    lines = ["name,error,tol,passed"]
    lines += [f"{_csv_field(c.name)},{format_float(c.error)},{format_float(c.tol)},{_scalar(c.passed)}"
              for c in report.checks]
    return "\n".join(lines) + "\n"


def emit_report(report: Report, fmt: str, dest, stem: str) -> list[Path]:
    """Write ``stem``.csv (+ ``stem``.checks.csv) and/or ``stem``.json under ``dest``."""
    if fmt not in ("csv", "json", "both"):
        raise ValueError(f"unknown format {fmt!r}")
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    written = []

    def write(name, text):
        path = dest / name
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        written.append(path)

    if fmt in ("csv", "both"):
        write(f"{stem}.csv", to_csv(report))
        write(f"{stem}.checks.csv", checks_csv(report))
    if fmt in ("json", "both"):
        write(f"{stem}.json", to_json(report))
    return written
