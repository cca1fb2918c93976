"""Scenario files.

Two interchangeable spellings are accepted. The text form is one
``section.key = value`` per line with ``#`` comments::

    task = trajectory
    potential.kind = free
    context.E = 0.5
    microstate.a = 2
    microstate.b = 1
    microstate.c = 0
    grid.min = -3
    grid.max = 3
    grid.n = 61

The JSON form nests the same keys (``{"potential": {"kind": "free"}, ...}``).
"""
from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .basis import FreePotential, LinearPotential, SquareWellPotential, make_basis
from .core import InitialValues, Microstate, PhysicalContext, microstate_from_initial_values
from .errors import ConfigError, FloydlabError

__all__ = ["Scenario", "load_scenario", "parse_text", "parse_json", "build_scenario", "TASKS"]

TASKS = ("trajectory", "stats", "timing", "width", "sweep", "levels")

_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")

# key -> value type; "float" values must be finite
SCHEMA = {
    "task": "str",
    "potential.kind": "str",
    "potential.U": "float",
    "potential.q": "float",
    "potential.f": "float",
    "context.m": "float",
    "context.hbar": "float",
    "context.E": "float",
    "context.level": "int",
    "microstate.a": "float",
    "microstate.b": "float",
    "microstate.c": "float",
    "initial.x0": "float",
    "initial.Wx0": "float",
    "initial.Wxx0": "float",
    "initial.det": "float",
    "grid.min": "float",
    "grid.max": "float",
    "grid.n": "int",
    "sweep.axis": "str",
    "sweep.values": "floats",
    "sweep.start": "float",
    "sweep.stop": "float",
    "sweep.n": "int",
    "sweep.gap": "float",
    "width.tol": "float",
    "check.samples": "int",
}


@dataclass(frozen=True)
class Scenario:
    task: str
    potential: object
    ctx: PhysicalContext
    ms: Microstate
    level: int | None
    grid: tuple[float, ...] | None
    sweep_axis: str | None
    sweep_values: tuple[float, ...] | None
    sweep_gap: float | None
    width_tol: float
    check_samples: int
    sha256: str
    name: str = "scenario"


class _Entries(dict):
    """Flat key -> raw value, remembering where each key came from."""

    def __init__(self):
        super().__init__()
        self.origin: dict[str, str] = {}

    def where(self, key: str) -> str:
        return self.origin.get(key, key)


def parse_text(text: str, source: str = "<text>") -> _Entries:
    entries = _Entries()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not _KEY.match(key):
            raise ConfigError(f"{source}:{lineno}: malformed key {key!r}")
        if key in entries:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} (first at {entries.where(key)})")
        entries[key] = value
        entries.origin[key] = f"{source}:{lineno} ({key})"
    return entries


def _flatten(obj, prefix, out: _Entries, source):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(v, f"{prefix}.{k}" if prefix else str(k), out, source)
    else:
        if isinstance(obj, list):
            obj = ", ".join(str(v) for v in obj)
        out[prefix] = str(obj) if not isinstance(obj, str) else obj
        out.origin[prefix] = f"{source} ({prefix})"


def parse_json(text: str, source: str = "<json>") -> _Entries:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"{source}: top level must be an object")
    entries = _Entries()
    _flatten(obj, "", entries, source)
    return entries


def _convert(entries: _Entries, key: str, kind: str):
    raw = entries[key]
    try:
        if kind == "str":
            return raw.strip().strip('"')
        if kind == "int":
            value = float(raw)
            if not value.is_integer():
                raise ValueError
            return int(value)
        if kind == "floats":
            values = tuple(float(v) for v in raw.replace(",", " ").split())
            if not values or not all(math.isfinite(v) for v in values):
                raise ValueError
            return values
        value = float(raw)
        if not math.isfinite(value):
            raise ValueError
        return value
    except ValueError:
        raise ConfigError(f"{entries.where(key)}: expected {kind}, got {raw!r}") from None


def _typed(entries: _Entries) -> dict:
    unknown = sorted(set(entries) - set(SCHEMA))
    if unknown:
        raise ConfigError(f"{entries.where(unknown[0])}: unknown key {unknown[0]!r}")
    return {k: _convert(entries, k, SCHEMA[k]) for k in entries}


def _canonical_hash(values: dict) -> str:
    def fmt(v):
        if isinstance(v, float):
            return format(v, ".17g")
        if isinstance(v, tuple):
            return ",".join(fmt(x) for x in v)
        return str(v)

    text = "".join(f"{k}={fmt(values[k])}\n" for k in sorted(values))
    return hashlib.sha256(text.encode()).hexdigest()


def _require(values, entries, key):
    if key not in values:
        raise ConfigError(f"missing required key {key!r}")
    return values[key]


def _potential(values, entries):
    kind = values.get("potential.kind", "free")
    try:
        if kind == "free":
            return FreePotential()
        if kind == "square_well":
            return SquareWellPotential(_require(values, entries, "potential.U"), _require(values, entries, "potential.q"))
        if kind == "linear":
            return LinearPotential(_require(values, entries, "potential.f"))
    except FloydlabError as exc:
        raise ConfigError(f"{entries.where('potential.kind')}: {exc}") from exc
    raise ConfigError(f"{entries.where('potential.kind')}: unknown potential kind {kind!r}")


def _context(values, entries, potential):
    from .squarewell import solve_symmetric_levels

    m = values.get("context.m", 1.0)
    hbar = values.get("context.hbar", 1.0)
    level = values.get("context.level")
    try:
        base = PhysicalContext(m, hbar, values.get("context.E", 0.5))
    except FloydlabError as exc:
        raise ConfigError(f"context: {exc}") from exc
    if level is None:
        if potential.kind == "square_well" and "context.E" not in values:
            level = 0
        else:
            return base, None
    if potential.kind != "square_well":
        raise ConfigError(f"{entries.where('context.level')}: a level index needs potential.kind = square_well")
    if "context.E" in values:
        raise ConfigError(f"{entries.where('context.E')}: give context.E or context.level, not both")
    if level < 0:
        raise ConfigError(f"{entries.where('context.level')}: level index must be >= 0")
    spectrum = solve_symmetric_levels(base, potential.U, potential.q, max_levels=level + 1)
    if len(spectrum.levels) <= level:
        raise ConfigError(f"{entries.where('context.level')}: only {len(spectrum.levels)} symmetric levels exist")
    return base.with_energy(spectrum.levels[level].E), level


def _microstate(values, entries, potential, ctx):
    direct = [k for k in ("microstate.a", "microstate.b", "microstate.c") if k in values]
    initial = [k for k in values if k.startswith("initial.")]
    if direct and initial:
        raise ConfigError(f"{entries.where(initial[0])}: give microstate.* or initial.*, not both")
    if initial:
        for key in ("initial.x0", "initial.Wx0", "initial.Wxx0"):
            _require(values, entries, key)
        det = values.get("initial.det", 1.0)
        if not det > 0:
            raise ConfigError(f"{entries.where('initial.det')}: initial.det must be positive")
        try:
            iv = InitialValues(values["initial.x0"], values["initial.Wx0"], values["initial.Wxx0"])
            # The Wronskian normalization fixes ab - c^2/4 = det.
            basis = make_basis(potential, ctx, Microstate(1.0, det, 0.0))
            return microstate_from_initial_values(iv, ctx, basis)
        except FloydlabError as exc:
            raise ConfigError(f"{entries.where('initial.x0')}: {exc}") from exc
    if len(direct) != 3:
        missing = sorted({"microstate.a", "microstate.b", "microstate.c"} - set(direct))
        raise ConfigError(f"missing microstate key(s): {', '.join(missing)}")
    try:
        return Microstate(values["microstate.a"], values["microstate.b"], values["microstate.c"])
    except FloydlabError as exc:
        raise ConfigError(f"{entries.where('microstate.c')}: {exc}") from exc


def _grid(values, entries):
    keys = ("grid.min", "grid.max", "grid.n")
    present = [k for k in keys if k in values]
    if not present:
        return None
    for k in keys:
        _require(values, entries, k)
    lo, hi, n = values["grid.min"], values["grid.max"], values["grid.n"]
    if n < 1 or (n > 1 and not hi > lo):
        raise ConfigError(f"{entries.where('grid.n')}: grid needs n >= 1 and max > min")
    return tuple(np.linspace(lo, hi, n).tolist())


def _sweep(values, entries):
    axis = values.get("sweep.axis")
    explicit = values.get("sweep.values")
    ranged = [k for k in ("sweep.start", "sweep.stop", "sweep.n") if k in values]
    if axis is None:
        if explicit is not None or ranged:
            raise ConfigError("sweep values given without sweep.axis")
        return None, None
    if explicit is not None and ranged:
        raise ConfigError(f"{entries.where('sweep.values')}: give sweep.values or start/stop/n, not both")
    if explicit is None:
        for k in ("sweep.start", "sweep.stop", "sweep.n"):
            _require(values, entries, k)
        start, stop = values["sweep.start"], values["sweep.stop"]
        if not (start > 0 and stop > 0 and values["sweep.n"] >= 1):
            raise ConfigError(f"{entries.where('sweep.start')}: geometric sweep needs positive start and stop")
        explicit = tuple(np.geomspace(start, stop, values["sweep.n"]).tolist())
    from .correspondence import validate_grid

    try:
        return axis, validate_grid(axis, explicit)
    except ConfigError as exc:
        raise ConfigError(f"{entries.where('sweep.axis')}: {exc}") from exc


def _default_task(potential, grid, sweep_axis):
    if sweep_axis is not None:
        return "sweep"
    if grid is not None:
        return "trajectory"
    return {"free": "stats", "square_well": "timing", "linear": "width"}[potential.kind]


def build_scenario(entries: _Entries, name: str = "scenario") -> Scenario:
    values = _typed(entries)
    potential = _potential(values, entries)
    ctx, level = _context(values, entries, potential)
    ms = _microstate(values, entries, potential, ctx)
    grid = _grid(values, entries)
    axis, sweep_values = _sweep(values, entries)
    task = values.get("task") or _default_task(potential, grid, axis)
    if task not in TASKS:
        raise ConfigError(f"{entries.where('task')}: unknown task {task!r}; expected one of {', '.join(TASKS)}")
    if task == "trajectory" and grid is None:
        raise ConfigError("task trajectory needs grid.min, grid.max and grid.n")
    if task == "sweep" and axis is None:
        raise ConfigError("task sweep needs sweep.axis and sweep values")
    if task == "stats" and potential.kind != "free":
        raise ConfigError(f"{entries.where('task')}: cycle statistics need potential.kind = free")
    if task in ("timing", "levels") and potential.kind != "square_well":
        raise ConfigError(f"{entries.where('task')}: task {task} needs potential.kind = square_well")
    if task == "width" and potential.kind != "linear":
        raise ConfigError(f"{entries.where('task')}: task width needs potential.kind = linear")
    width_tol = values.get("width.tol", 0.01)
    if not 0 < width_tol < 0.5:
        raise ConfigError(f"{entries.where('width.tol')}: width.tol must lie in (0, 0.5)")
    samples = values.get("check.samples", 20)
    if samples < 1:
        raise ConfigError(f"{entries.where('check.samples')}: check.samples must be >= 1")
    return Scenario(task, potential, ctx, ms, level, grid, axis, sweep_values,
                    values.get("sweep.gap"), width_tol, samples, _canonical_hash(values), name)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        entries = parse_json(text, str(path))
    else:
        entries = parse_text(text, str(path))
    return build_scenario(entries, path.stem)
