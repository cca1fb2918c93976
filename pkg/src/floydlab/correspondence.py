"""One-cycle statistics of the free-particle momentum and Bohr/Planck limit sweeps.

A limit is never taken pointwise here. Sweeps run over finite geometric grids
in E (growing) or hbar (shrinking) and report which normalized quantities
settle on classical values and which stay on a microstate-dependent plateau.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .basis import BasisPair, FreePotential, basis_free
from .core import Microstate, PhysicalContext
from .errors import ConfigError, DomainError
from .qshje import conjugate_momentum, schwarzian
from .specfun import Quadrature, periodic_mean

__all__ = [
    "CycleStats",
    "Envelope",
    "SweepScenario",
    "SweepPoint",
    "SweepResult",
    "cycle_stats",
    "closed_form_stats",
    "indeterminacy_envelope",
    "limit_sweep",
    "validate_grid",
    "PHASE_NOTE",
]

PHASE_NOTE = "cos(2kx - delta), delta = atan2(c, a - b)"
CYCLE_QUADRATURE = Quadrature(n_points=64, tol=1e-13)


@dataclass(frozen=True)
class CycleStats:
    mean_Wx: float
    mean_Wx2: float
    variance: float
    mean_quantum_potential: float
    # E - V - <W_x^2>/2m; must match the direct Schwarzian average.
    mean_quantum_potential_balance: float
    envelope_amplitude: float
    phase_note: str = PHASE_NOTE

    def dimensionless(self, ctx: PhysicalContext) -> dict[str, float]:
        """Momenta over (2mE)^{1/2}, energies over E."""
        p = math.sqrt(2.0 * ctx.m * ctx.E)
        return {
            "mean_Wx": self.mean_Wx / p,
            "mean_Wx2": self.mean_Wx2 / p**2,
            "variance": self.variance / p**2,
            "mean_quantum_potential": self.mean_quantum_potential / ctx.E,
            "envelope_amplitude": self.envelope_amplitude,
        }


@dataclass(frozen=True)
class Envelope:
    Wx_min: float
    Wx_max: float
    amplitude: float


def _require_free(basis: BasisPair):
    if basis.potential.kind != "free":
        raise DomainError("cycle statistics are defined for the free-particle basis")


def _period(ctx: PhysicalContext) -> float:
    return math.pi * ctx.hbar / math.sqrt(2.0 * ctx.m * ctx.E)


def cycle_stats(basis: BasisPair, ctx: PhysicalContext | None = None, ms: Microstate | None = None,
                quad: Quadrature = CYCLE_QUADRATURE) -> CycleStats:
    """Averages of W_x, W_x^2 and the quantum potential over one period pi/k."""
    _require_free(basis)
    ctx = ctx or basis.ctx
    ms = ms or basis.ms
    if ctx != basis.ctx or ms != basis.ms:
        raise DomainError("ctx and ms must match the basis they are averaged on")
    period = _period(ctx)
    mean_wx = periodic_mean(lambda x: conjugate_momentum(basis, x), 0.0, period, quad)
    mean_wx2 = periodic_mean(lambda x: conjugate_momentum(basis, x) ** 2, 0.0, period, quad)
    coeff = ctx.hbar**2 / (4.0 * ctx.m)
    # The quantum potential averages to zero for the classical microstate.
    qp_quad = Quadrature(quad.n_points, quad.tol, quad.max_points, atol=quad.tol * ctx.E)
    mean_qp = periodic_mean(lambda x: coeff * schwarzian(basis, x), 0.0, period, qp_quad)
    return CycleStats(
        mean_Wx=mean_wx,
        mean_Wx2=mean_wx2,
        variance=max(mean_wx2 - mean_wx * mean_wx, 0.0),
        mean_quantum_potential=mean_qp,
        mean_quantum_potential_balance=ctx.E - mean_wx2 / (2.0 * ctx.m),
        envelope_amplitude=math.sqrt(ms.amplitude_squared),
    )


def closed_form_stats(ctx: PhysicalContext, ms: Microstate) -> CycleStats:
    """The same statistics from the closed forms of the one-cycle integrals."""
    two_mE = 2.0 * ctx.m * ctx.E
    root = math.sqrt(4.0 * ms.a * ms.b - ms.c**2)
    mean_wx2 = two_mE * (ms.a + ms.b) / root
    variance = two_mE * ((ms.a + ms.b) - root) / root
    qp = ctx.E * (1.0 - 0.5 * (ms.a + ms.b) / math.sqrt(ms.det))
    return CycleStats(math.sqrt(two_mE), mean_wx2, variance, qp, qp, math.sqrt(ms.amplitude_squared))


def indeterminacy_envelope(basis: BasisPair, ctx: PhysicalContext | None = None,
                           ms: Microstate | None = None, n_grid: int = 512) -> Envelope:
    """Extremes of W_x over one period, located on a grid and then polished."""
    _require_free(basis)
    ms = ms or basis.ms
    period = _period(ctx or basis.ctx)
    xs = np.linspace(0.0, period, n_grid, endpoint=False)
    wx = conjugate_momentum(basis, xs)
    step = period / n_grid

    def polish(i, sign):
        # sign = +1 refines a minimum, -1 a maximum
        res = minimize_scalar(lambda x: sign * float(conjugate_momentum(basis, x)),
                              bounds=(xs[i] - step, xs[i] + step), method="bounded",
                              options={"xatol": 1e-12 * period})
        return sign * min(sign * float(wx[i]), float(res.fun))

    lo = polish(int(np.argmin(wx)), 1.0)
    hi = polish(int(np.argmax(wx)), -1.0)
    return Envelope(lo, hi, math.sqrt(ms.amplitude_squared))


@dataclass(frozen=True)
class SweepScenario:
    """What a sweep point is built from: a potential, a base context and a microstate.

    ``level`` picks the square-well level for hbar sweeps. ``gap`` is the
    fixed U - E of a square-well E sweep (well depth follows the energy).
    """

    potential: object
    ctx: PhysicalContext
    ms: Microstate
    level: int = 0
    gap: float | None = None


@dataclass(frozen=True)
class SweepPoint:
    value: float
    metrics: dict = field(hash=False)


@dataclass(frozen=True)
class SweepResult:
    axis: str
    grid: tuple[float, ...]
    points: tuple[SweepPoint, ...]
    diagnostics: dict = field(hash=False)

    def column(self, name: str) -> np.ndarray:
        return np.array([p.metrics[name] for p in self.points])


def validate_grid(axis: str, grid) -> tuple[float, ...]:
    if axis not in ("E", "hbar"):
        raise ConfigError(f"sweep.axis must be 'E' or 'hbar', got {axis!r}")
    values = tuple(float(v) for v in grid)
    if len(values) < 4:
        raise ConfigError(f"sweep grid needs at least 4 points, got {len(values)}")
    if not all(math.isfinite(v) and v > 0 for v in values):
        raise ConfigError("sweep grid values must be finite and positive")
    diffs = np.diff(values)
    if axis == "E" and not np.all(diffs > 0):
        raise ConfigError("an E sweep grid must be strictly increasing")
    if axis == "hbar" and not np.all(diffs < 0):
        raise ConfigError("an hbar sweep grid must be strictly decreasing")
    if max(values) / min(values) < 100.0 * (1.0 - 1e-12):
        raise ConfigError("sweep grid must span at least two decades")
    return values


def _point_context(scenario: SweepScenario, axis: str, value: float) -> PhysicalContext:
    return scenario.ctx.with_energy(value) if axis == "E" else scenario.ctx.with_hbar(value)


def _free_point(scenario: SweepScenario, ctx: PhysicalContext) -> dict:
    basis = basis_free(ctx, scenario.ms)
    stats = cycle_stats(basis)
    env = indeterminacy_envelope(basis)
    p = math.sqrt(2.0 * ctx.m * ctx.E)
    metrics = {"E": ctx.E, "hbar": ctx.hbar, "k": p / ctx.hbar}
    metrics.update({f"{k}_ratio" if k != "envelope_amplitude" else k: v
                    for k, v in stats.dimensionless(ctx).items()})
    metrics["qp_balance_ratio"] = stats.mean_quantum_potential_balance / ctx.E
    metrics["Wx_min_ratio"] = env.Wx_min / p
    metrics["Wx_max_ratio"] = env.Wx_max / p
    metrics["momentum_deviation"] = max(env.Wx_max / p - 1.0, 1.0 - env.Wx_min / p)
    return metrics


def _square_well_point(scenario: SweepScenario, axis: str, ctx: PhysicalContext) -> dict:
    from .squarewell import fractional_forbidden_time, place_level, solve_symmetric_levels, timing_report

    pot = scenario.potential
    if axis == "E":
        gap = scenario.gap if scenario.gap is not None else 0.5 * pot.U
        level = place_level(ctx, pot.q, gap, ctx.E)
    else:
        spectrum = solve_symmetric_levels(ctx, pot.U, pot.q, max_levels=scenario.level + 1)
        if len(spectrum.levels) <= scenario.level:
            raise DomainError(f"level {scenario.level} does not exist at hbar={ctx.hbar}")
        level = spectrum.levels[scenario.level]
    report = timing_report(ctx, level, scenario.ms)
    return {
        "E": level.E,
        "hbar": ctx.hbar,
        "U": level.U,
        "n": level.n,
        "k": level.k,
        "kappa": level.kappa,
        "fraction_forbidden": report.fraction_forbidden,
        "fraction_closed": fractional_forbidden_time(ctx, level),
        "t_plus_R": report.t_plus_R,
        "t_minus_R": report.t_minus_R,
        "t_libration": report.t_libration,
    }


def _linear_point(scenario: SweepScenario, ctx: PhysicalContext) -> dict:
    from .dynamics import transition_width

    w = transition_width(ctx, scenario.potential.f, 0.01)
    return {"E": ctx.E, "hbar": ctx.hbar, "width_x": w.x, "width_xi": w.xi, "width_zeta": w.zeta}


def _evaluate(scenario: SweepScenario, axis: str, value: float) -> SweepPoint:
    ctx = _point_context(scenario, axis, value)
    kind = scenario.potential.kind
    if kind == "free":
        metrics = _free_point(scenario, ctx)
    elif kind == "square_well":
        metrics = _square_well_point(scenario, axis, ctx)
    elif kind == "linear":
        metrics = _linear_point(scenario, ctx)
    else:
        raise DomainError(f"unknown potential kind {kind!r}")
    return SweepPoint(value, metrics)


def _spread(values) -> float:
    values = np.asarray(values, dtype=float)
    scale = max(float(np.max(np.abs(values))), 1e-300)
    return float(np.ptp(values)) / scale if np.ptp(values) > 0 else 0.0


def _diagnostics(kind: str, axis: str, result_points, ms: Microstate) -> dict:
    col = lambda name: np.array([p.metrics[name] for p in result_points])
    if kind == "free":
        mean_dev = float(np.max(np.abs(col("mean_Wx_ratio") - 1.0)))
        var = col("variance_ratio")
        return {
            "mean_Wx_ratio_max_deviation": mean_dev,
            "variance_ratio_min": float(var.min()),
            "variance_ratio_max": float(var.max()),
            "variance_ratio_spread": _spread(var),
            "qp_two_way_max_difference": float(np.max(np.abs(col("mean_quantum_potential_ratio")
                                                             - col("qp_balance_ratio")))),
            "approaches_classical": "mean_Wx",
            "persists": "" if ms.is_classical else "variance mean_quantum_potential envelope",
        }
    if kind == "square_well":
        frac = col("fraction_forbidden")
        d = np.diff(frac)
        return {
            "fraction_first": float(frac[0]),
            "fraction_last": float(frac[-1]),
            "fraction_spread": _spread(frac),
            "fraction_monotone_decreasing": bool(np.all(d < 0)),
        }
    xi = col("width_xi")
    wx = col("width_x")
    return {
        "width_xi_spread": _spread(xi),
        "width_x_first": float(wx[0]),
        "width_x_last": float(wx[-1]),
    }


def limit_sweep(axis: str, grid, scenario: SweepScenario, threads: int = 1) -> SweepResult:
    """Evaluate the scenario at every grid value, optionally on a thread pool.

    Results are merged in grid order whatever the pool size.
    """
    values = validate_grid(axis, grid)
    if threads < 1:
        raise ConfigError("threads must be at least 1")
    if threads == 1:
        points = tuple(_evaluate(scenario, axis, v) for v in values)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = tuple(pool.map(lambda v: _evaluate(scenario, axis, v), values))
    diag = _diagnostics(scenario.potential.kind, axis, points, scenario.ms)
    return SweepResult(axis, values, points, diag)
