"""Symmetric bound states of the finite square well and their timing observables."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import SquareWellPotential, basis_family, quantization_residual
from .core import Microstate, PhysicalContext
from .errors import DomainError, NoLevelError
from .specfun import find_root

__all__ = [
    "Level",
    "WellSpectrum",
    "TimingReport",
    "solve_symmetric_levels",
    "level_context",
    "dwell_time",
    "libration_period",
    "fractional_forbidden_time",
    "timing_report",
    "dwell_time_jacobi",
    "libration_period_jacobi",
    "place_level",
]


@dataclass(frozen=True)
class Level:
    n: int
    E: float
    k: float
    kappa: float
    U: float
    q: float

    @property
    def residual(self) -> float:
        return quantization_residual(self.k, self.kappa, self.q)

    @property
    def ratio(self) -> float:
        """kappa / k."""
        return self.kappa / self.k


@dataclass(frozen=True)
class WellSpectrum:
    U: float
    q: float
    levels: tuple[Level, ...]


@dataclass(frozen=True)
class TimingReport:
    t_plus_R: float
    t_minus_R: float
    t_libration: float
    fraction_forbidden: float


def _make_level(ctx: PhysicalContext, n: int, k: float, U: float, q: float) -> Level:
    E = (ctx.hbar * k) ** 2 / (2.0 * ctx.m)
    kappa = math.sqrt(2.0 * ctx.m * (U - E)) / ctx.hbar
    return Level(n, E, k, kappa, U, q)


def solve_symmetric_levels(ctx: PhysicalContext, U: float, q: float, max_levels: int | None = None) -> WellSpectrum:
    """All symmetric levels k tan(kq) = kappa, one per branch k q in (n pi, (n + 1/2) pi)."""
    SquareWellPotential(U, q)
    k_max = math.sqrt(2.0 * ctx.m * U) / ctx.hbar

    def mismatch(k):
        return k * math.sin(k * q) - math.sqrt(max(k_max * k_max - k * k, 0.0)) * math.cos(k * q)

    levels = []
    n = 0
    while n * math.pi < k_max * q and (max_levels is None or n < max_levels):
        lo = n * math.pi / q
        hi = min((n + 0.5) * math.pi / q, k_max)
        if n == 0:
            lo = 1e-300
        k = find_root(mismatch, lo, hi, tol=1e-15 * hi)
        if k >= k_max:
            break
        levels.append(_make_level(ctx, n, k, U, q))
        n += 1
    if not levels:
        raise NoLevelError(f"no symmetric level for U={U}, q={q}")
    return WellSpectrum(U, q, tuple(levels))


def level_context(ctx: PhysicalContext, level: Level) -> PhysicalContext:
    return ctx.with_energy(level.E)


def _check_denominator(value: float):
    if not value > 0:
        raise DomainError(f"timing denominator {value} is not positive")


def dwell_time(ctx: PhysicalContext, level: Level, ms: Microstate, side: int = 1) -> float:
    """Round-trip time beyond the wall at x = side * q.

    2 (ab - c^2/4)^{1/2} [1 + r^2] / [a + side c r + b r^2] * m / (hbar kappa k),
    r = kappa / k. Swapping side is equivalent to c -> -c.
    """
    if side not in (1, -1):
        raise DomainError("side must be +1 or -1")
    r = level.ratio
    denom = ms.a + side * ms.c * r + ms.b * r * r
    _check_denominator(denom)
    return 2.0 * math.sqrt(ms.det) * (1.0 + r * r) / denom * ctx.m / (ctx.hbar * level.kappa * level.k)


def libration_period(ctx: PhysicalContext, level: Level, ms: Microstate) -> float:
    r = level.ratio
    r2 = r * r
    denom = ms.a**2 + (2.0 * ms.a * ms.b - ms.c**2) * r2 + ms.b**2 * r2 * r2
    _check_denominator(denom)
    num = 4.0 * math.sqrt(ms.det) * (1.0 + r2) * (ms.a + ms.b * r2)
    return num / denom * ctx.m * (level.q + 1.0 / level.kappa) / (ctx.hbar * level.k)


def fractional_forbidden_time(ctx: PhysicalContext, level: Level) -> float:
    """hbar / (hbar + [2m(U - E)]^{1/2} q) = 1 / (kappa q + 1)."""
    return ctx.hbar / (ctx.hbar + math.sqrt(2.0 * ctx.m * (level.U - level.E)) * level.q)


def timing_report(ctx: PhysicalContext, level: Level, ms: Microstate) -> TimingReport:
    return TimingReport(
        dwell_time(ctx, level, ms, +1),
        dwell_time(ctx, level, ms, -1),
        libration_period(ctx, level, ms),
        fractional_forbidden_time(ctx, level),
    )


def _require_symmetric_microstate(ms: Microstate):
    if not (ms.a == ms.b and ms.c == 0.0):
        raise DomainError("trajectory-integral timing is implemented for a = b, c = 0 only")


def _far(level: Level, decay_lengths: float) -> float:
    return level.q + decay_lengths / level.kappa


def dwell_time_jacobi(ctx: PhysicalContext, level: Level, side: int = 1,
                      ms: Microstate = Microstate(1.0, 1.0, 0.0), decay_lengths: float = 40.0) -> float:
    """Dwell time from Jacobi's theorem along the forbidden-region trajectory.

    Twice t(x_far) - t(q), where x_far sits ``decay_lengths`` / kappa beyond
    the wall; the neglected tail is O(exp(-2 * decay_lengths)).
    """
    from .dynamics import trajectory_time

    _require_symmetric_microstate(ms)
    lctx = level_context(ctx, level)
    family = basis_family(SquareWellPotential(level.U, level.q), lctx, ms)
    wall, far = side * level.q, side * _far(level, decay_lengths)
    t = trajectory_time(family, np.array([wall, far]), lctx, ms)
    return 2.0 * abs(float(t[1] - t[0]))


def libration_period_jacobi(ctx: PhysicalContext, level: Level,
                            ms: Microstate = Microstate(1.0, 1.0, 0.0), decay_lengths: float = 40.0) -> float:
    """Twice the transit time from x = -infinity to +infinity."""
    from .dynamics import trajectory_time

    _require_symmetric_microstate(ms)
    lctx = level_context(ctx, level)
    family = basis_family(SquareWellPotential(level.U, level.q), lctx, ms)
    far = _far(level, decay_lengths)
    t = trajectory_time(family, np.array([-far, far]), lctx, ms)
    return 2.0 * float(t[1] - t[0])


def place_level(ctx: PhysicalContext, q: float, gap: float, E_target: float) -> Level:
    """Symmetric level of a well with fixed width q and fixed U - E = gap near E_target.

    With kappa fixed by the gap, k tan(kq) = kappa has one root per branch;
    the branch whose energy lies closest to ``E_target`` is returned.
    """
    if not (q > 0 and gap > 0 and E_target > 0):
        raise DomainError("place_level needs positive q, gap and E_target")
    kappa = math.sqrt(2.0 * ctx.m * gap) / ctx.hbar
    k_target = math.sqrt(2.0 * ctx.m * E_target) / ctx.hbar
    n_guess = int(math.floor(k_target * q / math.pi))
    best = None
    for n in (n_guess - 1, n_guess, n_guess + 1):
        if n < 0:
            continue
        lo = max(n * math.pi / q, 1e-300)
        hi = (n + 0.5) * math.pi / q
        k = find_root(lambda k: k * math.sin(k * q) - kappa * math.cos(k * q), lo, hi, tol=1e-15 * hi)
        E = (ctx.hbar * k) ** 2 / (2.0 * ctx.m)
        if best is None or abs(E - E_target) < abs(best[1] - E_target):
            best = (n, E, k)
    n, E, k = best
    return Level(n, E, k, kappa, E + gap, q)
