"""Trajectories from Jacobi's theorem, t - t0 = dW/dE.

The energy derivative is taken numerically on a basis family E -> (phi, theta)
at fixed (m, hbar, a, b, c). Pointwise derivatives use the integration
constant K = 0; branch jumps of the arctan are integer multiples of pi hbar,
constant in E, and drop out once neighbouring energies are compared through
the wrapped angle difference.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .basis import BasisPair, FreePotential, LinearPotential, basis_family, basis_free
from .core import Microstate, PhysicalContext, classical_reference
from .errors import DomainError
from .qshje import action_angle, free_phase, reduced_action
from .specfun import Quadrature, airy_arrays, find_root, numeric_derivative, periodic_mean

__all__ = [
    "Trajectory",
    "default_direction",
    "trajectory_time",
    "trajectory",
    "trajectory_time_linear_closed",
    "free_time_closed_form",
    "averaged_free_time",
    "principal_function",
    "averaged_free_action",
    "TransitionWidth",
    "transition_width",
    "ENERGY_STEP",
]

ENERGY_STEP = 1e-5
# Energy differencing leaves ~1e-11 relative noise; averages of Jacobi times
# cannot be pushed below that.
JACOBI_QUADRATURE = Quadrature(n_points=64, tol=1e-9)


@dataclass(frozen=True)
class Trajectory:
    samples: tuple[tuple[float, float], ...]
    ms: Microstate
    ctx: PhysicalContext
    potential: object


def default_direction(potential) -> int:
    """+1 for motion toward +x; -1 (receding from the turning point) for V = f x."""
    return -1 if potential.kind == "linear" else 1


def _jacobi(family: Callable[[float], BasisPair], x, E: float, hbar: float):
    x = np.asarray(x, dtype=float)
    psi0 = action_angle(family(E), x)

    # Only the wrapped offset from psi0 is differenced; psi0 itself is constant.
    def offset(e):
        return (action_angle(family(e), x) - psi0 + math.pi) % (2 * math.pi) - math.pi

    # ENERGY_STEP * E is the finest spacing, used by the Richardson fine pass.
    dpsi, _ = numeric_derivative(offset, E, order=1, h=2.0 * ENERGY_STEP * E)
    return hbar * np.asarray(dpsi)


def trajectory_time(family: Callable[[float], BasisPair], x, ctx: PhysicalContext, ms: Microstate,
                    x_ref: float | None = None, direction: int | None = None):
    """t - t0 at ``x`` from the numerical energy derivative of W.

    ``family`` maps an energy to a basis pair (see ``basis_family``). With
    ``x_ref`` the result is t(x) - t(x_ref). ``direction`` = +1 takes W_x > 0,
    -1 reverses the motion; the default follows ``default_direction``.
    """
    pot = family(ctx.E).potential
    sign = default_direction(pot) if direction is None else direction
    t = sign * _jacobi(family, x, ctx.E, ctx.hbar)
    if x_ref is not None:
        t = t - sign * _jacobi(family, np.array([x_ref]), ctx.E, ctx.hbar)[0]
    return float(t) if np.ndim(t) == 0 else t


def trajectory(potential, ctx: PhysicalContext, ms: Microstate, xs, x_ref: float | None = None) -> Trajectory:
    family = basis_family(potential, ctx, ms)
    xs = np.asarray(xs, dtype=float)
    ts = trajectory_time(family, xs, ctx, ms, x_ref=x_ref)
    return Trajectory(tuple(zip(xs.tolist(), np.atleast_1d(ts).tolist())), ms, ctx, potential)


def _airy_scale(ctx: PhysicalContext, f: float) -> float:
    return (2.0 * ctx.m * f / ctx.hbar**2) ** (1.0 / 3.0)


def trajectory_time_linear_closed(ctx: PhysicalContext, ms: Microstate, f: float, x):
    """Closed-form time for V = f x:

    (hbar^{1/3}/pi) (ab - c^2/4)^{1/2} (2m/f^2)^{1/3} / [a Ai^2 + b Bi^2 + c Ai Bi]
    at zeta = (2mf/hbar^2)^{1/3} (x - E/f).
    """
    if not f > 0:
        raise DomainError("f must be positive")
    zeta = _airy_scale(ctx, f) * (np.asarray(x, dtype=float) - ctx.E / f)
    ai, bi, _, _ = airy_arrays(zeta)
    quad = ms.a * ai * ai + ms.b * bi * bi + ms.c * ai * bi
    t = ctx.hbar ** (1.0 / 3.0) / math.pi * math.sqrt(ms.det) * (2.0 * ctx.m / f**2) ** (1.0 / 3.0) / quad
    return float(t) if np.ndim(t) == 0 else t


def free_time_closed_form(ctx: PhysicalContext, ms: Microstate, x):
    """(ab - c^2/4)^{1/2} (2m/E)^{1/2} x / [(a+b) + A^{1/2} cos(2kx - delta)]."""
    x = np.asarray(x, dtype=float)
    k = math.sqrt(2.0 * ctx.m * ctx.E) / ctx.hbar
    denom = (ms.a + ms.b) + math.sqrt(ms.amplitude_squared) * np.cos(2.0 * k * x - free_phase(ms))
    t = math.sqrt(ms.det) * math.sqrt(2.0 * ctx.m / ctx.E) * x / denom
    return float(t) if np.ndim(t) == 0 else t


def _free_period(ctx: PhysicalContext) -> float:
    return math.pi * ctx.hbar / math.sqrt(2.0 * ctx.m * ctx.E)


def averaged_free_time(ctx: PhysicalContext, ms: Microstate, x: float,
                       quad: Quadrature = JACOBI_QUADRATURE) -> float:
    """Cycle average of t - t0 with the numerator x held at its central value.

    The oscillating factor (t - t0)/x' is averaged over one period of the
    cosine in x' around ``x`` and multiplied by ``x``.
    """
    if x == 0.0:
        return 0.0
    family = basis_family(FreePotential(), ctx, ms)
    period = _free_period(ctx)

    def factor(xp):
        return _jacobi(family, xp, ctx.E, ctx.hbar) / xp

    # Nodes are offset by half a spacing from the window start to avoid x' = 0.
    start = x - 0.5 * period + 0.5 * period / quad.n_points
    return x * periodic_mean(factor, start, period, quad)


def principal_function(basis: BasisPair, x: float, t: float, x_ref: float = 0.0) -> float:
    """Hamilton's principal function S = W - E t with W anchored at ``x_ref``."""
    return reduced_action(basis, x, x_ref) - basis.ctx.E * t


def averaged_free_action(ctx: PhysicalContext, ms: Microstate, x: float,
                         quad: Quadrature = JACOBI_QUADRATURE) -> tuple[float, float, float]:
    """Cycle averages (<W>, <t - t0>, <S>) for the free particle around ``x``.

    W uses K = 0. Its linear trend hbar k x' is averaged exactly; the periodic
    remainder goes through the periodic rule.
    """
    basis = basis_free(ctx, ms)
    k = math.sqrt(2.0 * ctx.m * ctx.E) / ctx.hbar
    period = _free_period(ctx)
    start = x - 0.5 * period
    w_start = ctx.hbar * float(action_angle(basis, 0.0)) + reduced_action(basis, start, 0.0)
    psi_start = float(action_angle(basis, start))

    def periodic_part(xp):
        # The angle advances by exactly pi per period, so inside the window
        # its advance is the plain mod-2pi difference.
        advance = np.mod(action_angle(basis, xp) - psi_start, 2.0 * math.pi)
        return w_start + ctx.hbar * advance - ctx.hbar * k * xp

    # The remainder can average to zero; judge it against one pi hbar step.
    rem = periodic_mean(periodic_part, start, period, replace(quad, atol=quad.tol * math.pi * ctx.hbar))
    mean_w = ctx.hbar * k * x + rem
    mean_t = averaged_free_time(ctx, ms, x, quad)
    return mean_w, mean_t, mean_w - ctx.E * mean_t


@dataclass(frozen=True)
class TransitionWidth:
    """Allowed-side extent of the region where quantum and classical times differ."""

    x: float
    xi: float
    zeta: float
    tol_rel: float


def transition_width(ctx: PhysicalContext, f: float, tol_rel: float = 0.01, *,
                     zeta_min: float = -100.0, n_scan: int = 20001) -> TransitionWidth:
    """Width of the transitional neighbourhood on the allowed side of x_t = E/f.

    The width is the distance from the turning point to the outermost point
    where |t_quantum - t_classical| / t_classical > tol_rel for a = b, c = 0.
    It is reported in x, in xi = (2mf)^{1/3}(x - E/f), and in the Airy
    argument zeta = xi / hbar^{2/3}.
    """
    if not 0.0 < tol_rel < 0.5:
        raise DomainError("tol_rel must lie in (0, 0.5)")
    ms = Microstate(1.0, 1.0, 0.0)
    pot = LinearPotential(f)
    alpha = _airy_scale(ctx, f)
    x_t = ctx.E / f

    def excess(zeta):
        x = x_t + zeta / alpha
        t_q = trajectory_time_linear_closed(ctx, ms, f, x)
        _, t_c = classical_reference(ctx, pot, x)
        return abs(t_q - t_c) / t_c - tol_rel

    zetas = np.linspace(zeta_min, -1e-6, n_scan)
    xs = x_t + zetas / alpha
    t_q = trajectory_time_linear_closed(ctx, ms, f, xs)
    t_c = np.sqrt(2.0 * ctx.m * (ctx.E - f * xs)) / f
    over = np.abs(t_q - t_c) / t_c > tol_rel
    if not over.any():
        return TransitionWidth(0.0, 0.0, 0.0, tol_rel)
    i = int(np.argmax(over))
    if i == 0:
        raise DomainError(f"transitional region extends beyond zeta={zeta_min}")
    zeta_edge = find_root(excess, float(zetas[i - 1]), float(zetas[i]), tol=1e-13)
    width_zeta = -zeta_edge
    width_x = width_zeta / alpha
    return TransitionWidth(width_x, (2.0 * ctx.m * f) ** (1.0 / 3.0) * width_x, width_zeta, tol_rel)
