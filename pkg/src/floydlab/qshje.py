"""Reduced action, conjugate momentum and the Schwarzian derivative.

For a basis pair (phi, theta) and microstate (a, b, c),

    W_x = (2m)^{1/2} / Q,    Q = a phi^2 + b theta^2 + c phi theta,

and W is hbar times the continuous angle of the vector
(sqrt(ab - c^2/4) phi, b theta + c phi / 2). Higher derivatives of W are
analytic: phi'' = g phi with g = 2m(V - E)/hbar^2 removes every second
derivative of the basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import BasisPair
from .core import Microstate, PhysicalContext
from .errors import UnwrapError
from .specfun import numeric_derivative

__all__ = [
    "QshjePoint",
    "qshje_point",
    "conjugate_momentum",
    "action_angle",
    "reduced_action",
    "schwarzian",
    "schwarzian_fd",
    "qshje_residual",
    "residual_scale",
    "free_momentum_closed_form",
    "free_phase",
]


@dataclass(frozen=True)
class QshjePoint:
    x: float
    W: float
    Wx: float
    Wxx: float
    Wxxx: float
    schwarzian: float
    residual: float


def _forms(basis: BasisPair, x):
    ms = basis.ms
    phi, theta, dphi, dtheta = basis.evaluate(x)
    q = ms.a * phi * phi + ms.b * theta * theta + ms.c * phi * theta
    dq = 2 * ms.a * phi * dphi + 2 * ms.b * theta * dtheta + ms.c * (dphi * theta + phi * dtheta)
    r = ms.a * dphi * dphi + ms.b * dtheta * dtheta + ms.c * dphi * dtheta
    g = basis.g(x)
    d2q = 2.0 * r + 2.0 * g * q
    d3q = 4.0 * g * dq + 2.0 * basis.dg(x) * q
    return q, dq, d2q, d3q


def _momentum_derivatives(basis: BasisPair, x):
    q, dq, d2q, _ = _forms(basis, x)
    p = math.sqrt(2.0 * basis.ctx.m)
    wx = p / q
    wxx = -p * dq / (q * q)
    wxxx = p * (2.0 * dq * dq / q**3 - d2q / (q * q))
    return wx, wxx, wxxx


def conjugate_momentum(basis: BasisPair, x):
    """W_x = (2m)^{1/2} (a phi^2 + b theta^2 + c phi theta)^{-1}."""
    q = _forms(basis, x)[0]
    return math.sqrt(2.0 * basis.ctx.m) / q


def schwarzian(basis: BasisPair, x):
    """<W; x> = W_xxx / W_x - (3/2)(W_xx / W_x)^2, analytically."""
    wx, wxx, wxxx = _momentum_derivatives(basis, x)
    return wxxx / wx - 1.5 * (wxx / wx) ** 2


def schwarzian_fd(basis: BasisPair, x: float) -> float:
    """Schwarzian from finite differences of W_x alone (independent path)."""
    f = lambda t: float(conjugate_momentum(basis, t))
    wx = f(x)
    scale = 1.0 / max(abs(_wavelength_scale(basis, x)), 1e-300)
    wxx, _ = numeric_derivative(f, x, order=1, h=1e-3 * scale)
    wxxx, _ = numeric_derivative(f, x, order=2, h=2e-2 * scale)
    return wxxx / wx - 1.5 * (wxx / wx) ** 2


def _wavelength_scale(basis: BasisPair, x: float) -> float:
    """Local inverse length, |g|^{1/2} or the Airy scale, used to size FD steps."""
    g = abs(float(basis.g(x)))
    if basis.potential.kind == "linear":
        alpha = (2.0 * basis.ctx.m * basis.potential.f / basis.ctx.hbar**2) ** (1.0 / 3.0)
        return max(math.sqrt(g), alpha)
    return math.sqrt(g) if g > 0 else 1.0


def qshje_residual(basis: BasisPair, x):
    """W_x^2/2m + V - E + (hbar^2/4m) <W; x>; zero for an exact solution."""
    ctx = basis.ctx
    wx, wxx, wxxx = _momentum_derivatives(basis, x)
    schw = wxxx / wx - 1.5 * (wxx / wx) ** 2
    return wx * wx / (2.0 * ctx.m) + basis.potential.value(x) - ctx.E + ctx.hbar**2 / (4.0 * ctx.m) * schw


def residual_scale(basis: BasisPair, x):
    """max(E, |V - E|), the energy scale residuals are judged against."""
    return np.maximum(basis.ctx.E, np.abs(basis.potential.value(x) - basis.ctx.E))


def action_angle(basis: BasisPair, x):
    """Principal angle psi with tan psi = (b theta/phi + c/2) / (ab - c^2/4)^{1/2}."""
    ms = basis.ms
    phi, theta, _, _ = basis.evaluate(x)
    return np.arctan2(ms.b * theta + 0.5 * ms.c * phi, math.sqrt(ms.det) * phi)


def _wrap(d):
    return (d + math.pi) % (2.0 * math.pi) - math.pi


def reduced_action(basis: BasisPair, x: float, x_ref: float = 0.0, *,
                   max_points: int = 1 << 22, tol: float = 1e-9) -> float:
    """W(x) - W(x_ref), unwrapped so that dW/dx = W_x > 0 along the path.

    The angle is sampled on a uniform grid that is refined until every step
    advances it by less than pi/4, both as observed and as predicted by the
    local momentum; the wrapped increments are then summed exactly.
    """
    x, x_ref = float(x), float(x_ref)
    if x == x_ref:
        return 0.0
    hbar = basis.ctx.hbar
    n = 64
    while n <= max_points:
        grid = np.linspace(x_ref, x, n + 1)
        psi = action_angle(basis, grid)
        d = _wrap(np.diff(psi)) * math.copysign(1.0, x - x_ref)
        step = abs(x - x_ref) / n
        predicted = np.max(np.abs(conjugate_momentum(basis, grid))) * step / hbar
        if d.max() <= math.pi / 4 and predicted <= math.pi / 4:
            if d.min() < -tol:
                raise UnwrapError(f"reduced action decreases by {-d.min():.3g} rad on [{x_ref}, {x}]")
            return hbar * math.copysign(float(np.sum(d)), x - x_ref)
        n *= 2
    raise UnwrapError(f"could not resolve the action angle on [{x_ref}, {x}] with {max_points} points")


def qshje_point(basis: BasisPair, x: float, x_ref: float = 0.0) -> QshjePoint:
    wx, wxx, wxxx = (float(v) for v in _momentum_derivatives(basis, x))
    schw = wxxx / wx - 1.5 * (wxx / wx) ** 2
    ctx = basis.ctx
    res = wx * wx / (2 * ctx.m) + float(basis.potential.value(x)) - ctx.E + ctx.hbar**2 / (4 * ctx.m) * schw
    return QshjePoint(float(x), reduced_action(basis, x, x_ref), wx, wxx, wxxx, schw, res)


def free_phase(ms: Microstate) -> float:
    """Phase delta of the free-particle oscillation cos(2kx - delta).

    Direct evaluation of W_x at x = 0 fixes delta = atan2(c, a - b).
    """
    return math.atan2(ms.c, ms.a - ms.b)


def free_momentum_closed_form(ctx: PhysicalContext, ms: Microstate, x):
    """2(2mE)^{1/2}(ab - c^2/4)^{1/2} / [(a+b) + A^{1/2} cos(2kx - delta)]."""
    k = math.sqrt(2.0 * ctx.m * ctx.E) / ctx.hbar
    amp = math.sqrt(ms.amplitude_squared)
    num = 2.0 * math.sqrt(2.0 * ctx.m * ctx.E) * math.sqrt(ms.det)
    return num / ((ms.a + ms.b) + amp * np.cos(2.0 * k * np.asarray(x, dtype=float) - free_phase(ms)))
