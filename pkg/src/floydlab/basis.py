"""Potentials and their pairs of independent Schrodinger solutions.

Every pair is built from a unit-Wronskian pair (u, v) and then both members
are multiplied by ``s = [2m / (hbar^2 (ab - c^2/4))]^{1/4}``, so that the
Wronskian of (phi, theta) squares to ``2m / [hbar^2 (ab - c^2/4)]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import Microstate, PhysicalContext
from .errors import DomainError, EigenvalueError, EvalError
from .specfun import airy_arrays

__all__ = [
    "FreePotential",
    "SquareWellPotential",
    "LinearPotential",
    "BasisPair",
    "basis_free",
    "basis_square_well",
    "basis_linear",
    "make_basis",
    "basis_family",
    "quantization_residual",
    "EIGEN_TOL",
]

EIGEN_TOL = 1e-8


@dataclass(frozen=True)
class FreePotential:
    kind = "free"

    def value(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def slope(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class SquareWellPotential:
    """V = U for |x| > q, 0 inside.

    The walls themselves count as inside, matching the branch the basis
    evaluators use there.
    """

    U: float
    q: float
    kind = "square_well"

    def __post_init__(self):
        if not (self.U > 0 and self.q > 0):
            raise DomainError(f"square well needs U > 0 and q > 0, got U={self.U}, q={self.q}")

    def value(self, x):
        return np.where(np.abs(np.asarray(x, dtype=float)) > self.q, self.U, 0.0)

    def slope(self, x):
        # Delta functions at +-q are excluded; callers stay off the interfaces.
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class LinearPotential:
    """V = f x, a constant force f > 0."""

    f: float
    kind = "linear"

    def __post_init__(self):
        if not self.f > 0:
            raise DomainError(f"linear potential needs f > 0, got {self.f}")

    def value(self, x):
        return self.f * np.asarray(x, dtype=float)

    def slope(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.f)

    def turning_point(self, E: float) -> float:
        return E / self.f


UnitPair = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class BasisPair:
    """(phi, theta) for one potential, energy and microstate normalization."""

    potential: object
    ms: Microstate
    ctx: PhysicalContext
    unit: UnitPair = field(repr=False, compare=False)

    @property
    def scale(self) -> float:
        return (2.0 * self.ctx.m / (self.ctx.hbar**2 * self.ms.det)) ** 0.25

    @property
    def wronskian(self) -> float:
        """Value the Wronskian phi theta' - phi' theta is normalized to."""
        return self.scale**2

    def evaluate(self, x):
        """phi, theta, phi', theta' at ``x`` (scalar or array)."""
        x = np.asarray(x, dtype=float)
        with np.errstate(over="raise", invalid="raise"):
            try:
                u, v, du, dv = self.unit(x)
            except FloatingPointError as exc:
                raise EvalError(f"basis overflow for {self.potential.kind} at x={x}") from exc
        s = self.scale
        return s * u, s * v, s * du, s * dv

    def g(self, x):
        """phi''/phi = 2m(V - E)/hbar^2."""
        return 2.0 * self.ctx.m * (self.potential.value(x) - self.ctx.E) / self.ctx.hbar**2

    def dg(self, x):
        return 2.0 * self.ctx.m * self.potential.slope(x) / self.ctx.hbar**2


def _wavenumber(ctx: PhysicalContext) -> float:
    return math.sqrt(2.0 * ctx.m * ctx.E) / ctx.hbar


def _free_unit(k: float) -> UnitPair:
    rk = math.sqrt(k)

    def unit(x):
        c, s = np.cos(k * x), np.sin(k * x)
        return c / rk, s / rk, -rk * s, rk * c

    return unit


def basis_free(ctx: PhysicalContext, ms: Microstate) -> BasisPair:
    """phi = [E(ab - c^2/4)]^{-1/4} cos(kx), theta the same with sin."""
    if not ctx.E > 0:
        raise DomainError(f"free particle needs E > 0, got {ctx.E}")
    return BasisPair(FreePotential(), ms, ctx, _free_unit(_wavenumber(ctx)))


def quantization_residual(k: float, kappa: float, q: float) -> float:
    """Normalized symmetric-level mismatch (k sin kq - kappa cos kq) / |(k, kappa)|."""
    return (k * math.sin(k * q) - kappa * math.cos(k * q)) / math.hypot(k, kappa)


def _square_well_unit(k: float, kappa: float, q: float, on_shell: bool) -> UnitPair:
    rk = math.sqrt(k)
    ckq, skq = math.cos(k * q), math.sin(k * q)
    if on_shell:
        # Exterior forms with the growing part of phi removed exactly.
        a_phi, b_phi = 0.0, ckq / rk
        a_th = 1.0 / (2.0 * skq * rk)
        b_th = -math.cos(2.0 * k * q) / (2.0 * skq * rk)
    else:
        # C1 continuation of the interior pair for energies off the spectrum.
        u_q, du_q = ckq / rk, -skq * rk
        v_q, dv_q = skq / rk, ckq * rk
        a_phi, b_phi = 0.5 * (u_q + du_q / kappa), 0.5 * (u_q - du_q / kappa)
        a_th, b_th = 0.5 * (v_q + dv_q / kappa), 0.5 * (v_q - dv_q / kappa)

    def unit(x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        inside = ax <= q
        sgn = np.where(x < 0, -1.0, 1.0)
        y = np.where(inside, 0.0, ax - q)
        grow = np.exp(kappa * y)
        decay = np.exp(-kappa * y)
        # Right-side exterior values; phi is even, theta odd.
        pe = a_phi * grow + b_phi * decay
        dpe = kappa * (a_phi * grow - b_phi * decay)
        te = a_th * grow + b_th * decay
        dte = kappa * (a_th * grow - b_th * decay)
        c, s = np.cos(k * x), np.sin(k * x)
        phi = np.where(inside, c / rk, pe)
        theta = np.where(inside, s / rk, sgn * te)
        dphi = np.where(inside, -rk * s, sgn * dpe)
        dtheta = np.where(inside, rk * c, dte)
        return phi, theta, dphi, dtheta

    return unit


def basis_square_well(ctx: PhysicalContext, ms: Microstate, U: float, q: float,
                      *, require_eigenvalue: bool = True) -> BasisPair:
    """Symmetric bound state phi and antisymmetric companion theta.

    With ``require_eigenvalue=False`` the interior pair is continued C1 through
    the walls at any energy in (0, U); on the spectrum this coincides with the
    bound-state pair and is what energy derivatives are taken on.
    """
    pot = SquareWellPotential(U, q)
    if not 0.0 < ctx.E < U:
        raise DomainError(f"square well needs 0 < E < U, got E={ctx.E}, U={U}")
    k = _wavenumber(ctx)
    kappa = math.sqrt(2.0 * ctx.m * (U - ctx.E)) / ctx.hbar
    if require_eigenvalue:
        res = quantization_residual(k, kappa, q)
        if abs(res) > EIGEN_TOL:
            raise EigenvalueError(f"E={ctx.E} is not a symmetric level (residual {res:.3g})")
    return BasisPair(pot, ms, ctx, _square_well_unit(k, kappa, q, on_shell=require_eigenvalue))


def _linear_unit(ctx: PhysicalContext, f: float) -> UnitPair:
    alpha = (2.0 * ctx.m * f / ctx.hbar**2) ** (1.0 / 3.0)
    x_t = ctx.E / f
    amp = math.sqrt(math.pi / alpha)
    damp = math.sqrt(math.pi * alpha)

    def unit(x):
        ai, bi, aip, bip = airy_arrays(alpha * (np.asarray(x, dtype=float) - x_t))
        return amp * ai, amp * bi, damp * aip, damp * bip

    return unit


def basis_linear(ctx: PhysicalContext, ms: Microstate, f: float) -> BasisPair:
    """phi proportional to Ai, theta to Bi of (2mf/hbar^2)^{1/3} (x - E/f)."""
    return BasisPair(LinearPotential(f), ms, ctx, _linear_unit(ctx, f))


def make_basis(potential, ctx: PhysicalContext, ms: Microstate, *, require_eigenvalue: bool = True) -> BasisPair:
    if potential.kind == "free":
        return basis_free(ctx, ms)
    if potential.kind == "square_well":
        return basis_square_well(ctx, ms, potential.U, potential.q, require_eigenvalue=require_eigenvalue)
    if potential.kind == "linear":
        return basis_linear(ctx, ms, potential.f)
    raise DomainError(f"unknown potential kind {potential.kind!r}")


def basis_family(potential, ctx: PhysicalContext, ms: Microstate) -> Callable[[float], BasisPair]:
    """E -> BasisPair at fixed (m, hbar, a, b, c), for energy derivatives."""

    def at(E: float) -> BasisPair:
        return make_basis(potential, ctx.with_energy(E), ms, require_eigenvalue=False)

    return at
