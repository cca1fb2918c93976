"""Physical parameters, microstate coefficients and initial values.

A microstate is the coefficient triple (a, b, c) of the quadratic form
``a*phi**2 + b*theta**2 + c*phi*theta`` that selects one particular solution of
the quantum stationary Hamilton-Jacobi equation at a given energy. The map
between (a, b, c) and the initial values ``[W_x(x0), W_xx(x0)]`` lives here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, EvalError, SingularError

__all__ = [
    "PhysicalContext",
    "Microstate",
    "InitialValues",
    "make_microstate",
    "microstate_to_initial_values",
    "microstate_from_initial_values",
    "classical_reference",
    "CONDITION_LIMIT",
]

# Largest acceptable condition number of the row-equilibrated 3x3 inversion system.
CONDITION_LIMIT = 1e8


@dataclass(frozen=True)
class PhysicalContext:
    """Mass, reduced Planck constant and energy in scaled units."""

    m: float = 1.0
    hbar: float = 1.0
    E: float = 0.5

    def __post_init__(self):
        for name in ("m", "hbar", "E"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not self.m > 0:
            raise DomainError(f"mass must be positive, got {self.m}")
        if not self.hbar > 0:
            raise DomainError(f"hbar must be positive, got {self.hbar}")

    def with_energy(self, E: float) -> "PhysicalContext":
        return replace(self, E=E)

    def with_hbar(self, hbar: float) -> "PhysicalContext":
        return replace(self, hbar=hbar)


@dataclass(frozen=True)
class Microstate:
    a: float
    b: float
    c: float

    def __post_init__(self):
        _validate_triple(self.a, self.b, self.c)

    @property
    def det(self) -> float:
        """ab - c^2/4, the determinant of the quadratic form."""
        return self.a * self.b - 0.25 * self.c * self.c

    @property
    def amplitude_squared(self) -> float:
        """A = (a - b)^2 + c^2, squared amplitude of the residual indeterminacy."""
        return (self.a - self.b) ** 2 + self.c**2

    @property
    def is_classical(self) -> bool:
        return self.a == self.b and self.c == 0.0

    def scaled(self, lam: float) -> "Microstate":
        return Microstate(lam * self.a, lam * self.b, lam * self.c)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)


@dataclass(frozen=True)
class InitialValues:
    x0: float
    Wx0: float
    Wxx0: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x0, self.Wx0, self.Wxx0)):
            raise DomainError("initial values must be finite")
        if self.Wx0 == 0.0:
            raise DomainError("W_x(x0) = 0 cannot belong to a microstate with ab - c^2/4 > 0")


def _validate_triple(a, b, c):
    if not all(math.isfinite(v) for v in (a, b, c)):
        raise DomainError("microstate coefficients must be finite")
    if not a > 0:
        raise DomainError(f"Microstate requires a > 0, got a={a}")
    if not b > 0:
        raise DomainError(f"Microstate requires b > 0, got b={b}")
    if not a * b - 0.25 * c * c > 0:
        raise DomainError(f"Microstate requires ab - c^2/4 > 0, got {a * b - 0.25 * c * c}")


def make_microstate(a: float, b: float, c: float) -> Microstate:
    return Microstate(float(a), float(b), float(c))


def _form_and_derivative(ms: Microstate, phi, theta, dphi, dtheta):
    q = ms.a * phi * phi + ms.b * theta * theta + ms.c * phi * theta
    dq = 2 * ms.a * phi * dphi + 2 * ms.b * theta * dtheta + ms.c * (dphi * theta + phi * dtheta)
    return q, dq


def microstate_to_initial_values(ms: Microstate, ctx: PhysicalContext, basis, x0: float) -> InitialValues:
    """W_x and W_xx at ``x0`` for microstate ``ms`` on ``basis``."""
    try:
        phi, theta, dphi, dtheta = (float(v) for v in basis.evaluate(x0))
    except (ArithmeticError, ValueError) as exc:
        raise EvalError(f"basis evaluation failed at x0={x0}: {exc}") from exc
    q, dq = _form_and_derivative(ms, phi, theta, dphi, dtheta)
    p = math.sqrt(2.0 * ctx.m)
    return InitialValues(float(x0), p / q, -p * dq / (q * q))


def microstate_from_initial_values(iv: InitialValues, ctx: PhysicalContext, basis) -> Microstate:
    """Recover (a, b, c) from ``[W_x(x0), W_xx(x0)]`` and the basis Wronskian.

    With Q = a phi^2 + b theta^2 + c phi theta, the initial values fix Q and Q'
    at x0, and the identity Q R - Q'^2/4 = (ab - c^2/4) Wr^2 with
    R = a phi'^2 + b theta'^2 + c phi' theta' fixes R once the Wronskian
    constraint Wr^2 = 2m / (hbar^2 (ab - c^2/4)) is imposed. The resulting
    3x3 system has determinant Wr^3 and is never exactly singular.
    """
    try:
        phi, theta, dphi, dtheta = (float(v) for v in basis.evaluate(iv.x0))
    except (ArithmeticError, ValueError) as exc:
        raise EvalError(f"basis evaluation failed at x0={iv.x0}: {exc}") from exc
    p = math.sqrt(2.0 * ctx.m)
    wr = phi * dtheta - dphi * theta
    det_target = 2.0 * ctx.m / (ctx.hbar**2 * wr * wr)
    q = p / iv.Wx0
    dq = -iv.Wxx0 * q * q / p
    r = (det_target * wr * wr + 0.25 * dq * dq) / q
    mat = np.array([
        [phi * phi, theta * theta, phi * theta],
        [2 * phi * dphi, 2 * theta * dtheta, dphi * theta + phi * dtheta],
        [dphi * dphi, dtheta * dtheta, dphi * dtheta],
    ])
    rhs = np.array([q, dq, r])
    # Conditioning is judged after row equilibration only: a, b, c are
    # commensurate, so a column that has become tiny (phi -> 0 deep in a
    # forbidden region) is a real loss of information, not a units artifact.
    row = 1.0 / np.max(np.abs(mat), axis=1)
    scaled = mat * row[:, None]
    cond = np.linalg.cond(scaled)
    if not cond < CONDITION_LIMIT:
        raise SingularError(f"initial-value system ill-conditioned at x0={iv.x0} (cond={cond:.3g})")
    col = 1.0 / np.max(np.abs(scaled), axis=0)
    sol = np.linalg.solve(scaled * col[None, :], rhs * row) * col
    a, b, c = (float(v) for v in sol)
    try:
        return Microstate(a, b, c)
    except DomainError as exc:
        raise DomainError(f"initial values {iv} do not correspond to a valid microstate: {exc}") from exc


def classical_reference(ctx: PhysicalContext, potential, x: float) -> tuple[float, float]:
    """Classical momentum and time for the same energy.

    V = 0 gives t - t0 = (m / 2E)^{1/2} x. For V = f x the time measured to the
    turning point, [2m(E - f x)]^{1/2} / f, is returned.
    """
    v = float(potential.value(x))
    if not ctx.E > v:
        raise DomainError(f"classically forbidden: E={ctx.E} <= V(x)={v}")
    wx = math.sqrt(2.0 * ctx.m * (ctx.E - v))
    if potential.kind == "linear":
        t = wx / potential.f
    elif v == 0.0:
        t = math.sqrt(ctx.m / (2.0 * ctx.E)) * x
    else:
        raise DomainError(f"no classical time reference for potential {potential.kind} at x={x}")
    return wx, t
