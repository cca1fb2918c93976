"""Special functions and numerical kernels.

Airy functions of real argument, finite-difference derivatives with Richardson
extrapolation, equispaced periodic averaging, and bracketed root finding.
Everything here is a pure function of its arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as _integrate
from scipy import optimize as _optimize

from .errors import AiryOverflowError, BracketError, DomainError, QuadratureError, StepError

__all__ = [
    "AiryValues",
    "Quadrature",
    "airy_eval",
    "airy_arrays",
    "cycle_average",
    "periodic_mean",
    "integrate",
    "numeric_derivative",
    "find_root",
]

# Airy branch boundaries. |z| <= SERIES_LIMIT uses the Maclaurin series,
# |z| >= ASYMPTOTIC_LIMIT the large-argument expansions. In between the Airy
# ODE is continued by Taylor steps from whichever anchor is stable for the
# solution being propagated.
SERIES_LIMIT = 4.5
# Ai loses digits to cancellation in the series for z > 0; stop sooner there.
AI_SERIES_POSITIVE_LIMIT = 2.0
ASYMPTOTIC_LIMIT = 10.0
MAX_ABS_ARGUMENT = 200.0
_TAYLOR_STEP = 0.35

_AI0 = 1.0 / (3.0 ** (2.0 / 3.0) * math.gamma(2.0 / 3.0))
_AIP0 = -1.0 / (3.0 ** (1.0 / 3.0) * math.gamma(1.0 / 3.0))
_BI0 = 1.0 / (3.0 ** (1.0 / 6.0) * math.gamma(2.0 / 3.0))
_BIP0 = 3.0 ** (1.0 / 6.0) / math.gamma(1.0 / 3.0)
_LOG_FLOAT_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class AiryValues:
    ai: float
    bi: float
    ai_prime: float
    bi_prime: float

    @property
    def wronskian(self) -> float:
        return self.ai * self.bi_prime - self.ai_prime * self.bi


@dataclass(frozen=True)
class Quadrature:
    """Settings for the equispaced periodic rule."""

    n_points: int = 64
    tol: float = 1e-12
    max_points: int = 1 << 18
    atol: float = 0.0

    def __post_init__(self):
        if self.n_points < 16:
            raise DomainError("Quadrature needs n_points >= 16")
        if not self.tol > 0:
            raise DomainError("Quadrature tol must be positive")


def _asymptotic_coefficients(n: int) -> tuple[np.ndarray, np.ndarray]:
    u = np.empty(n)
    v = np.empty(n)
    u[0] = v[0] = 1.0
    for k in range(1, n):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
        v[k] = -u[k] * (6 * k + 1) / (6 * k - 1)
    return u, v


_U, _V = _asymptotic_coefficients(60)


def _asymptotic_sums(zeta: np.ndarray, coeffs: np.ndarray, alternate: bool):
    """Even/odd partial sums of sum_k s_k c_k zeta^-k, truncated at the smallest term.

    Returns (full, even, odd) where full uses sign (-1)^k when `alternate`.
    The even/odd parts carry the (-1)^j factors of the oscillatory forms.
    """
    full = np.zeros_like(zeta)
    even = np.zeros_like(zeta)
    odd = np.zeros_like(zeta)
    live = np.ones(zeta.shape, dtype=bool)
    prev = np.full(zeta.shape, np.inf)
    inv = 1.0 / zeta
    power = np.ones_like(zeta)
    for k in range(len(coeffs)):
        term = coeffs[k] * power
        mag = np.abs(term)
        live &= mag < prev
        if not live.any():
            break
        sign_full = (-1.0) ** k if alternate else 1.0
        sign_split = (-1.0) ** (k // 2)
        full = np.where(live, full + sign_full * term, full)
        if k % 2 == 0:
            even = np.where(live, even + sign_split * term, even)
        else:
            odd = np.where(live, odd + sign_split * term, odd)
        live &= mag > 1e-18
        prev = mag
        power = power * inv
    return full, even, odd


def _airy_negative_asymptotic(z: np.ndarray):
    x = -z
    zeta = 2.0 / 3.0 * x**1.5
    _, ue, uo = _asymptotic_sums(zeta, _U, alternate=False)
    _, ve, vo = _asymptotic_sums(zeta, _V, alternate=False)
    chi = zeta - math.pi / 4.0
    s, c = np.sin(chi), np.cos(chi)
    pre = 1.0 / (math.sqrt(math.pi) * x**0.25)
    dpre = x**0.25 / math.sqrt(math.pi)
    ai = pre * (c * ue + s * uo)
    bi = pre * (-s * ue + c * uo)
    aip = dpre * (s * ve - c * vo)
    bip = dpre * (c * ve + s * vo)
    return ai, bi, aip, bip


def _airy_positive_asymptotic(z: np.ndarray):
    zeta = 2.0 / 3.0 * z**1.5
    ua, _, _ = _asymptotic_sums(zeta, _U, alternate=True)
    va, _, _ = _asymptotic_sums(zeta, _V, alternate=True)
    ub, _, _ = _asymptotic_sums(zeta, _U, alternate=False)
    vb, _, _ = _asymptotic_sums(zeta, _V, alternate=False)
    q = z**0.25
    decay = np.exp(-zeta)
    grow = np.exp(zeta)
    sp = math.sqrt(math.pi)
    ai = decay / (2.0 * sp * q) * ua
    aip = -q * decay / (2.0 * sp) * va
    bi = grow / (sp * q) * ub
    bip = q * grow / sp * vb
    return ai, bi, aip, bip


def _taylor_step(z0, y, dy, h):
    """Advance a solution of y'' = z y from z0 to z0 + h by its Taylor series."""
    c0, c1 = y, dy
    val = c0 + c1 * h
    der = c1.copy()
    cm1 = np.zeros_like(y)  # c_{-1}
    cn, cn1 = c0, c1  # c_n, c_{n+1}
    hp = h.copy()  # h^(n+1)
    n = 0
    quiet = 0
    while n < 400:
        c_next = (z0 * cn + cm1) / ((n + 2) * (n + 1))  # c_{n+2}
        der_term = (n + 2) * c_next * hp
        hp = hp * h
        val_term = c_next * hp
        val = val + val_term
        der = der + der_term
        scale = np.maximum(np.abs(val), np.abs(der)) + 1e-300
        if np.all(np.abs(val_term) <= 1e-18 * scale) and np.all(np.abs(der_term) <= 1e-18 * scale):
            quiet += 1
            if quiet >= 3:
                break
        else:
            quiet = 0
        cm1, cn, cn1 = cn, cn1, c_next
        n += 1
    return val, der


def _continue(z_start, y, dy, z_target):
    """Carry (y, y') from z_start to each z_target with equal Taylor steps."""
    span = np.max(np.abs(z_target - z_start)) if z_target.size else 0.0
    n_steps = max(1, int(math.ceil(span / _TAYLOR_STEP)))
    h = (z_target - z_start) / n_steps
    z = np.full_like(z_target, z_start)
    y = np.full_like(z_target, y)
    dy = np.full_like(z_target, dy)
    for _ in range(n_steps):
        y, dy = _taylor_step(z, y, dy, h)
        z = z + h
    return y, dy


def _series(z):
    zero = np.zeros_like(z)
    ai, aip = _taylor_step(zero, np.full_like(z, _AI0), np.full_like(z, _AIP0), z)
    bi, bip = _taylor_step(zero, np.full_like(z, _BI0), np.full_like(z, _BIP0), z)
    return ai, bi, aip, bip


def airy_arrays(z):
    """Vectorized Ai, Bi, Ai', Bi' for real arguments.

    Returns four arrays with the shape of ``z``.
    """
    z = np.asarray(z, dtype=float)
    shape = z.shape
    z = z.ravel()
    if not np.all(np.isfinite(z)):
        raise DomainError("Airy argument must be finite")
    if np.any(np.abs(z) > MAX_ABS_ARGUMENT):
        raise DomainError(f"Airy argument outside |z| <= {MAX_ABS_ARGUMENT}")
    pos = z[z > 0]
    if pos.size:
        zmax = pos.max()
        log_bi = 2.0 / 3.0 * zmax**1.5 + 0.25 * math.log(zmax)
        if log_bi > _LOG_FLOAT_MAX:
            raise AiryOverflowError(f"Bi({zmax}) exceeds the float range")

    ai = np.empty_like(z)
    bi = np.empty_like(z)
    aip = np.empty_like(z)
    bip = np.empty_like(z)

    def put(mask, vals):
        ai[mask], bi[mask], aip[mask], bip[mask] = vals

    m = np.abs(z) <= SERIES_LIMIT
    if m.any():
        put(m, _series(z[m]))

    m = z <= -ASYMPTOTIC_LIMIT
    if m.any():
        put(m, _airy_negative_asymptotic(z[m]))
    m = z >= ASYMPTOTIC_LIMIT
    if m.any():
        put(m, _airy_positive_asymptotic(z[m]))

    m = (z < -SERIES_LIMIT) & (z > -ASYMPTOTIC_LIMIT)
    if m.any():
        s = _series(np.array([-SERIES_LIMIT]))
        a, ap = _continue(-SERIES_LIMIT, s[0][0], s[2][0], z[m])
        b, bp = _continue(-SERIES_LIMIT, s[1][0], s[3][0], z[m])
        put(m, (a, b, ap, bp))

    # Ai is stable integrated toward decreasing z, Bi toward increasing z.
    m = (z > AI_SERIES_POSITIVE_LIMIT) & (z < ASYMPTOTIC_LIMIT)
    if m.any():
        anchor = _airy_positive_asymptotic(np.array([ASYMPTOTIC_LIMIT]))
        ai[m], aip[m] = _continue(ASYMPTOTIC_LIMIT, anchor[0][0], anchor[2][0], z[m])
    m = (z > SERIES_LIMIT) & (z < ASYMPTOTIC_LIMIT)
    if m.any():
        s = _series(np.array([SERIES_LIMIT]))
        bi[m], bip[m] = _continue(SERIES_LIMIT, s[1][0], s[3][0], z[m])

    return ai.reshape(shape), bi.reshape(shape), aip.reshape(shape), bip.reshape(shape)


def airy_eval(z: float) -> AiryValues:
    """Ai, Bi and their derivatives at a real point."""
    ai, bi, aip, bip = airy_arrays(np.array([float(z)]))
    return AiryValues(float(ai[0]), float(bi[0]), float(aip[0]), float(bip[0]))


def periodic_mean(f: Callable, start: float, period: float, quad: Quadrature = Quadrature()) -> float:
    """Mean of a smooth periodic ``f`` over ``[start, start + period)``.

    The equispaced trapezoid rule converges geometrically for analytic
    periodic integrands; the node count doubles until two successive
    estimates agree to ``quad.tol`` (relative) plus ``quad.atol``.
    """
    if not period > 0:
        raise DomainError("period must be positive")
    n = quad.n_points
    nodes = start + period * np.arange(n) / n
    est = float(np.mean(f(nodes)))
    while n < quad.max_points:
        # Doubling reuses the old nodes; only the midpoints are new.
        mids = start + period * (np.arange(n) + 0.5) / n
        new = 0.5 * (est + float(np.mean(f(mids))))
        n *= 2
        if not math.isfinite(new):
            raise QuadratureError("non-finite integrand on the period")
        if abs(new - est) <= quad.tol * abs(new) + quad.atol:
            return new
        est = new
    raise QuadratureError(f"periodic rule did not reach tol={quad.tol} with {n} points")


def cycle_average(f: Callable, period: float, order: int = 1, start: float = 0.0,
                  quad: Quadrature = Quadrature()) -> float:
    """(1/period) * integral over one period of f**order."""
    if order not in (1, 2):
        raise DomainError("order must be 1 or 2")
    if order == 1:
        return periodic_mean(f, start, period, quad)
    return periodic_mean(lambda x: np.asarray(f(x)) ** 2, start, period, quad)


def integrate(f: Callable, a: float, b: float, tol: float = 1e-10) -> float:
    """Adaptive Gauss-Kronrod integral of a scalar function on [a, b]."""
    val, err, info = _integrate.quad(f, a, b, epsabs=0.0, epsrel=tol, limit=1000, full_output=True)[:3]
    if not math.isfinite(val) or err > 10 * tol * max(abs(val), 1e-300):
        raise QuadratureError(f"quad reached only err={err:.3g} on [{a}, {b}]")
    return float(val)


_STENCILS = {
    1: (np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0, 4),
    2: (np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0, 4),
    3: (np.array([-1.0, 2.0, 0.0, -2.0, 1.0]) / 2.0, 2),
}
_OFFSETS = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
_DEFAULT_STEP = {1: 1e-5, 2: 1e-3, 3: 1e-2}


def numeric_derivative(f: Callable[[float], float], x: float, order: int = 1,
                       h: float | None = None) -> tuple[float, float]:
    """Five-point central difference of order 1-3, Richardson-extrapolated.

    ``f`` may return an array (one derivative per component). Returns
    ``(estimate, error_estimate)``. The default step is
    ``c * max(1, |x|)`` with c = 1e-5, 1e-3, 1e-2 for orders 1, 2, 3.
    """
    if order not in _STENCILS:
        raise DomainError("order must be 1, 2 or 3")
    if h is None:
        h = _DEFAULT_STEP[order] * max(1.0, abs(x))
    if not h > 0:
        raise StepError("step must be positive")
    if x + 0.5 * h == x:
        raise StepError(f"step {h} underflows relative to x={x}")
    # make x + h exactly representable so the stencil offsets carry no rounding
    h = (x + h) - x
    weights, accuracy = _STENCILS[order]

    def stencil(step):
        vals = np.array([f(x + o * step) for o in _OFFSETS], dtype=float)
        return np.tensordot(weights, vals, axes=1) / step**order

    coarse = stencil(h)
    fine = stencil(0.5 * h)
    factor = 2.0**accuracy
    best = (factor * fine - coarse) / (factor - 1.0)
    err = np.abs(fine - coarse) / (factor - 1.0)
    if np.ndim(best) == 0:
        return float(best), float(err)
    return best, err


def find_root(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12) -> float:
    """Root of ``f`` in a sign-changing bracket (Brent's safeguarded secant)."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if not (flo < 0.0) ^ (fhi < 0.0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f={flo:.3g}, {fhi:.3g}")
    return float(_optimize.brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500))
