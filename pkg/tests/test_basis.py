import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from floydlab import (
    AiryOverflowError,
    DomainError,
    EigenvalueError,
    EvalError,
    LinearPotential,
    Microstate,
    PhysicalContext,
    SquareWellPotential,
    basis_free,
    basis_linear,
    basis_square_well,
    make_basis,
)
from floydlab.specfun import numeric_derivative
from floydlab.squarewell import solve_symmetric_levels

from conftest import microstates, random_microstates

CTX = PhysicalContext(1.0, 1.0, 0.5)
K0 = 1.427551778764594120806487988040677893396  # mpmath root of k tan k = sqrt(100 - k^2)


def wronskian(basis, x):
    phi, theta, dphi, dtheta = basis.evaluate(x)
    return phi * dtheta - dphi * theta


def ground_well(ms=Microstate(1, 1, 0), U=50.0, q=1.0, ctx=CTX):
    level = solve_symmetric_levels(ctx, U, q).levels[0]
    lctx = ctx.with_energy(level.E)
    return basis_square_well(lctx, ms, U, q), level


def test_free_basis_prefactor():
    basis = basis_free(CTX, Microstate(1, 1, 0))
    phi, theta, _, _ = basis.evaluate(0.0)
    assert phi == pytest.approx(0.5 ** -0.25, rel=1e-15)
    assert phi * theta == 0.0


@given(microstates(), st.floats(0.01, 100))
def test_free_wronskian_normalization(ms, E):
    ctx = CTX.with_energy(E)
    basis = basis_free(ctx, ms)
    w = wronskian(basis, 0.37)
    assert w * w == pytest.approx(2 * ctx.m / (ctx.hbar**2 * ms.det), rel=1e-12)


def test_free_needs_positive_energy():
    with pytest.raises(DomainError):
        basis_free(CTX.with_energy(0.0), Microstate(1, 1, 0))


def test_square_well_ground_level_matches_oracle():
    basis, level = ground_well()
    assert level.k == pytest.approx(K0, rel=1e-12)
    # C1 continuity of phi at the wall
    inside = np.array(basis.evaluate(1.0))
    outside = np.array(basis.evaluate(np.nextafter(1.0, 2.0)))
    assert np.all(np.abs(inside - outside) <= 1e-8 * np.max(np.abs(inside)))
    assert wronskian(basis, 0.0) == pytest.approx(wronskian(basis, 2.0), rel=1e-9)


def test_square_well_interior_forms():
    basis, level = ground_well()
    x = np.linspace(-0.9, 0.9, 7)
    phi, theta, _, _ = basis.evaluate(x)
    s = basis.scale / math.sqrt(level.k)
    assert phi == pytest.approx(s * np.cos(level.k * x), rel=1e-14)
    assert theta == pytest.approx(s * np.sin(level.k * x), rel=1e-14, abs=1e-15)


def test_square_well_symmetry_and_growth():
    basis, _ = ground_well()
    x = np.linspace(1.2, 3.0, 5)
    phi_r, theta_r, _, _ = basis.evaluate(x)
    phi_l, theta_l, _, _ = basis.evaluate(-x)
    assert phi_l == pytest.approx(phi_r, rel=1e-14)
    assert theta_l == pytest.approx(-theta_r, rel=1e-14)
    assert np.all(np.diff(np.abs(phi_r)) < 0)
    assert np.all(np.diff(theta_r) > 0)


def test_square_well_guards():
    with pytest.raises(DomainError):
        basis_square_well(CTX.with_energy(60.0), Microstate(1, 1, 0), 50.0, 1.0)
    with pytest.raises(EigenvalueError):
        basis_square_well(CTX.with_energy(1.3), Microstate(1, 1, 0), 50.0, 1.0)
    with pytest.raises(DomainError):
        SquareWellPotential(-1.0, 1.0)
    # off the spectrum the C1 continuation is still available
    off = basis_square_well(CTX.with_energy(1.3), Microstate(1, 1, 0), 50.0, 1.0, require_eigenvalue=False)
    # both members grow like exp(kappa y) here, so cancellation costs digits
    assert wronskian(off, 0.0) == pytest.approx(wronskian(off, 1.7), rel=1e-9)


def test_linear_basis_at_turning_point():
    ctx = CTX.with_energy(2.0)
    basis = basis_linear(ctx, Microstate(1, 1, 0), 1.0)
    phi, theta, _, _ = basis.evaluate(2.0)
    assert phi / theta == pytest.approx(3 ** -0.5, rel=1e-14)
    target = 2 * ctx.m / ctx.hbar**2
    assert wronskian(basis, 2.0) ** 2 == pytest.approx(target, rel=1e-12)
    assert wronskian(basis, -3.0) ** 2 == pytest.approx(target, rel=1e-12)


def test_linear_basis_oscillatory_envelope():
    ctx = CTX.with_energy(2.0)
    basis = basis_linear(ctx, Microstate(1, 1, 0), 1.0)
    alpha = (2 * ctx.m * 1.0 / ctx.hbar**2) ** (1 / 3)
    s2 = basis.scale**2 * math.pi / alpha
    for depth in (40.0, 80.0):
        x = 2.0 - depth
        phi, theta, _, _ = basis.evaluate(x)
        # Ai^2 + Bi^2 -> 1/(pi sqrt(-zeta))
        expected = s2 / (math.pi * math.sqrt(alpha * depth))
        assert phi**2 + theta**2 == pytest.approx(expected, rel=1e-3)


def test_linear_overflow_deep_in_forbidden_region():
    basis = basis_linear(CTX.with_energy(2.0), Microstate(1, 1, 0), 1.0)
    with pytest.raises((EvalError, AiryOverflowError)):
        basis.evaluate(150.0)


def _schrodinger_residual(basis, x):
    ctx = basis.ctx
    out = []
    for idx in (0, 1):
        u = lambda t: float(basis.evaluate(t)[idx])
        d2, _ = numeric_derivative(u, x, order=2, h=1e-2)
        lhs = -ctx.hbar**2 / (2 * ctx.m) * d2 + (float(basis.potential.value(x)) - ctx.E) * u(x)
        out.append(abs(lhs) / max(ctx.hbar**2 / (2 * ctx.m) * abs(d2), 1e-12))
    return max(out)


def test_wronskian_constancy_and_schrodinger(rng):
    well, _ = ground_well(Microstate(2.0, 0.7, 0.4))
    bases = [
        basis_free(CTX, Microstate(2.0, 0.7, 0.4)),
        well,
        basis_linear(CTX.with_energy(2.0), Microstate(2.0, 0.7, 0.4), 1.0),
    ]
    for basis in bases:
        lo, hi = (-6.0, 4.0) if basis.potential.kind == "linear" else (-1.5, 1.5)
        x1 = rng.uniform(lo, hi, 100)
        x2 = rng.uniform(lo, hi, 100)
        w1, w2 = wronskian(basis, x1), wronskian(basis, x2)
        assert np.max(np.abs(w1 - w2) / np.abs(w1)) <= 1e-9
        for x in rng.uniform(lo, hi, 10):
            if basis.potential.kind == "square_well" and abs(abs(x) - 1.0) < 0.05:
                continue  # stencil would straddle the wall
            assert _schrodinger_residual(basis, float(x)) <= 1e-6


def test_make_basis_dispatch():
    ms = Microstate(1, 1, 0)
    assert make_basis(LinearPotential(2.0), CTX, ms).potential.f == 2.0
    with pytest.raises(DomainError):
        make_basis(type("P", (), {"kind": "harmonic"})(), CTX, ms)
