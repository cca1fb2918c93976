import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from floydlab import (
    Microstate,
    PhysicalContext,
    UnwrapError,
    basis_free,
    basis_linear,
    basis_square_well,
    conjugate_momentum,
    qshje_point,
    qshje_residual,
    reduced_action,
    schwarzian,
)
from floydlab.basis import BasisPair, FreePotential
from floydlab.qshje import free_momentum_closed_form, residual_scale, schwarzian_fd
from floydlab.squarewell import solve_symmetric_levels

from conftest import microstates, random_microstates

CTX = PhysicalContext(1.0, 1.0, 0.5)


def well_basis(ms, U=50.0, q=1.0):
    level = solve_symmetric_levels(CTX, U, q).levels[0]
    return basis_square_well(CTX.with_energy(level.E), ms, U, q), level


def all_bases(ms):
    return [
        (basis_free(CTX, ms), (-4.0, 4.0)),
        (well_basis(ms)[0], (-1.3, 1.3)),
        (basis_linear(CTX.with_energy(2.0), ms, 1.0), (-6.0, 3.0)),
    ]


def test_classical_free_momentum_is_constant():
    basis = basis_free(CTX, Microstate(1, 1, 0))
    x = np.linspace(-10, 10, 101)
    assert conjugate_momentum(basis, x) == pytest.approx(np.ones_like(x), rel=1e-14)
    assert np.max(np.abs(schwarzian(basis, x))) <= 1e-13
    assert np.max(np.abs(qshje_residual(basis, x))) <= 1e-12


def test_momentum_spot_value():
    basis = basis_free(CTX, Microstate(2, 1, 0))
    assert float(conjugate_momentum(basis, 0.0)) == pytest.approx(math.sqrt(2) / 2, rel=1e-15)


def test_forbidden_region_momentum_finite_positive():
    basis, level = well_basis(Microstate(1, 1, 0))
    x = 1.0 + np.linspace(0.01, 3.0, 20) / level.kappa
    wx = conjugate_momentum(basis, x)
    assert np.all(np.isfinite(wx)) and np.all(wx > 0)


def test_reduced_action_classical_and_period():
    ms = Microstate(1, 1, 0)
    assert reduced_action(basis_free(CTX, ms), 3.0, 0.0) == pytest.approx(3.0, rel=1e-13)
    assert reduced_action(basis_free(CTX, ms), 1.2, 1.2) == 0.0


@given(microstates(), st.floats(-10, 10))
def test_reduced_action_advances_pi_hbar_per_period(ms, x):
    basis = basis_free(CTX, ms)
    k = math.sqrt(2 * CTX.m * CTX.E) / CTX.hbar
    assert reduced_action(basis, x + math.pi / k, x) == pytest.approx(math.pi * CTX.hbar, rel=1e-12)


def _gauss_legendre(f, edges, panels=64, order=20):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        cuts = np.linspace(lo, hi, panels + 1)
        mid, half = 0.5 * (cuts[1:] + cuts[:-1]), 0.5 * np.diff(cuts)
        x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
        total += float(np.sum(f(x).reshape(panels, order) * weights[None, :] * half[:, None]))
    return total


def test_reduced_action_matches_momentum_integral(rng):
    for ms in random_microstates(rng, 10):
        for basis, (lo, hi) in all_bases(ms):
            a, b = sorted(rng.uniform(lo, hi, 2))
            brk = [p for p in (-1.0, 1.0) if a < p < b] if basis.potential.kind == "square_well" else []
            oracle = _gauss_legendre(lambda t: conjugate_momentum(basis, t), [a, *brk, b])
            assert reduced_action(basis, b, a) == pytest.approx(oracle, rel=1e-8)


def test_action_derivative_is_momentum(rng):
    # central difference of the unwrapped action against W_x
    for ms in random_microstates(rng, 50):
        for basis, (lo, hi) in all_bases(ms):
            x = float(rng.uniform(lo, hi))
            if basis.potential.kind == "square_well" and abs(abs(x) - 1.0) < 1e-3:
                continue
            h = 1e-5
            fd = (reduced_action(basis, x + h, x) - reduced_action(basis, x - h, x)) / (2 * h)
            assert fd == pytest.approx(float(conjugate_momentum(basis, x)), rel=1e-7)


def _stencil_schwarzian(basis, x, h):
    # five-point stencils on W_x only
    f = lambda t: float(conjugate_momentum(basis, t))
    v = [f(x + o * h) for o in (-2, -1, 0, 1, 2)]
    d1 = (v[0] - 8 * v[1] + 8 * v[3] - v[4]) / (12 * h)
    d2 = (-v[0] + 16 * v[1] - 30 * v[2] + 16 * v[3] - v[4]) / (12 * h * h)
    return d2 / v[2] - 1.5 * (d1 / v[2]) ** 2


def test_schwarzian_against_stencil_oracle():
    basis = basis_free(CTX, Microstate(2, 1, 0))
    oracle = _stencil_schwarzian(basis, 0.0, 1e-3)
    assert float(schwarzian(basis, 0.0)) == pytest.approx(oracle, rel=1e-6)


def test_schwarzian_analytic_vs_fd_all_bases(rng):
    for ms in random_microstates(rng, 5):
        for basis, (lo, hi) in all_bases(ms):
            for x in rng.uniform(lo, hi, 5):
                if basis.potential.kind == "square_well" and abs(abs(x) - 1.0) < 0.2:
                    continue
                an = float(schwarzian(basis, float(x)))
                fd = schwarzian_fd(basis, float(x))
                scale = 2 * CTX.m * max(basis.ctx.E, abs(float(basis.potential.value(x)) - basis.ctx.E)) / CTX.hbar**2
                assert abs(an - fd) <= 1e-6 * max(abs(an), scale)


def test_quantum_potential_balances_the_classical_terms(rng):
    for ms in random_microstates(rng, 20):
        for basis, (lo, hi) in all_bases(ms):
            x = rng.uniform(lo, hi, 20)
            ctx = basis.ctx
            qp = ctx.hbar**2 / (4 * ctx.m) * schwarzian(basis, x)
            rhs = ctx.E - basis.potential.value(x) - conjugate_momentum(basis, x) ** 2 / (2 * ctx.m)
            tol = 1e-6 if basis.potential.kind == "linear" else 1e-8
            assert np.all(np.abs(qp - rhs) <= tol * residual_scale(basis, x))


def test_residual_examples(rng):
    basis = basis_free(CTX, Microstate(3, 2, 1))
    x = rng.uniform(-20, 20, 100)
    assert np.max(np.abs(qshje_residual(basis, x))) <= 1e-8 * CTX.E
    lin = basis_linear(CTX.with_energy(2.0), Microstate(1, 1, 0), 1.0)
    x = 2.0 + rng.uniform(-0.5, 0.5, 50)
    assert np.max(np.abs(qshje_residual(lin, x))) <= 1e-6 * 2.0


@given(microstates(), st.floats(-8, 8), st.floats(0.05, 50))
def test_free_closed_form_momentum(ms, x, E):
    ctx = CTX.with_energy(E)
    got = float(conjugate_momentum(basis_free(ctx, ms), x))
    assert got == pytest.approx(float(free_momentum_closed_form(ctx, ms, x)), rel=1e-10)


def test_unwrap_error_when_angle_runs_backwards():
    k = 1.0
    # theta with the wrong sign: the angle decreases and W_x < 0
    unit = lambda x: (np.cos(k * x), -np.sin(k * x), -np.sin(k * x), -np.cos(k * x))
    bad = BasisPair(FreePotential(), Microstate(1, 1, 0), CTX, unit)
    with pytest.raises(UnwrapError):
        reduced_action(bad, 3.0, 0.0)


def test_qshje_point_fields():
    basis = basis_free(CTX, Microstate(3, 2, 1))
    p = qshje_point(basis, 0.7)
    assert p.Wx > 0
    assert p.W == pytest.approx(reduced_action(basis, 0.7, 0.0))
    assert abs(p.residual) <= 1e-8 * CTX.E
    assert p.schwarzian == pytest.approx(float(schwarzian(basis, 0.7)))
