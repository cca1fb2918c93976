import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from floydlab import (
    DomainError,
    FreePotential,
    LinearPotential,
    Microstate,
    PhysicalContext,
    averaged_free_action,
    averaged_free_time,
    basis_family,
    basis_free,
    classical_reference,
    principal_function,
    trajectory,
    trajectory_time,
    trajectory_time_linear_closed,
    transition_width,
)
from floydlab.dynamics import free_time_closed_form

from conftest import microstates, random_microstates

CTX = PhysicalContext(1.0, 1.0, 0.5)
AI0 = 0.355028053887817239260063186004183176398
BI0 = 0.6149266274460007351509223690936135535947
# mpmath: outermost zeta < 0 with |t_q / t_c - 1| = 0.01, 0.1, 0.4
ZETA_WIDTH = {0.01: 2.357491300459376391, 0.1: 0.8169835233206399128, 0.4: 0.3021771057498210318}


def free_time(ms, x, ctx=CTX):
    return trajectory_time(basis_family(FreePotential(), ctx, ms), x, ctx, ms)


def test_classical_free_time_spot_value():
    assert free_time(Microstate(1, 1, 0), 3.0) == pytest.approx(3.0, rel=1e-10)


@given(microstates(), st.floats(0.05, 50))
def test_free_jacobi_matches_closed_form(ms, E):
    ctx = CTX.with_energy(E)
    x = np.linspace(-7, 7, 20)
    t = free_time(ms, x, ctx)
    closed = free_time_closed_form(ctx, ms, x)
    assert np.all(np.abs(t - closed) <= 1e-6 * np.maximum(np.abs(closed), ctx.hbar / E))


def test_linear_jacobi_matches_closed_form(rng):
    f = 1.0
    for ms in random_microstates(rng, 5):
        ctx = CTX.with_energy(float(rng.uniform(0.5, 5)))
        x = ctx.E / f - rng.uniform(0.0, 15.0, 20)
        t = trajectory_time(basis_family(LinearPotential(f), ctx, ms), x, ctx, ms)
        closed = trajectory_time_linear_closed(ctx, ms, f, x)
        assert np.max(np.abs(t / closed - 1)) <= 1e-6


def test_linear_closed_form_at_turning_point():
    ctx = CTX.with_energy(2.0)
    t = trajectory_time_linear_closed(ctx, Microstate(1, 1, 0), 1.0, 2.0)
    expected = ctx.hbar ** (1 / 3) / math.pi * (2 * ctx.m) ** (1 / 3) / (AI0**2 + BI0**2)
    assert t == pytest.approx(expected, rel=1e-13)
    with pytest.raises(DomainError):
        trajectory_time_linear_closed(ctx, Microstate(1, 1, 0), -1.0, 2.0)


def test_linear_classical_asymptote():
    ctx = CTX.with_energy(2.0)
    alpha = (2 * ctx.m / ctx.hbar**2) ** (1 / 3)
    x = 2.0 + np.linspace(-40, -8, 33) / alpha
    t = trajectory_time(basis_family(LinearPotential(1.0), ctx, Microstate(1, 1, 0)), x, ctx, Microstate(1, 1, 0))
    t_c = np.array([classical_reference(ctx, LinearPotential(1.0), xi)[1] for xi in x])
    assert np.max(np.abs(t / t_c - 1)) <= 1e-3


def test_averaged_time_is_microstate_independent(rng):
    for ms in random_microstates(rng, 50):
        x = float(rng.uniform(1, 40))
        got = averaged_free_time(CTX, ms, x)
        assert got == pytest.approx(math.sqrt(CTX.m / (2 * CTX.E)) * x, rel=1e-8)
    assert averaged_free_time(CTX, Microstate(2, 1, 0), 0.0) == 0.0


def test_classical_microstate_time_follows_motion():
    ms = Microstate(1, 1, 0)
    x = np.linspace(-5, 5, 200)
    assert np.all(np.diff(free_time(ms, x)) > 0)
    ctx = CTX.with_energy(2.0)
    xl = np.linspace(-10, 1.5, 200)
    tl = trajectory_time(basis_family(LinearPotential(1.0), ctx, ms), xl, ctx, ms)
    # the default direction recedes from the turning point, toward -x
    assert np.all(np.diff(tl) < 0)


def test_trajectory_samples_are_ordered():
    tr = trajectory(FreePotential(), CTX, Microstate(1, 1, 0), [0.0, 1.0, 2.0])
    assert [x for x, _ in tr.samples] == [0.0, 1.0, 2.0]
    assert [t for _, t in tr.samples] == pytest.approx([0.0, 1.0, 2.0], abs=1e-10)


def test_principal_function():
    ms = Microstate(1, 1, 0)
    basis = basis_free(CTX, ms)
    x, t = 2.5, 0.7
    assert principal_function(basis, x, t) == pytest.approx(math.sqrt(2 * CTX.m * CTX.E) * x - CTX.E * t)
    assert principal_function(basis, 0.0, 0.0) == 0.0


def test_averaged_action_identity_up_to_a_constant():
    # <W> - 2E<t> is the same constant at every E and x, and zero when c = 0
    for ms in (Microstate(3, 2, 1), Microstate(1, 3, -1)):
        offsets = []
        for E in (0.5, 50.0, 5000.0):
            for x in (3.0, 30.0):
                w, t, s = averaged_free_action(CTX.with_energy(E), ms, x)
                assert s == pytest.approx(w - E * t)
                offsets.append(w - 2 * E * t)
        assert np.ptp(offsets) <= 1e-6 * CTX.hbar
    for E in (0.5, 5000.0):
        w, t, _ = averaged_free_action(CTX.with_energy(E), Microstate(2, 1, 0), 3.0)
        assert w == pytest.approx(2 * E * t, rel=1e-9)


@pytest.mark.parametrize("tol", sorted(ZETA_WIDTH))
def test_transition_width_matches_oracle(tol):
    w = transition_width(CTX.with_energy(2.0), 1.0, tol)
    assert w.zeta == pytest.approx(ZETA_WIDTH[tol], rel=1e-10)


def test_transition_width_scalings():
    w = transition_width(CTX.with_energy(2.0), 1.0)
    w2 = transition_width(CTX.with_energy(4.0), 1.0)
    assert w2.xi == pytest.approx(w.xi, rel=1e-6)
    for hbar in (0.1, 0.01):
        wh = transition_width(PhysicalContext(1.0, hbar, 2.0), 1.0)
        assert wh.x == pytest.approx(w.x * hbar ** (2 / 3), rel=1e-6)
        assert wh.xi == pytest.approx(w.xi * hbar ** (2 / 3), rel=1e-6)
    assert transition_width(CTX.with_energy(2.0), 1.0, 0.45).x < w.x
    with pytest.raises(DomainError):
        transition_width(CTX, 1.0, 0.5)
    with pytest.raises(DomainError):
        transition_width(CTX, 1.0, 0.0)


def test_nonclassical_time_can_turn_back():
    # the closed form x / [(a+b) + A^{1/2} cos(2kx - delta)] is not monotone once
    # the cosine amplitude is large; the Jacobi derivative follows it
    ms = Microstate(3.079966389758226, 0.348775001002591, 0.03380754170925672)
    x = np.linspace(-5, -3, 81)
    t = free_time(ms, x)
    assert np.any(np.diff(t) < 0)
    assert np.allclose(t, free_time_closed_form(CTX, ms, x), rtol=1e-6)
    near = np.linspace(-0.1, 0.1, 41)
    assert np.all(np.diff(free_time(ms, near)) > 0)
