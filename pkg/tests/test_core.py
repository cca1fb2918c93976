import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from floydlab import (
    DomainError,
    FreePotential,
    InitialValues,
    LinearPotential,
    Microstate,
    PhysicalContext,
    SingularError,
    basis_free,
    basis_linear,
    basis_square_well,
    classical_reference,
    make_microstate,
    microstate_from_initial_values,
    microstate_to_initial_values,
)
from floydlab.squarewell import solve_symmetric_levels

from conftest import microstates, random_microstates

CTX = PhysicalContext(1.0, 1.0, 0.5)


def test_make_microstate_examples():
    assert make_microstate(1, 1, 0).is_classical
    assert make_microstate(2, 1, 0).det == 2.0
    with pytest.raises(DomainError, match="ab - c\\^2/4"):
        make_microstate(1, 1, 2)
    with pytest.raises(DomainError):
        make_microstate(0, 1, 0)
    with pytest.raises(DomainError):
        make_microstate(1, -1, 0)
    with pytest.raises(DomainError):
        make_microstate(float("inf"), 1, 0)


def test_context_validation():
    with pytest.raises(DomainError):
        PhysicalContext(m=0.0)
    with pytest.raises(DomainError):
        PhysicalContext(hbar=-1.0)
    assert PhysicalContext().with_energy(3.0).E == 3.0


@given(st.floats(-20, 20))
def test_classical_free_initial_values(x0):
    ms = Microstate(1, 1, 0)
    iv = microstate_to_initial_values(ms, CTX, basis_free(CTX, ms), x0)
    assert iv.Wx0 == pytest.approx(math.sqrt(2 * CTX.m * CTX.E), rel=1e-14)
    assert iv.Wxx0 == pytest.approx(0.0, abs=1e-14)


def test_initial_values_spot_values():
    ms = Microstate(2, 1, 0)
    iv = microstate_to_initial_values(ms, CTX, basis_free(CTX, ms), 0.0)
    # theta(0) = 0 leaves Q = a phi(0)^2 = 2, so W_x = sqrt(2)/2
    assert iv.Wx0 == pytest.approx(math.sqrt(2) / 2, rel=1e-15)
    assert iv.Wxx0 == 0.0
    swapped = Microstate(1, 2, 0)
    iv2 = microstate_to_initial_values(swapped, CTX, basis_free(CTX, swapped), 0.0)
    assert iv.Wx0 * iv2.Wx0 == pytest.approx(2 * CTX.m * CTX.E, rel=1e-14)


def test_initial_values_require_nonzero_momentum():
    with pytest.raises(DomainError):
        InitialValues(0.0, 0.0, 1.0)


def test_roundtrip_thousand_random_microstates(rng):
    for ms in random_microstates(rng, 1000):
        E = float(np.exp(rng.uniform(-3, 3)))
        ctx = CTX.with_energy(E)
        basis = basis_free(ctx, ms)
        x0 = float(rng.uniform(-10, 10))
        iv = microstate_to_initial_values(ms, ctx, basis, x0)
        back = microstate_from_initial_values(iv, ctx, basis)
        ref = np.array(ms.as_tuple())
        assert np.max(np.abs(np.array(back.as_tuple()) - ref)) <= 1e-10 * np.max(np.abs(ref))
        again = microstate_to_initial_values(back, ctx, basis, x0)
        assert again.Wx0 == pytest.approx(iv.Wx0, rel=1e-10)
        assert again.Wxx0 == pytest.approx(iv.Wxx0, rel=1e-10, abs=1e-10 * abs(iv.Wx0) * math.sqrt(2 * E))


@pytest.mark.parametrize("x0", [-30.0, -5.0, 0.0, 2.0, 3.5])
def test_roundtrip_linear_basis(x0):
    ctx = CTX.with_energy(2.0)
    ms = Microstate(1.7, 0.6, -0.4)
    basis = basis_linear(ctx, ms, 1.0)
    back = microstate_from_initial_values(microstate_to_initial_values(ms, ctx, basis, x0), ctx, basis)
    assert back.as_tuple() == pytest.approx(ms.as_tuple(), rel=1e-10, abs=1e-10)


def test_roundtrip_square_well_and_degenerate_anchor():
    level = solve_symmetric_levels(CTX, 50.0, 1.0).levels[0]
    ctx = CTX.with_energy(level.E)
    ms = Microstate(2.0, 1.0, 0.3)
    basis = basis_square_well(ctx, ms, 50.0, 1.0)
    for x0 in (0.0, 0.5, 1.0, 1.1):
        iv = microstate_to_initial_values(ms, ctx, basis, x0)
        assert microstate_from_initial_values(iv, ctx, basis).as_tuple() == pytest.approx(ms.as_tuple(), rel=1e-10)
    # far beyond the wall phi has decayed away and a is no longer recoverable
    deep = 1.0 + 10.0 / level.kappa
    iv = microstate_to_initial_values(ms, ctx, basis, deep)
    with pytest.raises(SingularError):
        microstate_from_initial_values(iv, ctx, basis)


def test_negative_momentum_is_not_a_microstate():
    ms = Microstate(1, 1, 0)
    with pytest.raises(DomainError, match="valid microstate"):
        microstate_from_initial_values(InitialValues(0.0, -1.0, 0.0), CTX, basis_free(CTX, ms))


@given(microstates(), st.floats(-5, 5))
def test_quadratic_form_positive(ms, x):
    basis = basis_free(CTX, ms)
    phi, theta, _, _ = basis.evaluate(x)
    assert ms.a * phi**2 + ms.b * theta**2 + ms.c * phi * theta > 0


def test_classical_reference_examples():
    wx, t = classical_reference(CTX, FreePotential(), 3.0)
    assert (wx, t) == (1.0, 3.0)
    _, t = classical_reference(CTX.with_energy(2.0), LinearPotential(1.0), 0.0)
    assert t == pytest.approx(2.0, rel=1e-15)
    with pytest.raises(DomainError):
        classical_reference(CTX.with_energy(0.0), FreePotential(), 1.0)
    with pytest.raises(DomainError):
        classical_reference(CTX.with_energy(2.0), LinearPotential(1.0), 2.5)
