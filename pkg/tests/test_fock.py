import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dcesta.errors import DimensionError, InvalidParameterError, TruncationError
from dcesta.fock import (
    DensityMatrix,
    FockOperator,
    StateVector,
    commutator,
    expectation,
    fidelity,
    make_annihilation,
    make_creation,
    make_momentum,
    make_number,
    make_position,
    make_squeeze,
)
from dcesta.thermo import thermal_state

dims = st.integers(min_value=4, max_value=64)
freqs = st.floats(min_value=0.05, max_value=20.0)


def test_annihilation_entries():
    a = make_annihilation(3).entries
    expected = np.zeros((3, 3))
    expected[0, 1] = 1.0
    expected[1, 2] = math.sqrt(2)
    assert np.array_equal(a, expected)


def test_annihilation_lowers():
    a = make_annihilation(2)
    assert np.allclose(a.apply(StateVector.number(1, 2)), [1, 0])


@pytest.mark.parametrize("dim", [0, 1, -3])
def test_invalid_dimension(dim):
    with pytest.raises(DimensionError):
        make_annihilation(dim)
    with pytest.raises(DimensionError):
        make_number(dim)


def test_commutator_truncation_defect():
    dim = 16
    a = make_annihilation(dim)
    c = commutator(a, a.H).entries
    expected = np.eye(dim)
    expected[-1, -1] = 1 - dim
    assert np.max(np.abs(c - expected)) <= 1e-12


def test_number_and_creation():
    assert np.array_equal(make_number(3).entries, np.diag([0.0, 1.0, 2.0]))
    ad = make_creation(4)
    assert np.allclose(ad.apply(StateVector.vacuum(4)), [0, 1, 0, 0])
    n = make_number(7)
    ad = make_creation(7)
    assert np.max(np.abs(ad.entries @ make_annihilation(7).entries - n.entries)) <= 1e-14
    assert n.hermitian and not ad.hermitian


@given(dims, freqs)
def test_canonical_commutation_interior(dim, w):
    c = commutator(make_position(dim, w), make_momentum(dim, w)).entries[: dim - 2, : dim - 2]
    assert np.max(np.abs(c - 1j * np.eye(dim - 2))) <= 1e-12


def test_vacuum_position_variance():
    x = make_position(8, 2.0)
    assert expectation(StateVector.vacuum(8), x @ x) == pytest.approx(0.25, abs=1e-14)


@given(dims, freqs, freqs)
def test_dilation_frequency_independent(dim, w1, w2):
    def xp(w):
        x, p = make_position(dim, w).entries, make_momentum(dim, w).entries
        return x @ p + p @ x
    assert np.max(np.abs(xp(w1) - xp(w2))) <= 1e-12


@pytest.mark.parametrize("w", [0.0, -1.0, float("nan")])
def test_quadrature_bad_frequency(w):
    with pytest.raises(InvalidParameterError):
        make_position(4, w)
    with pytest.raises(InvalidParameterError):
        make_momentum(4, w)


def test_commutator_adag_squared_with_a():
    dim = 12
    a = make_annihilation(dim)
    ad2 = a.H @ a.H
    c = commutator(ad2, a).entries[: dim - 2, : dim - 2]
    assert np.max(np.abs(c + 2 * a.H.entries[: dim - 2, : dim - 2])) <= 1e-12


def test_commutator_self_and_number():
    dim = 10
    a = make_annihilation(dim)
    assert np.all(commutator(a, a).entries == 0)
    c = commutator(make_number(dim), a).entries[: dim - 2, : dim - 2]
    assert np.max(np.abs(c + a.entries[: dim - 2, : dim - 2])) <= 1e-12


def test_commutator_dim_mismatch():
    with pytest.raises(DimensionError):
        commutator(make_number(3), make_number(4))


def test_squeeze_identity_at_zero():
    assert np.array_equal(make_squeeze(16, 0.0).entries, np.eye(16))


@pytest.mark.parametrize("r", [0.3, -0.3, 0.6])
def test_squeeze_scales_position_variance(r):
    dim = 64
    x = make_position(dim, 1.0)
    s = make_squeeze(dim, r)
    psi = StateVector(dim, s.entries[:, 0])
    ratio = expectation(psi, x @ x).real / expectation(StateVector.vacuum(dim), x @ x).real
    assert ratio == pytest.approx(math.exp(-2 * r), rel=1e-10)


@given(st.floats(min_value=-1.0, max_value=1.0))
def test_squeeze_unitary_and_inverse(r):
    dim = 64
    s = make_squeeze(dim, r).entries
    assert np.max(np.abs(s.conj().T @ s - np.eye(dim))) <= 1e-10
    assert np.max(np.abs(s @ make_squeeze(dim, -r).entries - np.eye(dim))) <= 1e-10


def test_squeeze_truncation_guard():
    with pytest.raises(TruncationError):
        make_squeeze(16, 1.0)
    with pytest.raises(TruncationError):
        make_squeeze(10**6, 5.5)


def test_expectations():
    n = make_number(8)
    assert expectation(StateVector.vacuum(8), n) == 0
    assert expectation(StateVector.number(1, 8), n) == 1
    rho = thermal_state(1.0, 1.0, 64)
    assert expectation(rho, make_number(64)).real == pytest.approx(0.5819767068693265, abs=1e-12)


def test_expectation_dim_mismatch():
    with pytest.raises(DimensionError):
        expectation(StateVector.vacuum(4), make_number(5))


@given(st.integers(2, 20), st.integers(0, 2**32 - 1))
def test_hermitian_expectation_is_real(dim, seed):
    r = np.random.default_rng(seed)
    m = r.normal(size=(dim, dim)) + 1j * r.normal(size=(dim, dim))
    op = FockOperator.from_matrix(m + m.conj().T)
    assert op.hermitian
    psi = StateVector.normalized(r.normal(size=dim) + 1j * r.normal(size=dim))
    assert abs(expectation(psi, op).imag) <= 1e-10


def test_fidelity_values():
    z, o = StateVector.vacuum(2), StateVector.number(1, 2)
    plus = StateVector.normalized([1, 1])
    assert fidelity(z, z) == 1
    assert fidelity(z, o) == 0
    assert fidelity(z, plus) == pytest.approx(0.5)


def test_invariant_guards():
    with pytest.raises(InvalidParameterError):
        FockOperator(2, np.array([[0, 1], [0, 0]]), hermitian=True)
    with pytest.raises(InvalidParameterError):
        FockOperator(2, np.array([[np.nan, 0], [0, 0]]))
    with pytest.raises(InvalidParameterError):
        StateVector(2, np.array([1.0, 1.0]))
    with pytest.raises(InvalidParameterError):
        DensityMatrix(2, np.diag([1.5, -0.5]))
    with pytest.raises(InvalidParameterError):
        DensityMatrix(2, np.diag([0.5, 0.6]))


def test_values_are_immutable():
    a = make_annihilation(3)
    with pytest.raises(ValueError):
        a.entries[0, 0] = 1
