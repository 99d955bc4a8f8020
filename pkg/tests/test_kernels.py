import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from dcesta import _kernels


def _random_hermitian_banded(rng, d, bw):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = m + m.conj().T
    i, j = np.indices((d, d))
    m[np.abs(i - j) > bw] = 0
    return m


def _dense_reference(mats, weights, state, record):
    out = []
    cur = state.copy()
    for w, keep in zip(weights, record):
        cur = expm(-1j * np.tensordot(w, mats, axes=1)) @ cur
        if keep:
            out.append(cur.copy())
    return np.array(out)


@pytest.mark.parametrize("bw", [0, 1, 2, 3])
def test_matches_dense_exponential(backend, rng, bw):
    d, m, n = 12, 3, 7
    mats = np.array([_random_hermitian_banded(rng, d, bw) for _ in range(m)])
    weights = rng.normal(scale=0.3, size=(n, m))
    state = np.linalg.qr(rng.normal(size=(d, 2)) + 1j * rng.normal(size=(d, 2)))[0]
    record = np.array([True, False, True, True, False, False, True])
    out = _kernels.propagate_banded(_kernels.to_bands(mats), weights, state, record)
    ref = _dense_reference(mats, weights, state, record)
    assert out.shape == (4, d, 2)
    assert np.max(np.abs(out - ref)) <= 1e-12


def test_large_step_uses_scaling(backend, rng):
    d = 10
    mats = np.array([_random_hermitian_banded(rng, d, 2)])
    weights = np.array([[25.0]])
    state = np.eye(d, 1, dtype=complex)
    out = _kernels.propagate_banded(_kernels.to_bands(mats), weights, state, np.array([True]))
    ref = expm(-25j * mats[0]) @ state
    assert np.max(np.abs(out[0] - ref)) <= 1e-10


@given(st.integers(0, 2**32 - 1), st.integers(0, 3))
def test_backends_agree(seed, bw):
    if len(_kernels.AVAILABLE) < 2:
        pytest.skip("compiled kernel not built")
    rng = np.random.default_rng(seed)
    d = 9
    mats = np.array([_random_hermitian_banded(rng, d, bw) for _ in range(2)])
    weights = rng.normal(scale=0.5, size=(5, 2))
    state = rng.normal(size=(d, 1)) + 0j
    state /= np.linalg.norm(state)
    record = np.ones(5, bool)
    bands = _kernels.to_bands(mats)
    results = []
    previous = _kernels.get_backend()
    try:
        for name in _kernels.AVAILABLE:
            _kernels.set_backend(name)
            results.append(_kernels.propagate_banded(bands, weights, state, record))
    finally:
        _kernels.set_backend(previous)
    assert np.max(np.abs(results[0] - results[1])) <= 1e-13


def test_norm_preserved(backend, rng):
    d = 40
    mats = np.array([_random_hermitian_banded(rng, d, 2) for _ in range(2)])
    weights = rng.normal(scale=0.05, size=(2000, 2))
    state = np.eye(d, 1, dtype=complex)
    out = _kernels.propagate_banded(_kernels.to_bands(mats), weights, state, np.ones(2000, bool))
    assert np.max(np.abs(np.linalg.norm(out, axis=1) - 1)) <= 1e-12


def test_to_bands_layout():
    m = np.zeros((1, 4, 4), complex)
    m[0, 0, 2] = 3.0
    m[0, 2, 0] = 3.0
    m[0, 1, 1] = 5.0
    bands = _kernels.to_bands(m)
    assert bands.shape == (1, 5, 4)
    assert bands[0, 4, 0] == 3.0 and bands[0, 0, 2] == 3.0 and bands[0, 2, 1] == 5.0


def test_unknown_backend():
    with pytest.raises(ValueError):
        _kernels.set_backend("fortran")


def test_fallback_when_extension_missing():
    code = ("import sys; sys.modules['dcesta._kernels._ckernel'] = None\n"
            "from dcesta import _kernels, dynamics, hamiltonians, fock\n"
            "assert _kernels.AVAILABLE == ('python',) and _kernels.get_backend() == 'python'\n"
            "p = hamiltonians.protocol_resonant(1.0, 0.1, 0.0, 2.0)\n"
            "t = dynamics.evolve_schrodinger('Effective', p, fock.StateVector.vacuum(16), [0, 2])\n"
            "print(t.metadata['backend'])\n")
    proc = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True)
    assert proc.stdout.strip() == "python"
