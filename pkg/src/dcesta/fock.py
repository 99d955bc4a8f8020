"""Operator algebra on a truncated Fock (number) basis.

Units are hbar = m = k_B = 1.  Matrices are dense; identities that involve
products with the creation operator only hold away from the top two levels
of the basis (the truncation edge).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import DimensionError, InvalidParameterError, TruncationError

HERMITIAN_RTOL = 1e-12
NORM_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _check_dim(dim: int, minimum: int = 2) -> int:
    if int(dim) != dim or dim < minimum:
        raise DimensionError(f"dim must be an integer >= {minimum}, got {dim!r}")
    return int(dim)


def is_hermitian(m: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    scale = np.max(np.abs(m)) if m.size else 0.0
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= rtol * max(scale, 1e-300))


@dataclass(frozen=True)
class FockOperator:
    """Dense complex matrix on the levels 0..dim-1.

    ``hermitian`` is a checked flag: constructing with ``hermitian=True``
    from a non-hermitian matrix raises.  Use :meth:`from_matrix` to have the
    flag detected.
    """

    dim: int
    entries: np.ndarray = field(repr=False)
    hermitian: bool = False

    def __post_init__(self):
        _check_dim(self.dim, 1)
        m = _frozen(self.entries)
        if m.shape != (self.dim, self.dim):
            raise DimensionError(f"entries shape {m.shape} does not match dim={self.dim}")
        if not np.all(np.isfinite(m)):
            raise InvalidParameterError("operator entries must be finite")
        if self.hermitian and not is_hermitian(m):
            raise InvalidParameterError("operator flagged hermitian is not hermitian")
        object.__setattr__(self, "entries", m)

    @classmethod
    def from_matrix(cls, m, hermitian: bool | None = None) -> "FockOperator":
        m = np.asarray(m, dtype=complex)
        if hermitian is None:
            hermitian = is_hermitian(m)
        return cls(m.shape[0], m, hermitian)

    @property
    def H(self) -> "FockOperator":
        return FockOperator(self.dim, self.entries.conj().T, self.hermitian)

    def dagger(self) -> "FockOperator":
        return self.H

    def _same_dim(self, other: "FockOperator"):
        if self.dim != other.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other):
        if not isinstance(other, FockOperator):
            return NotImplemented
        self._same_dim(other)
        return FockOperator(self.dim, self.entries + other.entries,
                            self.hermitian and other.hermitian)

    def __sub__(self, other):
        if not isinstance(other, FockOperator):
            return NotImplemented
        self._same_dim(other)
        return FockOperator(self.dim, self.entries - other.entries,
                            self.hermitian and other.hermitian)

    def __neg__(self):
        return FockOperator(self.dim, -self.entries, self.hermitian)

    def __mul__(self, c):
        if isinstance(c, FockOperator):
            return NotImplemented
        c = complex(c)
        return FockOperator(self.dim, c * self.entries, self.hermitian and c.imag == 0)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            self._same_dim(other)
            return FockOperator.from_matrix(self.entries @ other.entries)
        return NotImplemented

    def apply(self, state: "StateVector") -> np.ndarray:
        """Return ``O|psi>`` as a raw amplitude vector (not renormalised)."""
        self._same_dim(state)
        return self.entries @ state.amplitudes

    def max_entry(self) -> float:
        return float(np.max(np.abs(self.entries)))

    def block(self, levels: int) -> np.ndarray:
        """Top-left ``levels x levels`` block, i.e. the operator on levels 0..levels-1."""
        return self.entries[:levels, :levels]


@dataclass(frozen=True)
class StateVector:
    """Normalised pure state on the truncated basis."""

    dim: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_dim(self.dim, 1)
        v = _frozen(np.ravel(self.amplitudes))
        if v.shape != (self.dim,):
            raise DimensionError(f"amplitudes length {v.size} does not match dim={self.dim}")
        norm = np.linalg.norm(v)
        if not np.isfinite(norm) or abs(norm - 1.0) > NORM_TOL:
            raise InvalidParameterError(f"state norm {norm!r} differs from 1")
        object.__setattr__(self, "amplitudes", v)

    @classmethod
    def normalized(cls, amplitudes) -> "StateVector":
        v = np.asarray(amplitudes, dtype=complex).ravel()
        return cls(v.size, v / np.linalg.norm(v))

    @classmethod
    def number(cls, n: int, dim: int) -> "StateVector":
        _check_dim(dim, 1)
        if not 0 <= n < dim:
            raise DimensionError(f"level {n} outside basis of size {dim}")
        v = np.zeros(dim, complex)
        v[n] = 1.0
        return cls(dim, v)

    @classmethod
    def vacuum(cls, dim: int) -> "StateVector":
        return cls.number(0, dim)

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def to_density(self) -> "DensityMatrix":
        v = self.amplitudes
        return DensityMatrix(self.dim, np.outer(v, v.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state: hermitian, unit trace, positive semidefinite."""

    dim: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_dim(self.dim, 1)
        m = _frozen(self.entries)
        if m.shape != (self.dim, self.dim):
            raise DimensionError(f"entries shape {m.shape} does not match dim={self.dim}")
        if not np.all(np.isfinite(m)):
            raise InvalidParameterError("density matrix entries must be finite")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_RTOL:
            raise InvalidParameterError("density matrix is not hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > NORM_TOL:
            raise InvalidParameterError(f"density matrix trace {tr!r} differs from 1")
        if np.linalg.eigvalsh(m)[0] < -NORM_TOL:
            raise InvalidParameterError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "entries", m)

    def populations(self) -> np.ndarray:
        return np.diag(self.entries).real.copy()


State = Union[StateVector, DensityMatrix]


def make_annihilation(dim: int) -> FockOperator:
    """Lowering operator with ``a[n-1, n] = sqrt(n)``."""
    dim = _check_dim(dim)
    return FockOperator(dim, np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(complex))


def make_creation(dim: int) -> FockOperator:
    return make_annihilation(dim).H


def make_number(dim: int) -> FockOperator:
    dim = _check_dim(dim)
    return FockOperator(dim, np.diag(np.arange(dim, dtype=float)).astype(complex), True)


def _check_freq(omega_ref: float) -> float:
    if not np.isfinite(omega_ref) or omega_ref <= 0:
        raise InvalidParameterError(f"reference frequency must be positive, got {omega_ref!r}")
    return float(omega_ref)


def make_position(dim: int, omega_ref: float) -> FockOperator:
    """``x = (a^dag + a) / sqrt(2 omega_ref)``."""
    w = _check_freq(omega_ref)
    a = make_annihilation(dim).entries
    return FockOperator(dim, (a.T + a) / np.sqrt(2 * w), True)


def make_momentum(dim: int, omega_ref: float) -> FockOperator:
    """``p = i sqrt(omega_ref / 2) (a^dag - a)``."""
    w = _check_freq(omega_ref)
    a = make_annihilation(dim).entries
    return FockOperator(dim, 1j * np.sqrt(w / 2) * (a.T - a), True)


def commutator(A: FockOperator, B: FockOperator) -> FockOperator:
    if A.dim != B.dim:
        raise DimensionError(f"dimension mismatch: {A.dim} vs {B.dim}")
    return FockOperator.from_matrix(A.entries @ B.entries - B.entries @ A.entries)


def expm_hermitian(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """``exp(-i t h)`` for hermitian ``h`` by eigendecomposition (exactly unitary)."""
    evals, evecs = np.linalg.eigh(h)
    return (evecs * np.exp(-1j * t * evals)) @ evecs.conj().T


def squeeze_dim_bound(r: float) -> float:
    """Smallest basis size for which a squeeze by ``r`` is trusted."""
    return 8.0 * np.exp(2.0 * abs(r))


def make_squeeze(dim: int, r: float) -> FockOperator:
    """Squeeze operator ``S(r) = exp[(r/2)(a^2 - a^dag^2)]``.

    With this sign, ``S(r)^dag x S(r) = exp(-r) x``, so ``S(r)|0>`` is the
    ground state of an oscillator at frequency ``omega_ref * exp(2 r)``.

    Raises
    ------
    TruncationError
        If ``|r| > 5`` or ``dim < 8 exp(2|r|)``.
    """
    dim = _check_dim(dim)
    if not np.isfinite(r) or abs(r) > 5:
        raise TruncationError(f"squeeze parameter |r|={abs(r)} exceeds the practical bound 5")
    if dim < squeeze_dim_bound(r):
        raise TruncationError(
            f"dim={dim} too small for squeeze r={r}: need dim >= {squeeze_dim_bound(r):.1f}")
    if r == 0:
        return FockOperator(dim, np.eye(dim, dtype=complex))
    return FockOperator(dim, squeeze_matrix(dim, r))


@lru_cache(maxsize=32)
def _squeeze_eig(dim: int):
    a = make_annihilation(dim).entries
    a2 = a @ a
    # (r/2)(a^2 - a^dag^2) = -i r K0 with K0 hermitian
    k0 = 0.5j * (a2 - a2.conj().T)
    evals, evecs = np.linalg.eigh(k0)
    evals.setflags(write=False)
    evecs.setflags(write=False)
    return evals, evecs


def squeeze_matrix(dim: int, r: float) -> np.ndarray:
    """Raw matrix of ``S(r)`` without the truncation guard."""
    evals, evecs = _squeeze_eig(int(dim))
    return (evecs * np.exp(-1j * r * evals)) @ evecs.conj().T


def expectation(state: State, op: FockOperator) -> complex:
    """``<psi|O|psi>`` for a pure state or ``tr(rho O)`` for a mixed one."""
    if state.dim != op.dim:
        raise DimensionError(f"dimension mismatch: state {state.dim} vs operator {op.dim}")
    if isinstance(state, StateVector):
        v = state.amplitudes
        return complex(np.vdot(v, op.entries @ v))
    return complex(np.einsum("ij,ji->", state.entries, op.entries))


def fidelity(psi: StateVector, phi: StateVector) -> float:
    """``|<psi|phi>|^2``."""
    if psi.dim != phi.dim:
        raise DimensionError(f"dimension mismatch: {psi.dim} vs {phi.dim}")
    return float(min(1.0, abs(np.vdot(psi.amplitudes, phi.amplitudes)) ** 2))
