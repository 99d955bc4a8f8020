"""Frequency protocols and the Hamiltonian forms of the driven oscillator.

Every Hamiltonian here is a sum ``sum_k c_k(t) M_k`` of fixed matrices with
scalar time-dependent weights; :func:`hamiltonian_terms` exposes that split
for the time stepper, and the named builders return the assembled matrix at
a single time.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidParameterError, ProtocolError
from .fock import (
    FockOperator,
    make_annihilation,
    make_momentum,
    make_number,
    make_position,
)

_WINDOW_RTOL = 1e-12


class ProtocolKind(str, enum.Enum):
    CONSTANT = "constant"
    RESONANT = "resonant"
    LINEAR_RAMP = "linear_ramp"
    SMOOTH_RAMP = "smooth_ramp"


@dataclass(frozen=True)
class FrequencyProtocol:
    """A drive ``omega(t)`` with its analytic derivative on ``[t0, tf]``.

    ``omega0`` is both the initial frequency of ramps and the reference
    frequency at which the fixed ladder operators are defined.
    """

    kind: ProtocolKind
    omega0: float
    omega_f: float
    eps: float = 0.0
    t0: float = 0.0
    tf: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "kind", ProtocolKind(self.kind))
        for name in ("omega0", "omega_f"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ProtocolError(f"{name} must be positive and finite, got {v!r}")
        if not np.isfinite(self.t0) or not self.tf > self.t0:
            raise ProtocolError(f"need t0 < tf, got t0={self.t0}, tf={self.tf}")
        if self.kind is ProtocolKind.RESONANT:
            if not 0 <= self.eps < 0.5:
                raise ProtocolError(f"resonant modulation depth must satisfy 0 <= eps < 0.5, got {self.eps}")
        if self.kind in (ProtocolKind.LINEAR_RAMP, ProtocolKind.SMOOTH_RAMP):
            if not np.isfinite(self.tf):
                raise ProtocolError("ramp protocols need a finite tf")
        if self.min_omega() <= 0:
            raise ProtocolError("omega(t) must stay positive on the protocol window")

    @property
    def duration(self) -> float:
        return self.tf - self.t0

    def min_omega(self) -> float:
        if self.kind is ProtocolKind.RESONANT:
            return self.omega0 * (1 - self.eps)
        if self.kind is ProtocolKind.CONSTANT:
            return self.omega0
        # both ramps are monotone between the endpoints
        return min(self.omega0, self.omega_f)

    def _fraction(self, t):
        return (np.asarray(t, float) - self.t0) / self.duration

    def omega(self, t):
        t = np.asarray(t, float)
        k = self.kind
        if k is ProtocolKind.CONSTANT:
            return np.full_like(t, self.omega0)
        if k is ProtocolKind.RESONANT:
            return self.omega0 * (1 + self.eps * np.sin(2 * self.omega0 * t))
        s = self._fraction(t)
        if k is ProtocolKind.LINEAR_RAMP:
            return self.omega0 + (self.omega_f - self.omega0) * s
        return self.omega0 + (self.omega_f - self.omega0) * s**3 * (10 - 15 * s + 6 * s**2)

    def omega_dot(self, t):
        t = np.asarray(t, float)
        k = self.kind
        if k is ProtocolKind.CONSTANT:
            return np.zeros_like(t)
        if k is ProtocolKind.RESONANT:
            return 2 * self.eps * self.omega0**2 * np.cos(2 * self.omega0 * t)
        delta = (self.omega_f - self.omega0) / self.duration
        if k is ProtocolKind.LINEAR_RAMP:
            return np.full_like(t, delta)
        s = self._fraction(t)
        return delta * 30 * s**2 * (1 - s) ** 2

    def integral_omega(self, t):
        """Closed form of ``int_{t0}^{t} omega(t') dt'``."""
        t = np.asarray(t, float)
        k = self.kind
        if k is ProtocolKind.CONSTANT:
            return self.omega0 * (t - self.t0)
        if k is ProtocolKind.RESONANT:
            w = self.omega0
            return w * (t - self.t0) - 0.5 * self.eps * (np.cos(2 * w * t) - np.cos(2 * w * self.t0))
        s = self._fraction(t)
        d = self.omega_f - self.omega0
        if k is ProtocolKind.LINEAR_RAMP:
            shape = s**2 / 2
        else:
            shape = s**4 * (2.5 - 3 * s + s**2)
        return self.duration * (self.omega0 * s + d * shape)

    def contains(self, t) -> bool:
        t = np.asarray(t, float)
        span = self.duration if np.isfinite(self.duration) else max(1.0, abs(self.t0))
        tol = _WINDOW_RTOL * max(span, 1.0)
        return bool(np.all((t >= self.t0 - tol) & (t <= self.tf + tol)))

    def check_time(self, t):
        if not self.contains(t):
            raise ProtocolError(f"time {t} outside protocol window [{self.t0}, {self.tf}]")

    def derivative_mismatch(self, samples: int = 100) -> float:
        """Max gap between ``omega_dot`` and a centred finite difference of ``omega``."""
        end = self.tf if np.isfinite(self.tf) else self.t0 + 20 * np.pi / self.omega0
        h = 1e-5 * (end - self.t0)
        ts = np.linspace(self.t0 + h, end - h, samples)
        fd = (self.omega(ts + h) - self.omega(ts - h)) / (2 * h)
        return float(np.max(np.abs(fd - self.omega_dot(ts))))

    def reversed(self) -> "FrequencyProtocol":
        """The same ramp run backwards in time over the same window."""
        if self.kind not in (ProtocolKind.LINEAR_RAMP, ProtocolKind.SMOOTH_RAMP):
            raise ProtocolError("only ramps can be reversed")
        return FrequencyProtocol(self.kind, self.omega_f, self.omega0, 0.0, self.t0, self.tf)

    def describe(self) -> dict:
        return {"kind": self.kind.value, "omega0": self.omega0, "omega_f": self.omega_f,
                "eps": self.eps, "t0": self.t0, "tf": self.tf}


def protocol_constant(omega0: float, t0: float = 0.0, tf: float = math.inf) -> FrequencyProtocol:
    return FrequencyProtocol(ProtocolKind.CONSTANT, omega0, omega0, 0.0, t0, tf)


def protocol_resonant(omega0: float, eps: float, t0: float = 0.0, tf: float = math.inf) -> FrequencyProtocol:
    """``omega(t) = omega0 [1 + eps sin(2 omega0 t)]``, parametric resonance drive."""
    return FrequencyProtocol(ProtocolKind.RESONANT, omega0, omega0, eps, t0, tf)


def protocol_linear_ramp(omega0: float, omega_f: float, t0: float, tf: float) -> FrequencyProtocol:
    return FrequencyProtocol(ProtocolKind.LINEAR_RAMP, omega0, omega_f, 0.0, t0, tf)


def protocol_smooth_ramp(omega0: float, omega_f: float, t0: float, tf: float) -> FrequencyProtocol:
    """Quintic ramp with vanishing first and second derivatives at both ends."""
    return FrequencyProtocol(ProtocolKind.SMOOTH_RAMP, omega0, omega_f, 0.0, t0, tf)


class HamiltonianKind(str, enum.Enum):
    REFERENCE_XP = "Reference_XP"
    COUNTERDIABATIC = "Counterdiabatic"
    STA_XP = "STA_XP"
    REFERENCE_LADDER0 = "Reference_Ladder0"
    EFFECTIVE = "Effective"
    CANCELLED = "Cancelled"
    EFFECTIVE_PLUS_CD = "EffectivePlusCD"

    @property
    def effective_frame(self) -> bool:
        """True if states under this kind are amplitudes in the instantaneous eigenbasis."""
        return self in (HamiltonianKind.EFFECTIVE, HamiltonianKind.CANCELLED,
                        HamiltonianKind.EFFECTIVE_PLUS_CD)


def _quadratures(dim: int, omega_ref: float):
    x = make_position(dim, omega_ref).entries
    p = make_momentum(dim, omega_ref).entries
    return x, p


def _ladder(dim: int):
    a = make_annihilation(dim).entries
    a2 = a @ a
    return a, a2, a2.conj().T


def dilation_generator_xp(dim: int, omega_ref: float) -> np.ndarray:
    """``x p + p x`` built from quadratures at ``omega_ref``."""
    x, p = _quadratures(dim, omega_ref)
    return x @ p + p @ x


def dilation_generator_ladder(dim: int) -> np.ndarray:
    """``i (a^dag^2 - a^2)``; equals ``x p + p x`` at any reference frequency."""
    _, a2, ad2 = _ladder(dim)
    return 1j * (ad2 - a2)


def _cd_coefficient(protocol: FrequencyProtocol, t):
    return protocol.omega_dot(t) / (4 * protocol.omega(t))


def h0_xp(protocol: FrequencyProtocol, t: float, dim: int) -> FockOperator:
    """``p^2/2 + omega(t)^2 x^2 / 2`` with ``x, p`` at the protocol's ``omega0``."""
    protocol.check_time(t)
    x, p = _quadratures(dim, protocol.omega0)
    w = float(protocol.omega(t))
    return FockOperator(dim, 0.5 * (p @ p) + 0.5 * w**2 * (x @ x), True)


def h1_counterdiabatic(protocol: FrequencyProtocol, t: float, dim: int,
                       omega_ref: float | None = None) -> FockOperator:
    """``-(omega_dot / 4 omega)(x p + p x)``.

    ``omega_ref`` selects the frequency of the quadratures; the result does
    not depend on it.
    """
    protocol.check_time(t)
    ref = protocol.omega0 if omega_ref is None else omega_ref
    c = float(_cd_coefficient(protocol, t))
    return FockOperator(dim, -c * dilation_generator_xp(dim, ref), True)


def h1_counterdiabatic_ladder(protocol: FrequencyProtocol, t: float, dim: int) -> FockOperator:
    """``-i (omega_dot / 4 omega)(a^dag^2 - a^2)`` in the fixed ladder basis."""
    protocol.check_time(t)
    c = float(_cd_coefficient(protocol, t))
    return FockOperator(dim, -c * dilation_generator_ladder(dim), True)


def h_sta_xp(protocol: FrequencyProtocol, t: float, dim: int) -> FockOperator:
    return h0_xp(protocol, t, dim) + h1_counterdiabatic(protocol, t, dim)


def h0_ladder0(protocol: FrequencyProtocol, t: float, dim: int) -> FockOperator:
    """Reference Hamiltonian written with the ladder operators fixed at ``omega0``."""
    protocol.check_time(t)
    w0 = protocol.omega0
    ratio = float(protocol.omega(t)) ** 2 / w0**2
    _, a2, ad2 = _ladder(dim)
    n_half = make_number(dim).entries + 0.5 * np.eye(dim)
    m = w0 * n_half * (ratio / 2 + 0.5) + w0 * (ad2 + a2) * (ratio / 4 - 0.25)
    return FockOperator(dim, m, True)


def h_eff(protocol: FrequencyProtocol, t: float, dim: int) -> FockOperator:
    """Single-mode effective Hamiltonian ``omega a^dag a + i (omega_dot/4 omega)(a^dag^2 - a^2)``."""
    protocol.check_time(t)
    w = float(protocol.omega(t))
    c = float(_cd_coefficient(protocol, t))
    m = w * make_number(dim).entries + c * dilation_generator_ladder(dim)
    return FockOperator(dim, m, True)


def h_cancelled(protocol: FrequencyProtocol, t: float, dim: int) -> FockOperator:
    """``omega(t) a^dag a``."""
    protocol.check_time(t)
    return FockOperator(dim, float(protocol.omega(t)) * make_number(dim).entries, True)


def h_eff_plus_cd(protocol: FrequencyProtocol, t: float, dim: int) -> FockOperator:
    return h_eff(protocol, t, dim) + h1_counterdiabatic(protocol, t, dim)


BUILDERS: dict[HamiltonianKind, Callable[[FrequencyProtocol, float, int], FockOperator]] = {
    HamiltonianKind.REFERENCE_XP: h0_xp,
    HamiltonianKind.COUNTERDIABATIC: h1_counterdiabatic,
    HamiltonianKind.STA_XP: h_sta_xp,
    HamiltonianKind.REFERENCE_LADDER0: h0_ladder0,
    HamiltonianKind.EFFECTIVE: h_eff,
    HamiltonianKind.CANCELLED: h_cancelled,
    HamiltonianKind.EFFECTIVE_PLUS_CD: h_eff_plus_cd,
}


def build(kind: HamiltonianKind | str, protocol: FrequencyProtocol, t: float, dim: int) -> FockOperator:
    return BUILDERS[HamiltonianKind(kind)](protocol, t, dim)


@dataclass(frozen=True)
class HamiltonianTerms:
    """``H(t) = sum_k coefficients(t)[..., k] * operators[k]``.

    ``coefficients`` accepts an array of times and returns shape ``(len(t), K)``.
    """

    operators: tuple
    coefficients: Callable[[np.ndarray], np.ndarray]

    def at(self, t: float) -> np.ndarray:
        c = self.coefficients(np.atleast_1d(float(t)))[0]
        return sum(ck * m for ck, m in zip(c, self.operators))


def hamiltonian_terms(kind: HamiltonianKind | str, protocol: FrequencyProtocol, dim: int) -> HamiltonianTerms:
    kind = HamiltonianKind(kind)
    w0 = protocol.omega0
    eye = np.eye(dim, dtype=complex)
    n = make_number(dim).entries
    w = protocol.omega
    cd = lambda t: _cd_coefficient(protocol, t)  # noqa: E731

    if kind in (HamiltonianKind.REFERENCE_XP, HamiltonianKind.STA_XP,
                HamiltonianKind.COUNTERDIABATIC):
        x, p = _quadratures(dim, w0)
        xp = x @ p + p @ x
        if kind is HamiltonianKind.COUNTERDIABATIC:
            return HamiltonianTerms((xp,), lambda t: np.stack([-cd(t)], -1))
        ops = (0.5 * (p @ p), 0.5 * (x @ x))
        if kind is HamiltonianKind.REFERENCE_XP:
            return HamiltonianTerms(ops, lambda t: np.stack([np.ones_like(t), w(t) ** 2], -1))
        return HamiltonianTerms(ops + (xp,),
                                lambda t: np.stack([np.ones_like(t), w(t) ** 2, -cd(t)], -1))
    if kind is HamiltonianKind.REFERENCE_LADDER0:
        _, a2, ad2 = _ladder(dim)

        def coef(t):
            ratio = w(t) ** 2 / w0**2
            return np.stack([w0 * (ratio / 2 + 0.5), w0 * (ratio / 4 - 0.25)], -1)
        return HamiltonianTerms((n + 0.5 * eye, ad2 + a2), coef)
    if kind is HamiltonianKind.CANCELLED:
        return HamiltonianTerms((n,), lambda t: np.stack([w(t)], -1))
    k_ladder = dilation_generator_ladder(dim)
    if kind is HamiltonianKind.EFFECTIVE:
        return HamiltonianTerms((n, k_ladder), lambda t: np.stack([w(t), cd(t)], -1))
    # EffectivePlusCD keeps both squeezing terms so their cancellation happens in the sum
    return HamiltonianTerms((n, k_ladder, dilation_generator_xp(dim, w0)),
                            lambda t: np.stack([w(t), cd(t), -cd(t)], -1))


def cancellation_residual(protocol: FrequencyProtocol, t: float, dim: int) -> float:
    """Max-entry ``|H_eff + H_1 - omega(t) n|``."""
    diff = h_eff(protocol, t, dim) + h1_counterdiabatic(protocol, t, dim) - h_cancelled(protocol, t, dim)
    return diff.max_entry()
