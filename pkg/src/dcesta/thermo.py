"""Thermal states and the quantum Otto cycle driven by the shortcut.

Work is the energy change of the working mode during a stroke, so a
negative total work means net extraction.  Energies are measured with
``omega (n + 1/2)``: the reference Hamiltonian in its instantaneous
eigenbasis, where the cancelled evolution lives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import evolve_density, sta_cost_diagnostic
from .errors import InvalidParameterError, TruncationError
from .fock import DensityMatrix, expectation, make_number
from .hamiltonians import (
    HamiltonianKind,
    protocol_linear_ramp,
    protocol_smooth_ramp,
)

TAIL_TOL = 1e-10
CLOSURE_TOL = 1e-9
DEFAULT_DIM = 128

RAMPS = {"quintic": protocol_smooth_ramp, "smooth": protocol_smooth_ramp,
         "linear": protocol_linear_ramp}


def _positive(name, v):
    if not np.isfinite(v) or v <= 0:
        raise InvalidParameterError(f"{name} must be positive, got {v!r}")


def thermal_tail(omega: float, T: float, dim: int) -> float:
    """Largest of the Gibbs population and mean-photon contributions beyond level ``dim - 1``.

    With ``q = exp(-omega/T)`` these are ``q^dim`` and ``q^dim (dim + q/(1-q))``;
    bounding the second keeps the truncated ``<n>`` on the coth formula.
    """
    q = math.exp(-omega / T)
    return q**dim * max(1.0, dim + q / -math.expm1(-omega / T))


def _dim_for_tail(omega: float, T: float) -> int:
    dim = max(2, math.ceil(T / omega * math.log(1 / TAIL_TOL)))
    while thermal_tail(omega, T, dim) > TAIL_TOL:
        dim += 1
    return dim


def thermal_state(omega: float, T: float, dim: int) -> DensityMatrix:
    """Gibbs state ``exp(-omega n / T) / Z`` on the truncated basis.

    Raises
    ------
    TruncationError
        If the population or mean photon number the basis cannot hold
        exceeds 1e-10.
    """
    _positive("omega", omega)
    _positive("T", T)
    tail = thermal_tail(omega, T, dim)
    if tail > TAIL_TOL:
        raise TruncationError(f"thermal tail {tail:.3e} beyond dim={dim} exceeds {TAIL_TOL:g}; "
                              f"need dim >= {_dim_for_tail(omega, T)}")
    logw = -omega / T * np.arange(dim)
    p = np.exp(logw - logw.max())
    p /= p.sum()
    return DensityMatrix(dim, np.diag(p).astype(complex))


def mean_photons_thermal(omega: float, T: float) -> float:
    """``coth(omega / 2T) / 2 - 1/2``, written as ``q / (1 - q)`` with ``q = exp(-omega/T)``."""
    _positive("omega", omega)
    _positive("T", T)
    x = omega / T
    return math.exp(-x) / -math.expm1(-x)


@dataclass(frozen=True)
class OttoCycleSpec:
    """Frequencies and bath temperatures of the four-stroke cycle."""

    omega1: float
    omega2: float
    T_c: float
    T_h: float

    def __post_init__(self):
        for name in ("omega1", "omega2", "T_c", "T_h"):
            _positive(name, getattr(self, name))

    @property
    def regime(self) -> str:
        if self.omega1 == self.omega2:
            return "degenerate"
        if self.omega1 < self.omega2 and self.T_c < self.T_h and \
                self.omega2 / self.T_h < self.omega1 / self.T_c:
            return "engine"
        return "other"


@dataclass(frozen=True)
class CycleLedger:
    """Corner energies, stroke works and heats of one cycle.

    Corners: A thermal at (omega1, T_c); B after compression; C thermal at
    (omega2, T_h); D after expansion.
    """

    energies: tuple
    W_comp: float
    W_exp: float
    Q_h: float
    Q_c: float

    @property
    def W_total(self) -> float:
        return self.W_comp + self.W_exp

    @property
    def first_law_residual(self) -> float:
        return abs(self.W_comp + self.W_exp + self.Q_h + self.Q_c)

    @property
    def efficiency(self) -> float:
        """``-W_total / Q_h``; zero when no heat is absorbed."""
        if self.Q_h <= 0:
            return 0.0
        return -self.W_total / self.Q_h


def otto_work_closed_form(spec: OttoCycleSpec):
    """``(W_comp, W_exp, W_total)`` of the ideal cycle."""
    w1, w2 = spec.omega1, spec.omega2
    w_comp = 0.5 * (w2 - w1) / math.tanh(w1 / (2 * spec.T_c))
    w_exp = 0.5 * (w1 - w2) / math.tanh(w2 / (2 * spec.T_h))
    return w_comp, w_exp, w_comp + w_exp


def otto_efficiency(spec: OttoCycleSpec) -> float:
    """``1 - omega1 / omega2``."""
    if spec.regime not in ("engine", "degenerate"):
        raise InvalidParameterError(f"efficiency formula needs the engine regime, spec is {spec.regime!r}")
    return 1.0 - spec.omega1 / spec.omega2


def _energy(rho: DensityMatrix, omega: float) -> float:
    return omega * (expectation(rho, make_number(rho.dim)).real + 0.5)


def _stroke(rho: DensityMatrix, w_from: float, w_to: float, t_f: float, ramp: str,
            dt: float | None) -> DensityMatrix:
    if w_from == w_to:
        return rho
    protocol = RAMPS[ramp](w_from, w_to, 0.0, t_f)
    traj = evolve_density(HamiltonianKind.CANCELLED, protocol, rho, [0.0, t_f], dt=dt)
    return traj.final


def otto_cycle_simulate(spec: OttoCycleSpec, ramp_shape: str = "quintic", t_f: float = 1.0,
                        dim: int = DEFAULT_DIM, dt: float | None = None) -> CycleLedger:
    """Run the four strokes with shortcut-driven (cancelled) compression and expansion.

    Thermalisation is instantaneous replacement by the Gibbs state; the
    heats are the energy jumps at fixed frequency.
    """
    if ramp_shape not in RAMPS:
        raise InvalidParameterError(f"unknown ramp shape {ramp_shape!r}; use one of {sorted(RAMPS)}")
    _positive("t_f", t_f)
    w1, w2 = spec.omega1, spec.omega2
    rho_a = thermal_state(w1, spec.T_c, dim)
    rho_c = thermal_state(w2, spec.T_h, dim)
    e_a = _energy(rho_a, w1)
    rho_b = _stroke(rho_a, w1, w2, t_f, ramp_shape, dt)
    e_b = _energy(rho_b, w2)
    e_c = _energy(rho_c, w2)
    rho_d = _stroke(rho_c, w2, w1, t_f, ramp_shape, dt)
    e_d = _energy(rho_d, w1)
    ledger = CycleLedger((e_a, e_b, e_c, e_d), W_comp=e_b - e_a, W_exp=e_d - e_c,
                         Q_h=e_c - e_b, Q_c=e_a - e_d)
    if ledger.first_law_residual > CLOSURE_TOL:
        raise ArithmeticError(f"first-law residual {ledger.first_law_residual:.3e}")
    return ledger


def otto_sta_cost(spec: OttoCycleSpec, ramp_shape: str, t_f: float, dim: int) -> float:
    """Counterdiabatic cost diagnostic summed over both work strokes (not folded into efficiency)."""
    if spec.omega1 == spec.omega2:
        return 0.0
    total = 0.0
    for a, b in ((spec.omega1, spec.omega2), (spec.omega2, spec.omega1)):
        total += sta_cost_diagnostic(RAMPS[ramp_shape](a, b, 0.0, t_f), [0.0, t_f], dim)
    return total
