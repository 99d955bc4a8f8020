"""Time evolution on the truncated Fock basis and its independent oracles.

Two routes to the driven-oscillator dynamics live here:

* :func:`evolve_schrodinger` steps a state (or a block of states) with
  fourth-order Magnus exponentials of any :class:`HamiltonianKind`;
* :func:`evolve_bogoliubov` integrates the two-coefficient Heisenberg
  equations for ``a_H = u a + v a^dag`` with an adaptive Runge-Kutta method.

Kinds built in the fixed ladder basis at ``omega0`` with the effective
Hamiltonian (``Effective``, ``Cancelled``, ``EffectivePlusCD``) evolve
amplitudes in the instantaneous eigenbasis; :func:`to_lab_frame` maps them
back with the squeeze ``S(r(t))``.  They also omit the zero-point term, so
they differ from x,p-based evolution by a global phase.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy import integrate

from . import _kernels
from .errors import (
    DimensionError,
    IntegratorAccuracyError,
    LeakageError,
    LeakageWarning,
    ProtocolError,
    QuadratureError,
    StepSizeError,
    TruncationError,
)
from .fock import (
    DensityMatrix,
    FockOperator,
    StateVector,
    fidelity,
    make_number,
    make_squeeze,
    squeeze_matrix,
)
from .hamiltonians import (
    FrequencyProtocol,
    HamiltonianKind,
    dilation_generator_xp,
    h0_xp,
    hamiltonian_terms,
)

__all__ = [
    "AdiabaticPhases",
    "BogoliubovPair",
    "Trajectory",
    "adiabatic_solution",
    "casimir_growth_closed_form",
    "dynamical_phase",
    "evolve_bogoliubov",
    "evolve_density",
    "evolve_schrodinger",
    "fidelity",
    "geometric_phase",
    "instantaneous_eigenstate",
    "photon_number_vacuum",
    "squeeze_parameter",
    "sta_cost_diagnostic",
    "to_lab_frame",
    "transitionless_run",
]

NORM_DRIFT_TOL = 1e-10
HALVING_TOL = 1e-9
LEAKAGE_TOL = 1e-6
BOGOLIUBOV_TOL = 1e-9
DEFAULT_STEP = 1e-2  # in units of 1/omega0

_SQRT3 = math.sqrt(3.0)


@dataclass
class Trajectory:
    """Samples of an evolution on an increasing time grid."""

    times: np.ndarray
    samples: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, float)
        if self.times.ndim != 1 or len(self.times) != len(self.samples):
            raise ValueError("times and samples must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    @property
    def final(self):
        return self.samples[-1]

    def expect(self, op: FockOperator) -> np.ndarray:
        from .fock import expectation

        return np.array([expectation(s, op) for s in self.samples])

    def photon_numbers(self) -> np.ndarray:
        s0 = self.samples[0]
        if isinstance(s0, BogoliubovPair):
            return np.array([s.photon_number for s in self.samples])
        return self.expect(make_number(s0.dim)).real


def _check_grid(protocol: FrequencyProtocol, grid) -> np.ndarray:
    grid = np.asarray(grid, float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("time grid needs at least two points")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("time grid must be strictly increasing")
    if not protocol.contains(grid):
        raise ProtocolError(f"grid [{grid[0]}, {grid[-1]}] leaves protocol window "
                            f"[{protocol.t0}, {protocol.tf}]")
    return grid


def _schedule(grid: np.ndarray, dt: float):
    """Substep start times, sizes and the record mask for a grid."""
    gaps = np.diff(grid)
    counts = np.maximum(1, np.ceil(gaps / dt * (1 - 1e-12)).astype(int))
    sizes = np.repeat(gaps / counts, counts)
    starts = np.repeat(grid[:-1], counts) + sizes * np.concatenate(
        [np.arange(c) for c in counts])
    record = np.zeros(sizes.size, bool)
    record[np.cumsum(counts) - 1] = True
    return starts, sizes, record


class _Generator:
    """Band-stored basis of the per-step generators for one Hamiltonian kind."""

    def __init__(self, kind: HamiltonianKind, protocol: FrequencyProtocol, dim: int, scheme: str):
        if scheme not in ("magnus4", "midpoint"):
            raise ValueError(f"unknown scheme {scheme!r}")
        self.terms = hamiltonian_terms(kind, protocol, dim)
        self.scheme = scheme
        ops = list(self.terms.operators)
        self.pairs = []
        if scheme == "magnus4":
            scale = max(np.max(np.abs(m)) for m in ops)
            base = len(ops)
            for j in range(base):
                for k in range(j + 1, base):
                    c = ops[j] @ ops[k] - ops[k] @ ops[j]
                    if np.max(np.abs(c)) > 1e-14 * scale**2:
                        self.pairs.append((j, k))
                        ops.append(-1j * c)
        self.bands = _kernels.to_bands(np.array(ops))

    def weights(self, starts: np.ndarray, sizes: np.ndarray) -> np.ndarray:
        coef = self.terms.coefficients
        if self.scheme == "midpoint":
            return sizes[:, None] * coef(starts + sizes / 2)
        c1 = coef(starts + (0.5 - _SQRT3 / 6) * sizes)
        c2 = coef(starts + (0.5 + _SQRT3 / 6) * sizes)
        cols = [sizes[:, None] / 2 * (c1 + c2)]
        for j, k in self.pairs:
            beta = c2[:, j] * c1[:, k] - c2[:, k] * c1[:, j]
            cols.append((_SQRT3 / 12 * sizes**2 * beta)[:, None])
        return np.concatenate(cols, axis=1)


def _run(gen: _Generator, block: np.ndarray, grid: np.ndarray, dt: float) -> np.ndarray:
    starts, sizes, record = _schedule(grid, dt)
    out = _kernels.propagate_banded(gen.bands, gen.weights(starts, sizes), block, record)
    return np.concatenate([block[None], out], axis=0)


def _block_fidelity_change(a: np.ndarray, b: np.ndarray, weights: np.ndarray) -> float:
    overlaps = np.abs(np.einsum("ic,ic->c", a.conj(), b)) ** 2
    return float(np.max(weights * (1 - overlaps), initial=0.0))


def _propagate(kind, protocol, block, grid, dt, scheme, converge, max_halvings, col_weights):
    kind = HamiltonianKind(kind)
    grid = _check_grid(protocol, grid)
    dim = block.shape[0]
    gen = _Generator(kind, protocol, dim, scheme)
    dt = DEFAULT_STEP / protocol.omega0 if dt is None else float(dt)
    if dt <= 0:
        raise StepSizeError("step size must be positive")
    states = _run(gen, block, grid, dt)
    change = None
    if converge:
        for _ in range(max_halvings):
            finer = _run(gen, block, grid, dt / 2)
            change = _block_fidelity_change(states[-1], finer[-1], col_weights)
            dt /= 2
            states = finer
            if change < HALVING_TOL:
                break
        else:
            raise StepSizeError(
                f"step halving still changes the final fidelity by {change:.3e} "
                f"after {max_halvings} halvings (dt={dt:.3e})")
    norms = np.linalg.norm(states, axis=1)
    drift = float(np.max(np.abs(norms - 1)))
    if drift > NORM_DRIFT_TOL:
        raise StepSizeError(f"norm drift {drift:.3e} exceeds {NORM_DRIFT_TOL:g} (dt={dt:.3e})")
    top = np.abs(states[:, -2:, :]) ** 2
    leak = float(np.max(np.einsum("tlc,c->t", top, col_weights)))
    meta = {
        "kind": kind.value,
        "protocol": protocol.describe(),
        "dim": dim,
        "dt": dt,
        "scheme": scheme,
        "backend": _kernels.get_backend(),
        "norm_drift": drift,
        "halving_change": change,
        "leakage": leak,
    }
    return grid, states, meta


def _handle_leakage(meta: dict, leakage: str):
    if meta["leakage"] <= LEAKAGE_TOL or leakage == "ignore":
        return
    msg = (f"population {meta['leakage']:.3e} on the top two levels of dim={meta['dim']} "
           f"exceeds {LEAKAGE_TOL:g}; increase dim")
    if leakage == "raise":
        raise LeakageError(msg)
    warnings.warn(msg, LeakageWarning, stacklevel=3)


def evolve_schrodinger(kind: HamiltonianKind | str, protocol: FrequencyProtocol,
                       psi0: StateVector, grid: Sequence[float], *, dt: float | None = None,
                       scheme: str = "magnus4", converge: bool = True, max_halvings: int = 8,
                       leakage: str = "raise") -> Trajectory:
    """Integrate ``i d|psi>/dt = H(t)|psi>`` and sample the state on ``grid``.

    Parameters
    ----------
    kind
        Which Hamiltonian generates the motion.
    protocol
        Frequency drive; ``grid`` must lie inside its window.
    psi0
        Initial state at ``grid[0]``.
    dt
        Largest substep; defaults to ``1e-2 / omega0``.
    scheme
        ``"magnus4"`` (two-point Gauss Magnus with commutator) or ``"midpoint"``.
    converge
        Halve the step until the final-state fidelity changes by less than
        1e-9 between successive halvings.  The finer trajectory is returned.
    leakage
        ``"raise"``, ``"warn"`` or ``"ignore"`` when more than 1e-6 of the
        population reaches the top two levels.

    Raises
    ------
    StepSizeError
        Norm drift above 1e-10 or no convergence within ``max_halvings``.
    LeakageError
        Truncation leakage with ``leakage="raise"``.
    """
    block = np.asarray(psi0.amplitudes, complex)[:, None].copy()
    grid, states, meta = _propagate(kind, protocol, block, grid, dt, scheme, converge,
                                    max_halvings, np.ones(1))
    _handle_leakage(meta, leakage)
    samples = [StateVector(psi0.dim, s[:, 0]) for s in states]
    return Trajectory(grid, samples, meta)


def evolve_density(kind: HamiltonianKind | str, protocol: FrequencyProtocol,
                   rho0: DensityMatrix, grid: Sequence[float], *, dt: float | None = None,
                   scheme: str = "magnus4", converge: bool = True, max_halvings: int = 8,
                   leakage: str = "raise", cutoff: float = 1e-18) -> Trajectory:
    """Unitary evolution ``rho -> U rho U^dag`` by propagating the eigenvectors of ``rho0``.

    Eigenvectors with weight below ``cutoff`` are dropped; the evolved state
    is renormalised by the retained weight.
    """
    p, vecs = np.linalg.eigh(rho0.entries)
    keep = p > cutoff
    p, vecs = p[keep], vecs[:, keep]
    p = p / p.sum()
    grid, states, meta = _propagate(kind, protocol, vecs.astype(complex), grid, dt, scheme,
                                    converge, max_halvings, p)
    _handle_leakage(meta, leakage)
    samples = []
    for s in states:
        m = (s * p) @ s.conj().T
        samples.append(DensityMatrix(rho0.dim, (m + m.conj().T) / 2))
    meta["retained_columns"] = int(keep.sum())
    return Trajectory(grid, samples, meta)


# --- Bogoliubov oracle -----------------------------------------------------


@dataclass(frozen=True)
class BogoliubovPair:
    """Heisenberg-picture coefficients with ``a_H = u a + v a^dag``."""

    u: complex
    v: complex

    def __post_init__(self):
        defect = abs(abs(self.u) ** 2 - abs(self.v) ** 2 - 1)
        if defect > BOGOLIUBOV_TOL:
            raise IntegratorAccuracyError(f"|u|^2 - |v|^2 - 1 = {defect:.3e} exceeds {BOGOLIUBOV_TOL:g}")

    @property
    def photon_number(self) -> float:
        return abs(self.v) ** 2

    @property
    def defect(self) -> float:
        return abs(abs(self.u) ** 2 - abs(self.v) ** 2 - 1)


def _bogoliubov_rhs(protocol: FrequencyProtocol):
    def rhs(t, y):
        w = protocol.omega(t)
        k = protocol.omega_dot(t) / (2 * w)
        u = complex(y[0], y[1])
        v = complex(y[2], y[3])
        du = -1j * w * u + k * v.conjugate()
        dv = -1j * w * v + k * u.conjugate()
        return (du.real, du.imag, dv.real, dv.imag)
    return rhs


def evolve_bogoliubov(protocol: FrequencyProtocol, grid: Sequence[float], *,
                      rtol: float = 1e-12, atol: float = 1e-14) -> Trajectory:
    """Solve ``u' = -i w u + (w'/2w) v*``, ``v' = -i w v + (w'/2w) u*`` from ``(1, 0)``.

    Raises
    ------
    IntegratorAccuracyError
        If the solver fails or ``|u|^2 - |v|^2`` leaves 1 by more than 1e-9.
    """
    grid = _check_grid(protocol, grid)
    max_step = 0.25 / protocol.omega0
    sol = integrate.solve_ivp(_bogoliubov_rhs(protocol), (grid[0], grid[-1]), (1.0, 0.0, 0.0, 0.0),
                              method="DOP853", t_eval=grid, rtol=rtol, atol=atol,
                              max_step=max_step)
    if not sol.success:
        raise IntegratorAccuracyError(f"Bogoliubov integration failed: {sol.message}")
    u = sol.y[0] + 1j * sol.y[1]
    v = sol.y[2] + 1j * sol.y[3]
    samples = [BogoliubovPair(complex(a), complex(b)) for a, b in zip(u, v)]
    meta = {"protocol": protocol.describe(), "method": "DOP853", "rtol": rtol, "atol": atol,
            "max_defect": max(s.defect for s in samples)}
    return Trajectory(grid, samples, meta)


def photon_number_vacuum(pair: BogoliubovPair) -> float:
    """Photons created from the vacuum, ``|v|^2``."""
    return pair.photon_number


def casimir_growth_closed_form(eps: float, omega0: float, t):
    """Resonant vacuum-radiation law ``sinh^2(eps omega0 t / 2)``."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return np.sinh(eps * omega0 * np.asarray(t, float) / 2) ** 2


# --- instantaneous eigenbasis -----------------------------------------------


def squeeze_parameter(protocol: FrequencyProtocol, t) -> float:
    """``r(t) = ln(omega(t)/omega0) / 2``: the squeeze mapping ``|n>`` to ``|n(t)>``."""
    return 0.5 * math.log(float(protocol.omega(t)) / protocol.omega0)


def _check_level(n: int, dim: int):
    if n < 0 or n > dim / 4:
        raise TruncationError(f"level {n} needs dim >= {4 * n}; got dim={dim}")


def instantaneous_eigenstate(n: int, protocol: FrequencyProtocol, t: float, dim: int,
                             residual_tol: float = 1e-8) -> StateVector:
    """Eigenstate ``|n(t)>`` of ``p^2/2 + omega(t)^2 x^2/2`` as ``S(r)|n>``.

    Raises
    ------
    TruncationError
        If ``n > dim/4``, the squeeze is too strong for ``dim``, or the
        eigen-residual exceeds ``residual_tol``.
    """
    _check_level(n, dim)
    protocol.check_time(t)
    s = make_squeeze(dim, squeeze_parameter(protocol, t))
    vec = s.entries[:, n]
    energy = float(protocol.omega(t)) * (n + 0.5)
    resid = np.linalg.norm(h0_xp(protocol, t, dim).entries @ vec - energy * vec)
    if resid > residual_tol:
        raise TruncationError(f"eigen-residual {resid:.3e} for level {n} at t={t} exceeds "
                              f"{residual_tol:g}; increase dim")
    return StateVector(dim, vec)


def to_lab_frame(state: StateVector, protocol: FrequencyProtocol, t: float) -> StateVector:
    """Map amplitudes in the instantaneous eigenbasis to the fixed basis at ``omega0``."""
    s = make_squeeze(state.dim, squeeze_parameter(protocol, t))
    return StateVector.normalized(s.entries @ state.amplitudes)


@dataclass(frozen=True)
class AdiabaticPhases:
    """Dynamical phase ``theta`` and geometric phase ``gamma`` (radians) of level ``n``."""

    n: int
    theta: float
    gamma: float


def dynamical_phase(n: int, protocol: FrequencyProtocol, t: float, rtol: float = 1e-10) -> float:
    """``-(n + 1/2) int_{t0}^{t} omega dt'`` by adaptive quadrature."""
    protocol.check_time(t)
    if t == protocol.t0:
        return 0.0
    span = t - protocol.t0
    limit = max(200, int(4 * protocol.omega0 * span))
    val, err = integrate.quad(lambda s: float(protocol.omega(s)), protocol.t0, t,
                              epsabs=0.0, epsrel=1e-13, limit=limit)
    if err > rtol * abs(val):
        raise QuadratureError(f"quadrature error {err:.3e} exceeds {rtol:g} relative")
    return -(n + 0.5) * val


def _berry_connection(levels: int, protocol: FrequencyProtocol, t: np.ndarray, dim: int,
                      h: float) -> np.ndarray:
    """``<n(t)|d/dt n(t)>`` for levels ``0..levels-1`` by Richardson-extrapolated central differences."""
    w0 = protocol.omega0

    def basis(s):
        return squeeze_matrix(dim, 0.5 * math.log(float(protocol.omega(s)) / w0))[:, :levels]

    out = np.empty((len(t), levels), complex)
    for i, s in enumerate(t):
        v = basis(s)
        d1 = (basis(s + h) - basis(s - h)) / (2 * h)
        d2 = (basis(s + h / 2) - basis(s - h / 2)) / h
        deriv = (4 * d2 - d1) / 3
        out[i] = np.einsum("il,il->l", v.conj(), deriv)
    return out


def geometric_phase(n: int, protocol: FrequencyProtocol, t: float, dim: int,
                    nodes: int = 16) -> float:
    """``i int_{t0}^{t} <n|d_t n> dt'`` with Gauss-Legendre quadrature of a finite-difference connection."""
    return float(geometric_phases(n + 1, protocol, [protocol.t0, t], dim, nodes)[-1, n])


def geometric_phases(levels: int, protocol: FrequencyProtocol, grid, dim: int,
                     nodes: int = 8) -> np.ndarray:
    """Cumulative geometric phases on ``grid``; shape ``(len(grid), levels)``."""
    grid = np.asarray(grid, float)
    protocol.check_time(grid)
    x, wq = np.polynomial.legendre.leggauss(nodes)
    scale = protocol.duration if np.isfinite(protocol.duration) else 1.0 / protocol.omega0
    h = 1e-4 * scale
    gammas = np.zeros((len(grid), levels))
    for i, (a, b) in enumerate(zip(grid[:-1], grid[1:])):
        ts = 0.5 * (b - a) * x + 0.5 * (a + b)
        conn = _berry_connection(levels, protocol, ts, dim, h)
        piece = 1j * 0.5 * (b - a) * (wq @ conn)
        gammas[i + 1] = gammas[i] + piece.real
    return gammas


def adiabatic_solution(n: int, protocol: FrequencyProtocol, t: float, dim: int):
    """Adiabatic-approximation state ``e^{i gamma} e^{i theta} |n(t)>`` and its phases."""
    eig = instantaneous_eigenstate(n, protocol, t, dim)
    phases = AdiabaticPhases(n, dynamical_phase(n, protocol, t), geometric_phase(n, protocol, t, dim))
    state = StateVector(dim, np.exp(1j * (phases.gamma + phases.theta)) * eig.amplitudes)
    return state, phases


# --- diagnostics ------------------------------------------------------------


def sta_cost_diagnostic(protocol: FrequencyProtocol, grid, dim: int) -> float:
    """``int ||H_1(t)|| dt`` over the grid span, with the spectral norm.

    ``H_1(t) = c(t) K`` for a fixed matrix ``K``, so the integrand is
    ``|c(t)| ||K||``; the scalar part goes to adaptive quadrature.
    """
    grid = _check_grid(protocol, grid)
    knorm = np.linalg.norm(dilation_generator_xp(dim, protocol.omega0), ord=2)
    coef = lambda s: abs(float(protocol.omega_dot(s) / (4 * protocol.omega(s))))  # noqa: E731
    span = grid[-1] - grid[0]
    limit = max(200, int(4 * protocol.omega0 * span))
    val, _ = integrate.quad(coef, grid[0], grid[-1], epsabs=1e-14, epsrel=1e-12, limit=limit)
    return float(knorm * val)


def transitionless_run(protocol: FrequencyProtocol, levels: int, grid, dim: int,
                       frame: str = "effective", dt: float | None = None) -> dict[str, Any]:
    """Fidelities with ``|n(t)>`` when evolving ``|n(t0)>`` with and without the counterdiabatic term.

    ``frame="effective"`` evolves under ``EffectivePlusCD`` / ``Effective``
    and maps to the lab frame; ``frame="lab"`` evolves under ``STA_XP`` /
    ``Reference_XP`` directly.  Returns arrays of shape ``(len(grid), levels)``
    under keys ``with_cd``, ``without_cd`` and ``gamma``.
    """
    grid = _check_grid(protocol, grid)
    if levels < 1:
        raise DimensionError("need at least one level")
    _check_level(levels - 1, dim)
    if frame == "effective":
        kinds = (HamiltonianKind.EFFECTIVE_PLUS_CD, HamiltonianKind.EFFECTIVE)
    elif frame == "lab":
        kinds = (HamiltonianKind.STA_XP, HamiltonianKind.REFERENCE_XP)
    else:
        raise ValueError(f"unknown frame {frame!r}")
    eig = [[instantaneous_eigenstate(n, protocol, t, dim) for n in range(levels)] for t in grid]
    result = {}
    for key, kind in zip(("with_cd", "without_cd"), kinds):
        fids = np.empty((len(grid), levels))
        for n in range(levels):
            start = StateVector.number(n, dim) if frame == "effective" else eig[0][n]
            traj = evolve_schrodinger(kind, protocol, start, grid, dt=dt)
            for i, (t, s) in enumerate(zip(grid, traj.samples)):
                lab = to_lab_frame(s, protocol, t) if frame == "effective" else s
                fids[i, n] = fidelity(lab, eig[i][n])
        result[key] = fids
    result["gamma"] = geometric_phases(levels, protocol, grid, dim)
    return result
