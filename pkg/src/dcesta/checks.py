"""Randomised invariant suite behind ``dcesta check``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import dynamics as dyn
from . import fock
from . import hamiltonians as ham
from . import thermo


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_protocol(rng: np.random.Generator, kind: str | None = None) -> ham.FrequencyProtocol:
    kind = kind or rng.choice(["constant", "resonant", "linear", "quintic"])
    w0 = rng.uniform(0.5, 2.0)
    tf = rng.uniform(0.5, 5.0)
    if kind == "constant":
        return ham.protocol_constant(w0, 0.0, tf)
    if kind == "resonant":
        return ham.protocol_resonant(w0, rng.uniform(0.0, 0.45), 0.0, tf)
    wf = rng.uniform(0.5, 3.0)
    if kind == "linear":
        return ham.protocol_linear_ramp(w0, wf, 0.0, tf)
    return ham.protocol_smooth_ramp(w0, wf, 0.0, tf)


def _draw_time(rng, p):
    return float(rng.uniform(p.t0, p.tf))


def check_ladder_algebra(rng, dim):
    d = dim or 16
    a = fock.make_annihilation(d)
    c = fock.commutator(a, a.H).entries[: d - 2, : d - 2]
    err = np.max(np.abs(c - np.eye(d - 2)))
    return err <= 1e-12, f"max |[a,a+] - 1| = {err:.2e} on levels 0..{d - 3}"


def check_canonical_commutator(rng, dim):
    d = dim or 16
    w = rng.uniform(0.2, 5)
    c = fock.commutator(fock.make_position(d, w), fock.make_momentum(d, w)).entries[: d - 2, : d - 2]
    err = np.max(np.abs(c - 1j * np.eye(d - 2)))
    return err <= 1e-12, f"max |[x,p] - i| = {err:.2e} at omega_ref={w:.3f}"


def check_frequency_independence(rng, dim):
    d = dim or 32
    w1, w2 = rng.uniform(0.1, 10, 2)
    err = np.max(np.abs(ham.dilation_generator_xp(d, w1) - ham.dilation_generator_xp(d, w2)))
    return err <= 1e-12, f"max |(xp+px)@{w1:.3f} - (xp+px)@{w2:.3f}| = {err:.2e}"


def check_squeeze_unitarity(rng, dim):
    d = dim or 64
    rmax = 0.5 * math.log(max(d, 8) / 8)
    r = float(rng.uniform(-rmax, rmax)) if rmax > 0 else 0.25
    s = fock.make_squeeze(d, r).entries
    err = np.max(np.abs(s.conj().T @ s - np.eye(d)))
    return err <= 1e-10, f"unitarity defect {err:.2e} at r={r:.3f}"


def check_protocol_derivatives(rng, dim):
    worst = 0.0
    for _ in range(20):
        p = random_protocol(rng)
        worst = max(worst, p.derivative_mismatch() / p.omega0)
    return worst <= 1e-6, f"worst |omega_dot - FD| / omega0 = {worst:.2e}"


def check_cancellation_identity(rng, dim):
    worst = 0.0
    for _ in range(200):
        p = random_protocol(rng)
        d = dim or int(rng.choice([16, 64, 128]))
        worst = max(worst, ham.cancellation_residual(p, _draw_time(rng, p), d) / p.omega0)
    return worst <= 1e-12, f"worst |H_eff + H_1 - omega n| / omega0 = {worst:.2e}"


def check_representation_equivalence(rng, dim):
    worst = 0.0
    for _ in range(100):
        p = random_protocol(rng)
        d = dim or 32
        t = _draw_time(rng, p)
        diff = ham.h0_xp(p, t, d).entries - ham.h0_ladder0(p, t, d).entries
        worst = max(worst, np.max(np.abs(diff[: d - 2, : d - 2])))
    return worst <= 1e-12, f"worst interior |h0_xp - h0_ladder0| = {worst:.2e}"


def check_cd_reference_independence(rng, dim):
    worst = 0.0
    for _ in range(50):
        p = random_protocol(rng)
        d = dim or 32
        t = _draw_time(rng, p)
        xp = ham.h1_counterdiabatic(p, t, d, omega_ref=float(rng.uniform(0.1, 10))).entries
        lad = ham.h1_counterdiabatic_ladder(p, t, d).entries
        worst = max(worst, np.max(np.abs(xp - lad)))
    return worst <= 1e-12, f"worst |H_1(x,p) - H_1(ladder)| = {worst:.2e}"


def check_hermiticity(rng, dim):
    d = dim or 32
    bad = []
    for _ in range(20):
        p = random_protocol(rng)
        t = _draw_time(rng, p)
        for kind in ham.HamiltonianKind:
            if not ham.build(kind, p, t, d).hermitian:
                bad.append(kind.value)
    return not bad, "all builders hermitian" if not bad else f"non-hermitian: {sorted(set(bad))}"


def check_smooth_ramp_endpoints(rng, dim):
    d = dim or 32
    worst = 0.0
    for _ in range(20):
        p = random_protocol(rng, "quintic")
        for t in (p.t0, p.tf):
            worst = max(worst, ham.h1_counterdiabatic(p, t, d).max_entry())
    return worst <= 1e-12, f"max |H_1| at quintic endpoints = {worst:.2e}"


def check_oracle_equivalence(rng, dim):
    d = dim or 48
    p = ham.protocol_resonant(1.0, float(rng.uniform(0.02, 0.1)), 0.0, 15.0)
    grid = np.linspace(0, 15, 31)
    fock_n = dyn.evolve_schrodinger("Effective", p, fock.StateVector.vacuum(d), grid).photon_numbers()
    bog = dyn.evolve_bogoliubov(p, grid)
    err = np.max(np.abs(fock_n - bog.photon_numbers()))
    defect = bog.metadata["max_defect"]
    ok = err <= 1e-6 and defect <= 1e-9
    return ok, f"max |n_fock - |v|^2| = {err:.2e}, Bogoliubov defect {defect:.2e}"


def check_vacuum_persistence(rng, dim):
    d = dim or 32
    worst = 0.0
    for kind in ("resonant", "linear", "quintic"):
        p = random_protocol(rng, kind)
        grid = np.linspace(p.t0, p.tf, 21)
        n = dyn.evolve_schrodinger("Cancelled", p, fock.StateVector.vacuum(d), grid).photon_numbers()
        worst = max(worst, np.max(np.abs(n)))
    return worst <= 1e-10, f"max <n> from vacuum under cancelled drive = {worst:.2e}"


def check_transitionless(rng, dim):
    d = dim or 64
    p = ham.protocol_smooth_ramp(1.0, 2.0, 0.0, 1.0)
    grid = np.linspace(0, 1, 11)
    r = dyn.transitionless_run(p, 4, grid, d)
    worst = float(np.max(1 - r["with_cd"]))
    ordered = bool(np.all(r["without_cd"][-1] < r["with_cd"][-1]))
    gamma = float(np.max(np.abs(r["gamma"])))
    ok = worst <= 1e-6 and ordered and gamma <= 1e-6
    return ok, f"1 - F_cd <= {worst:.2e}, ordering {'holds' if ordered else 'FAILS'}, |gamma| <= {gamma:.2e}"


def check_energy_scaling(rng, dim):
    d = dim or 64
    worst = 0.0
    rho = thermo.thermal_state(1.0, 1.0, d)
    for w0, wf in ((1.0, 2.0), (2.0, 1.0)):
        p = ham.protocol_smooth_ramp(w0, wf, 0.0, float(rng.uniform(0.5, 3)))
        traj = dyn.evolve_density("Cancelled", p, rho, [p.t0, p.tf])
        e0 = fock.expectation(traj.samples[0], ham.h_cancelled(p, p.t0, d)).real
        e1 = fock.expectation(traj.final, ham.h_cancelled(p, p.tf, d)).real
        worst = max(worst, abs(e1 / e0 - wf / w0))
    return worst <= 1e-8, f"max |E_f/E_0 - omega_f/omega_0| = {worst:.2e}"


def check_thermal_coth(rng, dim):
    d = dim or 128
    worst = 0.0
    for _ in range(10):
        w = float(rng.uniform(0.5, 3))
        T = float(rng.uniform(0.1, 2))
        n = fock.expectation(thermo.thermal_state(w, T, d), fock.make_number(d)).real
        worst = max(worst, abs(n - (0.5 / math.tanh(w / (2 * T)) - 0.5)))
    return worst <= 1e-10, f"max |<n> - coth formula| = {worst:.2e}"


def check_otto(rng, dim):
    d = dim or 128
    spec = thermo.OttoCycleSpec(1.0, 2.0, 0.5, 2.0)
    wc, we, _ = thermo.otto_work_closed_form(spec)
    worst = 0.0
    closure = 0.0
    for t_f in (0.5, 5.0):
        led = thermo.otto_cycle_simulate(spec, "quintic", t_f, d)
        worst = max(worst, abs(led.W_comp / wc - 1), abs(led.W_exp / we - 1))
        closure = max(closure, led.first_law_residual)
    return worst <= 1e-6 and closure <= 1e-9, f"work rel err {worst:.2e}, first-law residual {closure:.2e}"


CHECKS: list[tuple[str, Callable]] = [
    ("ladder_algebra", check_ladder_algebra),
    ("canonical_commutator", check_canonical_commutator),
    ("frequency_independence", check_frequency_independence),
    ("squeeze_unitarity", check_squeeze_unitarity),
    ("protocol_derivatives", check_protocol_derivatives),
    ("cancellation_identity", check_cancellation_identity),
    ("representation_equivalence", check_representation_equivalence),
    ("cd_reference_independence", check_cd_reference_independence),
    ("hermiticity", check_hermiticity),
    ("smooth_ramp_endpoints", check_smooth_ramp_endpoints),
    ("oracle_equivalence", check_oracle_equivalence),
    ("vacuum_persistence", check_vacuum_persistence),
    ("transitionless", check_transitionless),
    ("energy_scaling", check_energy_scaling),
    ("thermal_coth", check_thermal_coth),
    ("otto_cycle", check_otto),
]


def run_checks(seed: int = 0, dim: int | None = None,
               extra_protocol: ham.FrequencyProtocol | None = None) -> list[CheckResult]:
    """Run every invariant; guard errors become failures carrying the error text."""
    results = []
    for i, (name, fn) in enumerate(CHECKS):
        rng = np.random.default_rng([seed, i])
        try:
            ok, detail = fn(rng, dim)
        except Exception as exc:  # report, never hide, guard failures
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail))
    if extra_protocol is not None:
        p = extra_protocol
        d = dim or 32
        try:
            ts = np.linspace(p.t0, p.tf if math.isfinite(p.tf) else p.t0 + 10, 50)
            worst = max(ham.cancellation_residual(p, float(t), d) for t in ts) / p.omega0
            ok, detail = worst <= 1e-12, f"worst residual on given protocol = {worst:.2e}"
        except Exception as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult("cancellation_given_protocol", ok, detail))
    return results
