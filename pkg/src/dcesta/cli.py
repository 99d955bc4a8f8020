"""Command-line experiment runner.

Each subcommand writes a CSV (``#`` metadata lines, one header line, values
with 12 significant digits) to ``--out`` or stdout, prints a JSON run
summary to stderr, and exits 0 only if every per-row tolerance holds.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from contextlib import contextmanager

import numpy as np

from . import __version__
from . import dynamics as dyn
from . import hamiltonians as ham
from . import thermo
from .checks import run_checks
from .errors import LeakageError, ProtocolError, StepSizeError, TruncationError
from .fock import StateVector, make_number

EXIT_OK, EXIT_TOLERANCE, EXIT_RUNTIME = 0, 1, 3

PROTOCOL_CHOICES = ("constant", "resonant", "linear", "quintic")

# (omega0, omegaf, eps, t0, tf, dim) defaults per subcommand
DEFAULTS = {
    "dce-growth": dict(protocol="resonant", omega0=1.0, omegaf=None, eps=0.05, t0=0.0, tf=40.0, dim=64, points=201),
    "sta-cancel": dict(protocol="resonant", omega0=1.0, omegaf=2.0, eps=0.1, t0=0.0, tf=10.0, dim=32, points=101),
    "transitionless": dict(protocol="quintic", omega0=1.0, omegaf=2.0, eps=0.0, t0=0.0, tf=1.0, dim=64, points=21),
    "otto": dict(dim=128),
    "check": dict(protocol=None, omega0=1.0, omegaf=2.0, eps=0.0, t0=0.0, tf=10.0, dim=None, points=None),
}


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.12g}"


def make_protocol(args) -> ham.FrequencyProtocol:
    kind = args.protocol
    if kind == "constant":
        return ham.protocol_constant(args.omega0, args.t0, args.tf)
    if kind == "resonant":
        return ham.protocol_resonant(args.omega0, args.eps, args.t0, args.tf)
    omegaf = args.omegaf if args.omegaf is not None else args.omega0
    if kind == "linear":
        return ham.protocol_linear_ramp(args.omega0, omegaf, args.t0, args.tf)
    return ham.protocol_smooth_ramp(args.omega0, omegaf, args.t0, args.tf)


def parse_sweep(text: str):
    try:
        lo, hi, steps = text.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected min:max:steps, got {text!r}")
    if not (0 < lo <= hi) or steps < 1:
        raise argparse.ArgumentTypeError("need 0 < min <= max and steps >= 1")
    return lo, hi, steps


def sweep_values(lo, hi, steps):
    if steps == 1 or lo == hi:
        return np.full(steps, lo) if lo == hi else np.array([lo])
    return np.geomspace(lo, hi, steps)


def _add_protocol_flags(p, d):
    p.add_argument("--protocol", choices=PROTOCOL_CHOICES, default=d.get("protocol"))
    p.add_argument("--omega0", type=float, default=d.get("omega0"))
    p.add_argument("--omegaf", type=float, default=d.get("omegaf"))
    p.add_argument("--eps", type=float, default=d.get("eps"))
    p.add_argument("--t0", type=float, default=d.get("t0"))
    p.add_argument("--tf", type=float, default=d.get("tf"))
    p.add_argument("--points", type=int, default=d.get("points"), help="output grid points")


def _add_common_flags(p, d):
    p.add_argument("--dim", type=int, default=d.get("dim"))
    p.add_argument("--dt", type=float, default=None, help="largest time step (default 1e-2/omega0)")
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.add_argument("--summary", default=None, help="also write the JSON summary here")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dcesta", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    helps = {
        "dce-growth": "vacuum photon growth under resonant drive, Fock vs Bogoliubov vs sinh^2",
        "sta-cancel": "operator cancellation residual and vacuum persistence under the shortcut",
        "transitionless": "fidelity with instantaneous eigenstates with and without the counterdiabatic term",
        "otto": "Otto-cycle works over a sweep of stroke durations",
        "check": "randomised invariant suite",
    }
    for name, text in helps.items():
        d = DEFAULTS[name]
        p = sub.add_parser(name, help=text, description=text)
        if name != "otto":
            _add_protocol_flags(p, d)
        _add_common_flags(p, d)
        if name == "transitionless":
            p.add_argument("--levels", type=int, default=4)
        if name == "otto":
            p.add_argument("--omega1", type=float, default=1.0)
            p.add_argument("--omega2", type=float, default=2.0)
            p.add_argument("--tc", type=float, default=0.5)
            p.add_argument("--th", type=float, default=2.0)
            p.add_argument("--tf-sweep", type=parse_sweep, default=(0.5, 50.0, 5))
            p.add_argument("--ramp", choices=("quintic", "linear"), default="quintic")
    return parser


def validate(parser, args):
    """Re-validate physical parameters at parse time; errors exit with status 2."""
    try:
        if args.subcommand == "otto":
            args.spec = thermo.OttoCycleSpec(args.omega1, args.omega2, args.tc, args.th)
        elif args.subcommand == "check":
            args.protocol_obj = make_protocol(args) if args.protocol else None
        else:
            if args.subcommand == "dce-growth" and args.protocol != "resonant":
                raise ProtocolError("dce-growth needs --protocol resonant")
            if args.subcommand == "transitionless" and args.protocol not in ("linear", "quintic"):
                raise ProtocolError("transitionless needs a ramp protocol (linear or quintic)")
            if not math.isfinite(args.tf):
                raise ProtocolError("--tf must be finite")
            args.protocol_obj = make_protocol(args)
            if args.points is None or args.points < 2:
                raise ValueError("--points must be at least 2")
        if args.dim is not None and args.dim < 2:
            raise ValueError("--dim must be at least 2")
        if args.dt is not None and args.dt <= 0:
            raise ValueError("--dt must be positive")
    except (ValueError, ProtocolError) as exc:
        parser.error(str(exc))


def config_echo(args) -> dict:
    skip = {"protocol_obj", "spec"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


@contextmanager
def _open_out(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def write_csv(args, header, rows):
    buf = io.StringIO()
    buf.write(f"# dcesta {__version__}\n")
    buf.write(f"# config: {json.dumps(config_echo(args), sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    with _open_out(args.out) as fh:
        fh.write(buf.getvalue())


def _grid(args):
    return np.linspace(args.t0, args.tf, args.points)


def run_dce_growth(args):
    p = args.protocol_obj
    grid = _grid(args)
    n_fock = dyn.evolve_schrodinger("Effective", p, StateVector.vacuum(args.dim), grid,
                                    dt=args.dt).photon_numbers()
    n_bog = dyn.evolve_bogoliubov(p, grid).photon_numbers()
    n_cf = dyn.casimir_growth_closed_form(p.eps, p.omega0, grid)
    rel = np.where(n_cf > 0, np.abs(n_fock - n_cf) / np.where(n_cf > 0, n_cf, 1), np.abs(n_fock - n_cf))
    failures = []
    if np.any(np.abs(n_fock - n_bog) > 1e-6):
        failures.append("n_fock vs n_bogoliubov exceeds 1e-6")
    if p.eps == 0:
        if max(np.max(np.abs(n_fock)), np.max(np.abs(n_bog))) > 1e-10:
            failures.append("photons produced at eps=0")
    else:
        # leading-order law: compare only inside its validity window
        window = (n_fock > 0.1) & (p.eps * p.omega0 * grid <= 2 + 1e-12)
        if np.any(rel[window] > 0.05):
            failures.append("rel_err_fock_vs_closed exceeds 0.05")
    rows = zip(grid, n_fock, n_bog, n_cf, rel)
    write_csv(args, ["t", "n_fock", "n_bogoliubov", "n_closed_form", "rel_err_fock_vs_closed"], rows)
    return failures, {"final_n_fock": float(n_fock[-1]), "final_n_closed_form": float(n_cf[-1])}


def run_sta_cancel(args):
    p = args.protocol_obj
    grid = _grid(args)
    resid = np.array([ham.cancellation_residual(p, float(t), args.dim) for t in grid])
    n_vac = dyn.evolve_schrodinger("Cancelled", p, StateVector.vacuum(args.dim), grid,
                                   dt=args.dt).photon_numbers()
    failures = []
    if np.any(resid > 1e-12 * p.omega0):
        failures.append("operator residual exceeds 1e-12 omega0")
    if np.any(np.abs(n_vac) > 1e-10):
        failures.append("vacuum photon number exceeds 1e-10")
    write_csv(args, ["t", "max_entry_residual", "n_vacuum_under_cancelled"], zip(grid, resid, n_vac))
    return failures, {"max_residual": float(resid.max()), "max_n_vacuum": float(np.abs(n_vac).max())}


def run_transitionless(args):
    p = args.protocol_obj
    grid = _grid(args)
    res = dyn.transitionless_run(p, args.levels, grid, args.dim, dt=args.dt)
    header = ["t"]
    cols = [grid]
    for n in range(args.levels):
        header += [f"fidelity_with_cd_{n}", f"fidelity_without_cd_{n}", f"gamma_{n}"]
        cols += [res["with_cd"][:, n], res["without_cd"][:, n], res["gamma"][:, n]]
    failures = []
    if np.any(res["with_cd"] < 1 - 1e-6):
        failures.append("fidelity_with_cd below 1 - 1e-6")
    if not np.all(res["without_cd"][-1] < res["with_cd"][-1]):
        failures.append("fidelity_without_cd not below fidelity_with_cd at t_f")
    if np.any(np.abs(res["gamma"]) > 1e-6):
        failures.append("geometric phase exceeds 1e-6")
    write_csv(args, header, zip(*cols))
    return failures, {"final_with_cd": res["with_cd"][-1].tolist(),
                      "final_without_cd": res["without_cd"][-1].tolist()}


def run_otto(args):
    spec = args.spec
    wc, we, _ = thermo.otto_work_closed_form(spec)
    eta_cf = thermo.otto_efficiency(spec)
    rows, failures = [], []
    for t_f in sweep_values(*args.tf_sweep):
        led = thermo.otto_cycle_simulate(spec, args.ramp, float(t_f), args.dim, dt=args.dt)
        cost = thermo.otto_sta_cost(spec, args.ramp, float(t_f), args.dim)
        rows.append((t_f, led.W_comp, wc, led.W_exp, we, led.Q_h, led.Q_c, led.efficiency,
                     eta_cf, led.first_law_residual, cost))

        def rel(a, b):
            return abs(a - b) / abs(b) if b != 0 else abs(a)
        if rel(led.W_comp, wc) > 1e-6 or rel(led.W_exp, we) > 1e-6:
            failures.append(f"work mismatch at t_f={t_f:.6g}")
        if led.first_law_residual > 1e-9:
            failures.append(f"first-law residual at t_f={t_f:.6g}")
        if spec.regime == "engine" and abs(led.efficiency - eta_cf) > 1e-6:
            failures.append(f"efficiency mismatch at t_f={t_f:.6g}")
    header = ["t_f", "W_comp_sim", "W_comp_closed", "W_exp_sim", "W_exp_closed", "Q_h", "Q_c",
              "eta", "eta_closed", "first_law_residual", "sta_cost_diagnostic"]
    write_csv(args, header, rows)
    return failures, {"W_comp_closed": wc, "W_exp_closed": we, "eta_closed": eta_cf,
                      "regime": spec.regime}


def run_check(args):
    results = run_checks(args.seed, args.dim, args.protocol_obj)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}", file=sys.stderr)
    if args.out:
        write_csv(args, ["property", "passed", "detail"],
                  [(r.name, int(r.passed), r.detail) for r in results])
    failures = [r.name for r in results if not r.passed]
    return failures, {"checks": len(results)}


RUNNERS = {
    "dce-growth": run_dce_growth,
    "sta-cancel": run_sta_cancel,
    "transitionless": run_transitionless,
    "otto": run_otto,
    "check": run_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    validate(parser, args)
    summary = {"subcommand": args.subcommand, "version": __version__}
    try:
        failures, extra = RUNNERS[args.subcommand](args)
        code = EXIT_OK if not failures else EXIT_TOLERANCE
        summary.update(extra, passed=not failures, failures=failures)
    except (LeakageError, StepSizeError, TruncationError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = EXIT_RUNTIME
        summary.update(passed=False, failures=[f"{type(exc).__name__}: {exc}"])
    text = json.dumps(summary, sort_keys=True)
    print(text, file=sys.stderr)
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
