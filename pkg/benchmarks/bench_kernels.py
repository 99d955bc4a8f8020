"""Compare the compiled and numpy time-stepping kernels.

    python benchmarks/bench_kernels.py [--repeat 3]

Times a resonant vacuum-growth run (one column) and a thermal-state Otto
compression stroke (many columns) on each available backend and checks
that both produce the same states.
"""

import argparse
import time

import numpy as np

from dcesta import _kernels
from dcesta import dynamics as dyn
from dcesta import hamiltonians as ham
from dcesta import thermo
from dcesta.fock import StateVector


def dce_growth():
    p = ham.protocol_resonant(1.0, 0.05, 0.0, 40.0)
    traj = dyn.evolve_schrodinger("Effective", p, StateVector.vacuum(64), np.linspace(0, 40, 201),
                                  converge=False)
    return traj.final.amplitudes


def thermal_stroke():
    p = ham.protocol_smooth_ramp(1.0, 2.0, 0.0, 5.0)
    rho = thermo.thermal_state(1.0, 2.0, 128)
    return dyn.evolve_density("STA_XP", p, rho, [0.0, 5.0], converge=False).final.entries


def sta_lab_frame():
    p = ham.protocol_smooth_ramp(1.0, 2.0, 0.0, 20.0)
    psi0 = dyn.instantaneous_eigenstate(0, p, 0.0, 128)
    return dyn.evolve_schrodinger("STA_XP", p, psi0, [0.0, 20.0], converge=False).final.amplitudes


CASES = {"dce_growth dim=64": dce_growth, "thermal_stroke dim=128": thermal_stroke,
         "sta_lab_frame dim=128": sta_lab_frame}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"backends: {', '.join(_kernels.AVAILABLE)}")
    print(f"{'case':<24}{'backend':<10}{'best [s]':>10}{'speedup':>10}{'max diff':>12}")
    for name, fn in CASES.items():
        times, outs = {}, {}
        for backend in _kernels.AVAILABLE:
            _kernels.set_backend(backend)
            best = np.inf
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                outs[backend] = fn()
                best = min(best, time.perf_counter() - t0)
            times[backend] = best
        ref = outs["python"]
        for backend in _kernels.AVAILABLE:
            diff = np.max(np.abs(outs[backend] - ref))
            print(f"{name:<24}{backend:<10}{times[backend]:>10.3f}"
                  f"{times['python'] / times[backend]:>10.1f}{diff:>12.1e}")
    _kernels.set_backend(_kernels.AVAILABLE[0])


if __name__ == "__main__":
    main()
