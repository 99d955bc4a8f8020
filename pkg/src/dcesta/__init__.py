"""Numerical laboratory for the frequency-modulated quantum oscillator.

Vacuum radiation under parametric driving, counterdiabatic shortcuts and the
Otto cycle they drive, all on a truncated Fock basis with hbar = m = k_B = 1.
"""

__version__ = "0.1.0"

from .dynamics import (  # noqa: E402
    AdiabaticPhases,
    BogoliubovPair,
    Trajectory,
    adiabatic_solution,
    casimir_growth_closed_form,
    evolve_bogoliubov,
    evolve_density,
    evolve_schrodinger,
    instantaneous_eigenstate,
    photon_number_vacuum,
    sta_cost_diagnostic,
    to_lab_frame,
)
from .fock import (  # noqa: E402
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
from .hamiltonians import (  # noqa: E402
    FrequencyProtocol,
    HamiltonianKind,
    h0_ladder0,
    h0_xp,
    h1_counterdiabatic,
    h_cancelled,
    h_eff,
    h_sta_xp,
    protocol_constant,
    protocol_linear_ramp,
    protocol_resonant,
    protocol_smooth_ramp,
)
from .thermo import (  # noqa: E402
    CycleLedger,
    OttoCycleSpec,
    mean_photons_thermal,
    otto_cycle_simulate,
    otto_efficiency,
    otto_work_closed_form,
    thermal_state,
)
