"""Geometric phases of multiphoton dressed states, with an ion-trap read-out.

The package simulates a two-level system coupled to a pair of bosonic modes
through an m-boson exchange term.  Eigenstate doublets of that interaction
acquire a fractional geometric phase when the coupling is steered around a
closed loop on the sphere; the phase is computed three independent ways
(closed form, discrete holonomy, time integration) plus once more through a
simulated Ramsey interferometer.
"""

from .berry import (
    DriveSchedule,
    PhaseReport,
    adiabatic_evolution,
    adiabaticity_budget,
    calibrate_sign_convention,
    extrapolated_adiabatic_phase,
    holonomy_phase,
    principal_value,
    transport_states,
)
from .config import TOL, Tolerances
from .errors import SimulationError, TruncationWarning
from .fock import (
    BasisSpec,
    DensityMatrix,
    FockOperator,
    StateVector,
    build_ladder,
    build_number,
    build_pauli,
    identity,
    linear_entropy,
    matrix_exponential,
    partial_trace,
    truncated_basis,
)
from .iontrap import (
    RamseyRun,
    TrapParams,
    coupling_strength,
    effective_model,
    g_for_unit_coupling,
    lamb_dicke_lambda,
    make_ramsey_run,
    predicted_p_down,
    ramsey_protocol,
    ramsey_sweep,
    sideband_hamiltonian,
    snap_to_cycles,
)
from .model import (
    DressedState,
    ModelParams,
    TwoAnyonParams,
    analytic_berry_phase,
    analytic_eigensystem,
    build_full_hamiltonian,
    build_interaction_hamiltonian,
    build_two_anyon_hamiltonian,
    default_basis,
    detuning_ratio,
    dressed_state_vector,
    entropy_vs_detuning,
    statistical_factor,
    two_anyon_analytic_phase,
    two_anyon_basis,
    two_anyon_eigenstate,
    two_anyon_energy,
)
from .paths import (
    LoopPath,
    SchwingerFrame,
    build_periodic_unitary,
    build_unitary,
    constant_latitude_loop,
    default_latitude_loop,
    latitude_solid_angle,
    polygon_loop,
    polygon_solid_angle,
    rotated_hamiltonian,
    schwinger_frame,
    sphere_point,
    theta_for_solid_angle,
)

__version__ = "0.1.0"

__all__ = [
    "BasisSpec",
    "DensityMatrix",
    "DressedState",
    "DriveSchedule",
    "FockOperator",
    "LoopPath",
    "ModelParams",
    "PhaseReport",
    "RamseyRun",
    "SchwingerFrame",
    "SimulationError",
    "StateVector",
    "TOL",
    "Tolerances",
    "TrapParams",
    "TruncationWarning",
    "TwoAnyonParams",
    "adiabatic_evolution",
    "adiabaticity_budget",
    "analytic_berry_phase",
    "analytic_eigensystem",
    "build_full_hamiltonian",
    "build_interaction_hamiltonian",
    "build_ladder",
    "build_number",
    "build_pauli",
    "build_periodic_unitary",
    "build_two_anyon_hamiltonian",
    "build_unitary",
    "calibrate_sign_convention",
    "constant_latitude_loop",
    "coupling_strength",
    "default_basis",
    "default_latitude_loop",
    "detuning_ratio",
    "dressed_state_vector",
    "effective_model",
    "entropy_vs_detuning",
    "extrapolated_adiabatic_phase",
    "g_for_unit_coupling",
    "holonomy_phase",
    "identity",
    "lamb_dicke_lambda",
    "latitude_solid_angle",
    "linear_entropy",
    "make_ramsey_run",
    "matrix_exponential",
    "partial_trace",
    "polygon_loop",
    "polygon_solid_angle",
    "predicted_p_down",
    "principal_value",
    "ramsey_protocol",
    "ramsey_sweep",
    "rotated_hamiltonian",
    "schwinger_frame",
    "sideband_hamiltonian",
    "snap_to_cycles",
    "sphere_point",
    "statistical_factor",
    "theta_for_solid_angle",
    "transport_states",
    "truncated_basis",
    "two_anyon_analytic_phase",
    "two_anyon_basis",
    "two_anyon_eigenstate",
    "two_anyon_energy",
]
