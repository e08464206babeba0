"""Trapped-ion realization: Lamb-Dicke couplings and a Ramsey read-out.

A laser driving the m-th red motional sideband of a trapped ion realizes
the m-quantum exchange model with an occupation-dependent coupling. The
exact sideband coupling, to all orders in the Lamb-Dicke parameter eta, is
diagonal in the motional number:

    f_m(n) = (g / 2) e^{-eta^2/2}
             sum_l (-1)^l eta^{2l+m} n! / (l! (l+m)! (n-l)!),

the series terminating at l = n. The i^m phase of the displacement
expansion is absorbed into the mode definition so f_m is real; the
vacuum coupling f_m(0) reproduces the model coupling magnitude
|lambda_m| = (g / 2 m!) eta^m e^{-eta^2/2} exactly, and the interaction is
taken in the normal-ordered form sigma_- (a^dag)^m f_m(n_a) + h.c., which
pins <down, m|H|up, 0> = |lambda_m| sqrt(m!) with no O(eta^2) correction
on the vacuum element.

The Ramsey sequence measured here is: carrier pi/2 pulse, adiabatic drive
loop over a wait time snapped to an integer number of doublet cycles
T = 2 pi j / Lambda_vac (full cycles only; odd half-cycles would flip the
interference sign), carrier pi/2 pulse, then the qubit-down population

    p_down = (1 - sin(beta) cos(gamma)) / 2,

with beta the actual pulse rotation angle ((pi/2) e^{-eta^2/2} for timed
pulses of nominal quarter-turn area, exactly pi/2 for idealized
instantaneous pulses). Both pulses use laser phase pi/2; a zero-phase
preparation pulse would read out the sine quadrature instead.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .berry import DriveSchedule, rk4_step_size
from .config import TOL
from .errors import CycleMismatch, NonAdiabatic, NormDrift, TruncationWarning
from .fock import (
    SPIN_DOWN,
    SPIN_UP,
    BasisSpec,
    FockOperator,
    StateVector,
    matrix_exponential,
)
from .model import (
    ModelParams,
    analytic_berry_phase,
    analytic_eigensystem,
    dressed_state_vector,
    falling_product,
)
from .paths import LiftCache, LoopPath, schwinger_frame, theta_for_solid_angle
from .paths import constant_latitude_loop

TWO_PI = 2.0 * math.pi

PULSE_MODES = ("timed", "instantaneous")


@dataclass(frozen=True)
class TrapParams:
    """Laser and trap configuration for one ion.

    g is the bare carrier Rabi frequency, eta the Lamb-Dicke parameter,
    nu the trap frequency, m the driven sideband order (0 = carrier) and
    delta_m the residual detuning from that sideband. omega0 may be given
    instead of (or along with) delta_m; the frames must agree. phi_L is
    the laser phase used by the Ramsey pulses.
    """

    g: float
    eta: float
    nu: float = 0.0
    m: int = 1
    delta_m: float = 0.0
    omega0: float | None = None
    phi_L: float = math.pi / 2.0

    def __post_init__(self):
        if self.g <= 0:
            raise ValueError("g must be positive")
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        if not isinstance(self.m, int) or self.m < 0:
            raise ValueError("sideband order m must be a non-negative integer")
        if self.omega0 is not None:
            expected = self.delta_m + self.m * self.nu
            scale = max(1.0, abs(expected), abs(self.omega0))
            if abs(self.omega0 - expected) > 1e-9 * scale:
                raise ValueError(
                    "inconsistent frames: omega0 - m * nu must equal delta_m"
                )


def lamb_dicke_lambda(trap: TrapParams) -> complex:
    """Effective m-quantum coupling (g / 2 m!) (i eta)^m e^{-eta^2/2},
    including the i^m phase that the series functions absorb."""
    return (
        (trap.g / (2.0 * math.factorial(trap.m)))
        * (1j * trap.eta) ** trap.m
        * math.exp(-0.5 * trap.eta**2)
    )


def g_for_unit_coupling(eta: float, m: int) -> float:
    """Carrier Rabi frequency that makes |lambda_m| = 1."""
    return 2.0 * math.factorial(m) * math.exp(0.5 * eta**2) / eta**m


def effective_model(trap: TrapParams, n: int = 0, n_prime: int = 0) -> ModelParams:
    """Exchange-model parameters realized by the trap's sideband drive."""
    if trap.m < 1:
        raise ValueError("the carrier (m = 0) has no exchange-model reading")
    return ModelParams(
        m=trap.m,
        lambda_m=abs(lamb_dicke_lambda(trap)),
        delta_m=trap.delta_m,
        nu=trap.nu,
        n=n,
        n_prime=n_prime,
    )


def coupling_strength(
    trap: TrapParams, n: int, order: int | None = None, l_max: int | None = None
) -> float:
    """f_order(n), the exact sideband coupling at motional occupation n.

    order defaults to the trap's sideband; the series terminates at l = n
    on its own. Passing l_max truncates earlier, and a truncation that
    drops terms above the relative noise floor warns.
    """
    m = trap.m if order is None else order
    last = n if l_max is None else min(l_max, n)
    total = 0.0
    for l in range(last + 1):
        total += (
            (-1.0) ** l
            * trap.eta ** (2 * l + m)
            * math.factorial(n)
            / (math.factorial(l) * math.factorial(l + m) * math.factorial(n - l))
        )
    value = 0.5 * trap.g * math.exp(-0.5 * trap.eta**2) * total
    if l_max is not None and l_max < n:
        dropped = (
            trap.eta ** (2 * (l_max + 1) + m)
            * math.factorial(n)
            / (
                math.factorial(l_max + 1)
                * math.factorial(l_max + 1 + m)
                * math.factorial(n - l_max - 1)
            )
        )
        if dropped > 1e-12 * max(abs(total), 1e-300):
            warnings.warn(
                f"series for f_{m}({n}) truncated at l = {l_max}; "
                f"next term relative size {dropped / max(abs(total), 1e-300):.1e}",
                TruncationWarning,
                stacklevel=2,
            )
    return value


def _warn_if_marginal(trap: TrapParams, basis: BasisSpec):
    offset = 1 if basis.qubit_included else 0
    n_max = max(label[offset] for label in basis.states)
    if trap.eta**2 * (n_max + 1) > 0.1:
        warnings.warn(
            f"eta^2 (n_max + 1) = {trap.eta ** 2 * (n_max + 1):.3f} > 0.1; "
            "the Lamb-Dicke series is only marginally converged on this basis",
            TruncationWarning,
            stacklevel=3,
        )


def effective_coupling_operator(
    trap: TrapParams, basis: BasisSpec, order: int | None = None
) -> FockOperator:
    """Diagonal operator f_order(n_a) over a two-mode basis."""
    _warn_if_marginal(trap, basis)
    offset = 1 if basis.qubit_included else 0
    diag = [
        coupling_strength(trap, label[offset], order=order) for label in basis.states
    ]
    return FockOperator(basis, np.diag(np.asarray(diag, dtype=complex)))


def sideband_hamiltonian(trap: TrapParams, basis: BasisSpec) -> FockOperator:
    """(delta_m / 2) sigma_z + sigma_- (a^dag)^m f_m(n_a) + h.c., the exact
    occupation-dependent counterpart of the exchange model."""
    if trap.m < 1:
        raise ValueError("sideband order must be at least 1; see carrier_hamiltonian")
    _warn_if_marginal(trap, basis)
    m = trap.m
    mat = np.zeros((basis.dim, basis.dim), dtype=complex)
    dropped = 0.0
    for col, label in enumerate(basis.states):
        spin, n_a = label[0], label[1]
        mat[col, col] += 0.5 * trap.delta_m * (1.0 if spin == SPIN_UP else -1.0)
        if spin == SPIN_UP:
            value = coupling_strength(trap, n_a) * math.sqrt(falling_product(n_a, m))
            target = (SPIN_DOWN, n_a + m) + label[2:]
        else:
            if n_a < m:
                continue
            value = coupling_strength(trap, n_a - m) * math.sqrt(
                falling_product(n_a - m, m)
            )
            target = (SPIN_UP, n_a - m) + label[2:]
        row = basis.index_map.get(target)
        if row is None:
            dropped += value * value
            continue
        mat[row, col] += value
    return FockOperator(basis, mat, dropped)


def carrier_hamiltonian(trap: TrapParams, basis: BasisSpec, phi_L: float | None = None) -> FockOperator:
    """f_0(n_a) (e^{i phi} sigma_+ + e^{-i phi} sigma_-): the qubit drive
    with its exact occupation-dependent Rabi frequency."""
    phi = trap.phi_L if phi_L is None else phi_L
    mat = np.zeros((basis.dim, basis.dim), dtype=complex)
    for col, label in enumerate(basis.states):
        f0 = coupling_strength(trap, label[1], order=0)
        if label[0] == SPIN_DOWN:
            row = basis.index((SPIN_UP,) + label[1:])
            mat[row, col] += f0 * np.exp(1j * phi)
        else:
            row = basis.index((SPIN_DOWN,) + label[1:])
            mat[row, col] += f0 * np.exp(-1j * phi)
    return FockOperator(basis, mat)


def pulse_beta(trap: TrapParams, pulse_mode: str) -> float:
    """Actual two-level rotation angle of one nominal pi/2 carrier pulse
    applied to the motional vacuum."""
    if pulse_mode == "instantaneous":
        return 0.5 * math.pi
    return 0.5 * math.pi * math.exp(-0.5 * trap.eta**2)


def carrier_pulse_operator(
    trap: TrapParams, basis: BasisSpec, pulse_mode: str = "timed"
) -> FockOperator:
    """One nominal pi/2 pulse at the trap's laser phase.

    timed: evolve under the carrier Hamiltonian for pi / (2 g), so the
    rotation angle on occupation n is pi f_0(n) / g (Debye-Waller reduced).
    instantaneous: the idealized exact pi/2 rotation, occupation blind.
    """
    if pulse_mode not in PULSE_MODES:
        raise ValueError(f"pulse_mode must be one of {PULSE_MODES}")
    if pulse_mode == "timed":
        h_c = carrier_hamiltonian(trap, basis)
        return matrix_exponential(h_c, scale=-1j * math.pi / (2.0 * trap.g))
    sigma_phi = np.zeros((basis.dim, basis.dim), dtype=complex)
    for col, label in enumerate(basis.states):
        if label[0] == SPIN_DOWN:
            sigma_phi[basis.index((SPIN_UP,) + label[1:]), col] = np.exp(
                1j * trap.phi_L
            )
        else:
            sigma_phi[basis.index((SPIN_DOWN,) + label[1:]), col] = np.exp(
                -1j * trap.phi_L
            )
    angle = 0.25 * math.pi
    mat = math.cos(angle) * np.eye(basis.dim) - 1j * math.sin(angle) * sigma_phi
    return FockOperator(basis, mat)


def predicted_p_down(trap: TrapParams, gamma: float, pulse_mode: str = "timed") -> float:
    """Ideal interferometer output for a geometric phase gamma."""
    return 0.5 * (1.0 - math.sin(pulse_beta(trap, pulse_mode)) * math.cos(gamma))


def ramsey_basis(m: int) -> BasisSpec:
    """Sectors {0, m}: everything the protocol populates."""
    return BasisSpec(2, (0, m))


def vacuum_splitting(trap: TrapParams) -> float:
    """Half-splitting of the empty doublet, sqrt(delta^2/4 + lambda^2 m!)."""
    lam = abs(lamb_dicke_lambda(trap))
    return math.sqrt(0.25 * trap.delta_m**2 + lam * lam * math.factorial(trap.m))


def snap_to_cycles(trap: TrapParams, total_time: float) -> tuple[float, int, float]:
    """Nearest wait time that is an integer number of full doublet cycles.

    Returns (snapped_time, j, residual). Full cycles only: odd numbers of
    half-cycles flip the sign of the interference term.
    """
    splitting = vacuum_splitting(trap)
    cycle = TWO_PI / splitting
    j = max(1, round(total_time / cycle))
    snapped = j * cycle
    return snapped, j, abs(snapped - total_time)


@dataclass
class RamseyRun:
    """One Ramsey measurement: configuration in, populations out.

    result is None until ramsey_protocol fills it with p_down and
    gamma_inferred. gamma_inferred = arccos(1 - 2 p_down / sin beta ...)
    is reported in [0, pi]; the cosine read-out cannot see the phase sign,
    which the diagnostics flag.
    """

    trap: TrapParams
    path: LoopPath
    schedule: DriveSchedule
    j_cycles: int | None = None
    pulse_mode: str = "timed"
    result: dict | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.pulse_mode not in PULSE_MODES:
            raise ValueError(f"pulse_mode must be one of {PULSE_MODES}")
        if self.schedule.path is not self.path and not np.array_equal(
            self.schedule.path.samples, self.path.samples
        ):
            raise ValueError("schedule.path and path disagree")


def make_ramsey_run(
    trap: TrapParams,
    omega_solid: float,
    total_time: float,
    *,
    n_steps: int = 256,
    pulse_mode: str = "timed",
    time_parametrization: str = "smoothstep",
) -> RamseyRun:
    """Convenience constructor: latitude loop enclosing omega_solid."""
    path = constant_latitude_loop(theta_for_solid_angle(omega_solid), n_steps)
    schedule = DriveSchedule(
        path,
        total_time,
        time_parametrization=time_parametrization,
        dynamic_phase_mode="spin-echo-none",
    )
    return RamseyRun(trap, path, schedule, pulse_mode=pulse_mode)


def ramsey_protocol(
    run: RamseyRun,
    *,
    snap: bool = True,
    leak_threshold: float = TOL.leak_threshold,
) -> RamseyRun:
    """Simulate the full pulse-loop-pulse sequence and fill run.result.

    The wait time is snapped to the nearest integer number of doublet
    cycles (snap=False instead raises CycleMismatch when the requested
    time is off-cycle), the loop drive is integrated with fixed-step RK4
    under H(t) = W(t) H0 W(t)^dag, and leakage out of the instantaneous
    doublet-plus-spectator subspace is tracked throughout.
    """
    trap = run.trap
    model = effective_model(trap)
    basis = ramsey_basis(trap.m)
    frame = schwinger_frame(basis)
    h0 = sideband_hamiltonian(trap, basis)

    t_req = run.schedule.total_time
    snapped, j, residual = snap_to_cycles(trap, t_req)
    if snap:
        t_total = snapped
    else:
        if residual > TOL.cycle_residual * max(1.0, t_req):
            raise CycleMismatch(
                f"wait time {t_req} is {residual:.3e} away from {j} full cycles"
            )
        t_total = t_req

    pulse = carrier_pulse_operator(trap, basis, run.pulse_mode)
    psi = pulse.matrix @ StateVector.basis_state(
        basis, (SPIN_DOWN, 0, 0)
    ).amplitudes

    # followed subspace: the two transported dressed states and the
    # stationary |down, 0, 0> spectator arm
    plus, minus = analytic_eigensystem(model)
    chi_base = np.stack(
        [
            dressed_state_vector(plus, basis).amplitudes,
            dressed_state_vector(minus, basis).amplitudes,
        ]
    )
    spectator = StateVector.basis_state(basis, (SPIN_DOWN, 0, 0)).amplitudes

    h0m = h0.matrix
    scale = float(np.abs(np.linalg.eigvalsh(h0m)).max())
    dt = rk4_step_size(t_total, scale)
    n_steps = max(int(math.ceil(t_total / dt)), 4)
    dt = t_total / n_steps

    lift = LiftCache(frame)
    samples = run.schedule.path.samples
    seg = len(samples) - 1

    def h_at(t: float) -> tuple[np.ndarray, np.ndarray]:
        s = run.schedule.path_parameter(t)
        u = min(max(s, 0.0), 1.0) * seg
        i = min(int(u), seg - 1)
        f = u - i
        th = samples[i, 0] + f * (samples[i + 1, 0] - samples[i, 0])
        ph = samples[i, 1] + f * (samples[i + 1, 1] - samples[i, 1])
        w = lift.matrix(th, ph)
        return w @ h0m @ w.conj().T, w

    h_now, w_start = h_at(0.0)
    p_plus_start = abs(np.vdot(w_start @ chi_base[0], psi)) ** 2
    max_leak = 0.0
    for k in range(n_steps):
        t = k * dt
        h_mid, _ = h_at(t + 0.5 * dt)
        h_end, w_end = h_at(t + dt)
        k1 = -1j * (h_now @ psi)
        k2 = -1j * (h_mid @ (psi + (0.5 * dt) * k1))
        k3 = -1j * (h_mid @ (psi + (0.5 * dt) * k2))
        k4 = -1j * (h_end @ (psi + dt * k3))
        psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        h_now = h_end

        p_in = (
            abs(np.vdot(w_end @ chi_base[0], psi)) ** 2
            + abs(np.vdot(w_end @ chi_base[1], psi)) ** 2
            + abs(np.vdot(spectator, psi)) ** 2
        )
        leak = 1.0 - p_in / float(np.real(np.vdot(psi, psi)))
        if leak > max_leak:
            max_leak = leak
        if leak > leak_threshold:
            raise NonAdiabatic(
                f"loop leak {leak:.3e} exceeded {leak_threshold:.1e} at t = {t + dt:.2f}"
            )

    drift = abs(math.sqrt(float(np.real(np.vdot(psi, psi)))) - 1.0)
    if drift > TOL.norm_drift:
        raise NormDrift(f"norm drifted by {drift:.2e} during the wait evolution")

    # The sector leak above cannot see diabatic mixing between the two
    # dressed branches (both lie inside the followed subspace), so check
    # the net branch transfer over the whole wait separately.
    p_plus_end = abs(np.vdot(w_end @ chi_base[0], psi)) ** 2 / float(
        np.real(np.vdot(psi, psi))
    )
    branch_transfer = abs(p_plus_end - p_plus_start)
    if branch_transfer > leak_threshold:
        raise NonAdiabatic(
            f"branch population moved by {branch_transfer:.3e} over the wait"
            f" (threshold {leak_threshold:.1e}); drive too fast"
        )

    psi = pulse.matrix @ psi
    spins = np.array([label[0] for label in basis.states])
    p_down = float(np.sum(np.abs(psi[spins == SPIN_DOWN]) ** 2))
    beta = pulse_beta(trap, run.pulse_mode)
    cos_gamma = (1.0 - 2.0 * p_down) / math.sin(beta)
    gamma_inferred = math.acos(min(1.0, max(-1.0, cos_gamma)))

    run.j_cycles = j
    run.result = {"p_down": p_down, "gamma_inferred": gamma_inferred}
    run.diagnostics = {
        "max_nonadiabatic_leak": max_leak,
        "branch_transfer": branch_transfer,
        "norm_drift": drift,
        "total_time": t_total,
        "cycle_residual": residual,
        "n_steps": n_steps,
        "pulse_beta": beta,
        "sign_ambiguous": True,
        "contrast": math.sin(beta),
    }
    return run


def ramsey_sweep(
    trap: TrapParams,
    omega_values,
    total_time: float,
    *,
    pulse_mode: str = "timed",
    n_steps: int = 256,
    mapper=map,
) -> list[dict]:
    """Run the protocol over a solid-angle grid; one CSV-ready row each.

    mapper lets callers parallelize the independent runs (for example an
    executor's map); rows come back in grid order either way.
    """

    def one(omega: float) -> dict:
        run = make_ramsey_run(
            trap, omega, total_time, n_steps=n_steps, pulse_mode=pulse_mode
        )
        ramsey_protocol(run)
        gamma_analytic = analytic_berry_phase(effective_model(trap), omega)
        return {
            "m": trap.m,
            "eta": trap.eta,
            "g": trap.g,
            "delta_m": trap.delta_m,
            "omega_solid": omega,
            "total_time": run.diagnostics["total_time"],
            "p_down": run.result["p_down"],
            "gamma_inferred": run.result["gamma_inferred"],
            "gamma_analytic": gamma_analytic,
            "leak": run.diagnostics["max_nonadiabatic_leak"],
        }

    return list(mapper(one, omega_values))
