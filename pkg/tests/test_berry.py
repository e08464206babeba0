"""Holonomy and time-evolution routes to the loop phase.

The two routes are deliberately independent: the holonomy tests freeze
their expectations from the closed-form phase (itself pinned to generator
expectation values in test_model), and the adiabatic tests compare both
against that closed form and against the holonomy result, so a common-mode
error cannot hide.
"""

import math

import numpy as np
import pytest

from anyonjc.berry import (
    DriveSchedule,
    adiabatic_evolution,
    adiabaticity_budget,
    calibrate_sign_convention,
    extrapolated_adiabatic_phase,
    holonomy_phase,
    principal_value,
    rk4_step_size,
    transport_states,
)
from anyonjc.config import TOL
from anyonjc.errors import NonAdiabatic, NormDrift, VanishingOverlap
from anyonjc.model import (
    ModelParams,
    analytic_berry_phase,
    analytic_eigensystem,
    build_interaction_hamiltonian,
    default_basis,
    dressed_state_vector,
)
from anyonjc.paths import constant_latitude_loop, default_latitude_loop, schwinger_frame

TWO_PI = 2.0 * math.pi


def doublet_setup(m=2, delta=0.0, branch="+", n=0, n_prime=0):
    params = ModelParams(m=m, delta_m=delta, n=n, n_prime=n_prime)
    frame = schwinger_frame(default_basis(params))
    which = 0 if branch == "+" else 1
    state = dressed_state_vector(analytic_eigensystem(params)[which])
    return params, frame, state


def test_principal_value_branch_cut():
    assert principal_value(0.3) == pytest.approx(0.3)
    assert principal_value(TWO_PI + 0.3) == pytest.approx(0.3)
    assert principal_value(-TWO_PI + 0.3) == pytest.approx(0.3)
    assert principal_value(math.pi) == pytest.approx(math.pi)
    assert principal_value(-math.pi) == pytest.approx(math.pi)
    assert principal_value(0.0) == 0.0


def test_sign_calibration_fixed_and_idempotent():
    assert calibrate_sign_convention() == -1
    assert calibrate_sign_convention() == calibrate_sign_convention()


class TestHolonomy:
    def test_zero_area_loop(self):
        params, frame, state = doublet_setup()
        path = constant_latitude_loop(0.0, 64)
        report = holonomy_phase(state, frame, path)
        assert abs(report.gamma_total) < 1e-9
        assert report.winding == 0

    def test_bare_spin_state_gets_half_omega(self):
        # with the coupling off, the transported |up, 1, 0> doublet member
        # must pick up Omega * (n - n') / 2 = Omega / 2
        params, frame, state = doublet_setup()
        bare = ModelParams(m=1, lambda_m=0.0, delta_m=1.0, n=1, free_mode=True)
        frame = schwinger_frame(default_basis(bare))
        state = dressed_state_vector(analytic_eigensystem(bare)[0])
        path = constant_latitude_loop(1.234, 512)
        report = holonomy_phase(state, frame, path)
        want = analytic_berry_phase(bare, path.omega_solid)
        assert want == pytest.approx(path.omega_solid / 2.0)
        assert report.gamma_total == pytest.approx(want, abs=1e-8)

    @pytest.mark.parametrize(
        "m,theta,delta", [(1, 0.7, 0.0), (2, 1.2, 0.4), (3, 2.0, -1.1)]
    )
    def test_matches_closed_form(self, m, theta, delta):
        params, frame, state = doublet_setup(m=m, delta=delta)
        path = default_latitude_loop(m, theta, 1024)
        report = holonomy_phase(state, frame, path)
        want = analytic_berry_phase(params, path.omega_solid)
        assert report.gamma_per_revolution == pytest.approx(want, abs=1e-6)

    def test_full_turn_winding(self):
        # m = 2 at the south pole: 2 pi of accumulated phase, principal 0
        params, frame, state = doublet_setup()
        path = constant_latitude_loop(math.pi, 2000)
        report = holonomy_phase(state, frame, path)
        assert report.gamma_total == pytest.approx(TWO_PI, abs=1e-6)
        assert report.winding == 1
        assert abs(report.gamma) < 1e-6

    def test_raw_error_is_second_order(self):
        params, frame, state = doublet_setup(delta=0.3)
        errors = []
        for n_steps in (256, 512, 1024):
            path = constant_latitude_loop(0.9, n_steps)
            report = holonomy_phase(state, frame, path, refine=False)
            want = analytic_berry_phase(params, path.omega_solid)
            errors.append(abs(report.gamma_total - want))
        assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.1)
        assert errors[1] / errors[2] == pytest.approx(4.0, rel=0.1)

    def test_refinement_beats_raw(self):
        params, frame, state = doublet_setup(delta=0.3)
        path = constant_latitude_loop(0.9, 1024)
        want = analytic_berry_phase(params, path.omega_solid)
        raw = holonomy_phase(state, frame, path, refine=False)
        refined = holonomy_phase(state, frame, path)
        assert abs(refined.gamma_total - want) < abs(raw.gamma_total - want) / 100
        assert refined.diagnostics["refined"]
        assert refined.diagnostics["discretization_estimate"] > 0

    def test_gauge_scramble_leaves_principal(self):
        params, frame, state = doublet_setup(m=2, delta=0.8)
        path = constant_latitude_loop(1.1, 512)
        reference = holonomy_phase(state, frame, path)
        for seed in (1, 7, 1234):
            scrambled = holonomy_phase(state, frame, path, gauge_seed=seed)
            assert scrambled.gamma == pytest.approx(
                reference.gamma, abs=TOL.gauge_invariance
            )
            assert scrambled.winding is None
            assert scrambled.gamma_total is None

    def test_branch_equality_on_resonance(self):
        _, frame, plus_state = doublet_setup(m=2, delta=0.0, branch="+")
        _, _, minus_state = doublet_setup(m=2, delta=0.0, branch="-")
        path = constant_latitude_loop(0.9, 512)
        gp = holonomy_phase(plus_state, frame, path).gamma_total
        gm = holonomy_phase(minus_state, frame, path).gamma_total
        assert gm == pytest.approx(gp, abs=TOL.branch_equality)

    def test_branch_mirror_off_resonance(self):
        path = constant_latitude_loop(1.2, 512)
        _, frame_p, plus_state = doublet_setup(m=2, delta=0.7, branch="+")
        _, frame_m, minus_state = doublet_setup(m=2, delta=-0.7, branch="-")
        gp = holonomy_phase(plus_state, frame_p, path).gamma_total
        gm = holonomy_phase(minus_state, frame_m, path).gamma_total
        assert gm == pytest.approx(gp, abs=1e-8)

    def test_vanishing_overlap_raises(self):
        # a spin-90 stretched state walked around the equator in 8 strides
        # has successive overlaps around cos(pi/8)^180 ~ 7e-7
        bare = ModelParams(m=1, lambda_m=0.0, delta_m=1.0, n=180, free_mode=True)
        frame = schwinger_frame(default_basis(bare))
        state = dressed_state_vector(analytic_eigensystem(bare)[0])
        path = constant_latitude_loop(math.pi / 2, 8)
        with pytest.raises(VanishingOverlap):
            holonomy_phase(state, frame, path)

    def test_transport_preserves_norm(self):
        params, frame, state = doublet_setup(m=3)
        path = constant_latitude_loop(2.2, 64)
        samples = transport_states(frame, state, path)
        norms = np.linalg.norm(samples, axis=1)
        assert np.abs(norms - 1.0).max() < 1e-11


class TestSchedule:
    def test_smoothstep_endpoints_at_rest(self):
        path = constant_latitude_loop(1.0, 32)
        sched = DriveSchedule(path, 10.0)
        assert sched.path_parameter(0.0) == 0.0
        assert sched.path_parameter(10.0) == pytest.approx(1.0)
        eps = 1e-4
        assert sched.path_parameter(eps) < eps / 10.0  # starts at rest
        assert sched.rate_factor() == pytest.approx(1.5)

    def test_uniform_rate(self):
        path = constant_latitude_loop(1.0, 32)
        sched = DriveSchedule(path, 8.0, time_parametrization="uniform")
        assert sched.path_parameter(2.0) == pytest.approx(0.25)
        assert sched.rate_factor() == pytest.approx(1.0)

    def test_rejects_unknown_settings(self):
        path = constant_latitude_loop(1.0, 32)
        with pytest.raises(ValueError):
            DriveSchedule(path, -1.0)
        with pytest.raises(ValueError):
            DriveSchedule(path, 1.0, time_parametrization="cubic")
        with pytest.raises(ValueError):
            DriveSchedule(path, 1.0, dynamic_phase_mode="guess")

    def test_step_size_properties(self):
        assert rk4_step_size(10.0, 2.0) <= 1.0 / (50.0 * 2.0)
        assert rk4_step_size(1e6, 2.0) < rk4_step_size(10.0, 2.0)


class TestAdiabatic:
    def test_static_point_gives_zero_phase(self):
        # a loop pinned at the pole leaves H constant: pure dynamic phase
        params, frame, state = doublet_setup(m=2, delta=0.4)
        h0 = build_interaction_hamiltonian(params)
        path = constant_latitude_loop(0.0, 16)
        _, report = adiabatic_evolution(h0, frame, DriveSchedule(path, 30.0), state)
        assert abs(report.gamma_total) < 1e-6
        lam = params.big_lambda
        assert report.diagnostics["dynamic_phase_subtracted"] == pytest.approx(
            lam * 30.0, rel=1e-9
        )

    def test_matches_closed_form_after_extrapolation(self):
        params, frame, state = doublet_setup(m=2, delta=0.4)
        h0 = build_interaction_hamiltonian(params)
        path = default_latitude_loop(2, 0.7, 96)
        sched = DriveSchedule(path, 200.0)
        report = extrapolated_adiabatic_phase(h0, frame, sched, state)
        want = analytic_berry_phase(params, path.omega_solid)
        assert report.gamma_per_revolution == pytest.approx(want, abs=1e-2)
        assert report.method == "adiabatic-extrapolated"

    def test_agrees_with_holonomy_at_south_pole(self):
        params, frame, state = doublet_setup(m=2)
        h0 = build_interaction_hamiltonian(params)
        path = constant_latitude_loop(math.pi, 96)
        hol = holonomy_phase(state, frame, path)
        report = extrapolated_adiabatic_phase(
            h0, frame, DriveSchedule(path, 200.0), state
        )
        assert report.gamma_total == pytest.approx(
            hol.gamma_total, abs=TOL.adiabatic_vs_holonomy
        )

    def test_leak_shrinks_with_slower_drives(self):
        params, frame, state = doublet_setup(m=2, delta=0.4)
        h0 = build_interaction_hamiltonian(params)
        path = default_latitude_loop(2, 0.7, 96)
        leaks = []
        for total in (50.0, 100.0, 200.0):
            _, report = adiabatic_evolution(
                h0, frame, DriveSchedule(path, total), state
            )
            leaks.append(report.diagnostics["max_nonadiabatic_leak"])
        assert leaks[0] > leaks[1] > leaks[2]
        assert leaks[2] < 1e-3

    def test_too_fast_raises(self):
        params, frame, state = doublet_setup(m=2, delta=0.4)
        h0 = build_interaction_hamiltonian(params)
        path = default_latitude_loop(2, 2.6, 96)
        with pytest.warns(UserWarning, match="ten coupling periods"):
            with pytest.raises(NonAdiabatic):
                adiabatic_evolution(h0, frame, DriveSchedule(path, 5.0), state)

    def test_oversized_step_raises_norm_drift(self):
        params, frame, state = doublet_setup(m=2, delta=0.4)
        h0 = build_interaction_hamiltonian(params)
        path = constant_latitude_loop(0.0, 16)
        with pytest.raises(NormDrift):
            adiabatic_evolution(
                h0, frame, DriveSchedule(path, 50.0), state, dt_override=0.5
            )

    def test_energy_expectation_mode_runs(self):
        params, frame, state = doublet_setup(m=2)
        h0 = build_interaction_hamiltonian(params)
        path = default_latitude_loop(2, 0.7, 96)
        sched = DriveSchedule(
            path, 100.0, dynamic_phase_mode="subtract-energy-expectation"
        )
        _, report = adiabatic_evolution(h0, frame, sched, state)
        want = analytic_berry_phase(params, path.omega_solid)
        # this subtraction carries a larger secular bias; just bound it
        assert report.gamma_total == pytest.approx(want, abs=0.5)
        assert report.diagnostics["dynamic_phase_mode"] == (
            "subtract-energy-expectation"
        )


class TestBudget:
    def test_verdicts_track_drive_speed(self):
        params = ModelParams(m=2)
        path = constant_latitude_loop(math.pi / 2, 96)
        slow = adiabaticity_budget(params, DriveSchedule(path, 250.0))
        by_name = {e.name: e for e in slow}
        assert by_name["phi_rate_over_coupling"].verdict == "pass"
        assert by_name["theta_rate_over_coupling"].ratio == 0.0
        assert by_name["detuning_over_trap"].verdict == "skipped"

        warn = adiabaticity_budget(params, DriveSchedule(path, 25.0))
        assert {e.name: e for e in warn}["phi_rate_over_coupling"].verdict == "warn"

        fast = adiabaticity_budget(params, DriveSchedule(path, 5.0))
        assert {e.name: e for e in fast}["phi_rate_over_coupling"].verdict == "fail"

    def test_detuning_entry_uses_trap_frequency(self):
        params = ModelParams(m=2, nu=50.0, delta_m=0.5)
        path = constant_latitude_loop(1.0, 96)
        entries = adiabaticity_budget(params, DriveSchedule(path, 100.0))
        entry = {e.name: e for e in entries}["detuning_over_trap"]
        assert entry.ratio == pytest.approx(0.01)
        assert entry.verdict == "pass"
