"""Sideband couplings and the simulated Ramsey read-out.

The occupation-dependent coupling series is checked against matrix
elements of the exponentiated kick operator exp(i eta (a + a^dag)) on a
large plain Fock space, which is how the physical coupling arises in the
first place and shares no code with the series implementation.
"""

import math
import warnings

import numpy as np
import pytest
import scipy.linalg

from anyonjc.errors import CycleMismatch, NonAdiabatic, TruncationWarning
from anyonjc.fock import SPIN_DOWN, SPIN_UP
from anyonjc.iontrap import (
    TrapParams,
    carrier_pulse_operator,
    coupling_strength,
    effective_model,
    g_for_unit_coupling,
    lamb_dicke_lambda,
    make_ramsey_run,
    predicted_p_down,
    pulse_beta,
    ramsey_basis,
    ramsey_protocol,
    ramsey_sweep,
    sideband_hamiltonian,
    snap_to_cycles,
    vacuum_splitting,
)
from anyonjc.model import analytic_berry_phase


def kick_matrix_element(eta: float, n: int, m: int, n_max: int = 60) -> float:
    """|<n+m| exp(i eta (a + a^dag)) |n>| on a plain truncated Fock space."""
    a = np.diag(np.sqrt(np.arange(1, n_max + 1)), 1)
    kick = scipy.linalg.expm(1j * eta * (a + a.T))
    return abs(kick[n + m, n])


class TestCouplingSeries:
    @pytest.mark.parametrize("m", [0, 1, 2, 3])
    @pytest.mark.parametrize("n", [0, 1, 2, 5, 9])
    def test_matches_displacement_oracle(self, m, n):
        trap = TrapParams(g=2.0, eta=0.12, m=max(m, 1))
        f = coupling_strength(trap, n, order=m)
        ladder = math.sqrt(math.prod(range(n + 1, n + m + 1)))
        want = (trap.g / 2.0) * kick_matrix_element(trap.eta, n, m)
        assert abs(f) * ladder == pytest.approx(want, rel=1e-10)

    def test_carrier_strength(self):
        trap = TrapParams(g=3.0, eta=0.2, m=1)
        f0 = coupling_strength(trap, 0, order=0)
        assert f0 == pytest.approx(1.5 * math.exp(-0.02))
        tiny = TrapParams(g=3.0, eta=1e-8, m=1)
        assert coupling_strength(tiny, 0, order=0) == pytest.approx(1.5)

    def test_frozen_first_sideband(self):
        trap = TrapParams(g=1.0, eta=0.05, m=1)
        assert coupling_strength(trap, 0) == pytest.approx(0.02496877, abs=1e-8)

    def test_vacuum_coupling_equals_effective_lambda(self):
        for m in (1, 2, 3):
            trap = TrapParams(g=7.3, eta=0.11, m=m)
            assert coupling_strength(trap, 0) == abs(lamb_dicke_lambda(trap))

    def test_frozen_effective_lambda(self):
        trap = TrapParams(g=1.0, eta=0.1, m=2)
        assert abs(lamb_dicke_lambda(trap)) == pytest.approx(
            0.0025 * math.exp(-0.005), rel=1e-12
        )

    def test_unit_coupling_helper(self):
        for m in (1, 2, 3):
            trap = TrapParams(g=g_for_unit_coupling(0.1, m), eta=0.1, m=m)
            assert effective_model(trap).lambda_m == pytest.approx(1.0, rel=1e-12)

    def test_occupation_dependence_is_weak(self):
        for m in (1, 2, 3):
            trap = TrapParams(g=1.0, eta=0.1, m=m)
            f0 = coupling_strength(trap, 0)
            f1 = coupling_strength(trap, 1)
            assert abs(f1 / f0 - 1.0) == pytest.approx(
                trap.eta**2 / (m + 1), rel=1e-10
            )

    def test_truncated_series_warns(self):
        trap = TrapParams(g=1.0, eta=0.3, m=1)
        with pytest.warns(TruncationWarning):
            coupling_strength(trap, 6, l_max=1)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            coupling_strength(trap, 6)  # full series is exact, no warning

    def test_marginal_basis_warns(self):
        trap = TrapParams(g=1.0, eta=0.35, m=2)
        with pytest.warns(TruncationWarning):
            sideband_hamiltonian(trap, ramsey_basis(2))


class TestTrapParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            TrapParams(g=0.0, eta=0.1)
        with pytest.raises(ValueError):
            TrapParams(g=1.0, eta=1.2)
        with pytest.raises(ValueError):
            TrapParams(g=1.0, eta=0.1, m=-1)

    def test_effective_model_carries_detuning(self):
        trap = TrapParams(g=1.0, eta=0.1, m=2, delta_m=0.7)
        model = effective_model(trap)
        assert model.m == 2
        assert model.delta_m == 0.7

    def test_sideband_hamiltonian_element(self):
        trap = TrapParams(g=2.0, eta=0.1, m=2)
        basis = ramsey_basis(2)
        h = sideband_hamiltonian(trap, basis)
        row = basis.index((SPIN_DOWN, 2, 0))
        col = basis.index((SPIN_UP, 0, 0))
        want = coupling_strength(trap, 0) * math.sqrt(2.0)
        assert h.matrix[row, col] == pytest.approx(want, rel=1e-12)
        assert np.abs(h.matrix - h.matrix.conj().T).max() < 1e-15


class TestPulses:
    def test_beta_values(self):
        trap = TrapParams(g=1.0, eta=0.1, m=2)
        assert pulse_beta(trap, "instantaneous") == pytest.approx(math.pi / 2)
        assert pulse_beta(trap, "timed") == pytest.approx(
            (math.pi / 2) * math.exp(-0.005)
        )

    def test_timed_pulse_is_unitary_and_rotates(self):
        trap = TrapParams(g=50.0, eta=0.1, m=2)
        basis = ramsey_basis(2)
        u = carrier_pulse_operator(trap, basis, "timed").matrix
        eye = np.eye(basis.dim)
        assert np.abs(u @ u.conj().T - eye).max() < 1e-11
        start = np.zeros(basis.dim, dtype=complex)
        start[basis.index((SPIN_DOWN, 0, 0))] = 1.0
        out = u @ start
        p_up = abs(out[basis.index((SPIN_UP, 0, 0))]) ** 2
        beta = pulse_beta(trap, "timed")
        assert p_up == pytest.approx(math.sin(beta / 2.0) ** 2, abs=1e-4)

    def test_predicted_p_down(self):
        trap = TrapParams(g=1.0, eta=0.1, m=2)
        beta = pulse_beta(trap, "timed")
        assert predicted_p_down(trap, 0.0, "timed") == pytest.approx(
            (1.0 - math.sin(beta)) / 2.0
        )
        assert predicted_p_down(trap, math.pi / 2, "instantaneous") == (
            pytest.approx(0.5)
        )


class TestCycles:
    def test_snap_finds_integer_cycles(self):
        trap = TrapParams(g=g_for_unit_coupling(0.1, 2), eta=0.1, m=2)
        assert vacuum_splitting(trap) == pytest.approx(math.sqrt(2.0), rel=1e-12)
        snapped, j, residual = snap_to_cycles(trap, 200.0)
        assert j == 45
        assert snapped == pytest.approx(45 * 2.0 * math.pi / math.sqrt(2.0), rel=1e-12)
        assert residual == pytest.approx(abs(200.0 - snapped))

    def test_off_cycle_without_snap_raises(self):
        trap = TrapParams(g=g_for_unit_coupling(0.1, 2), eta=0.1, m=2)
        run = make_ramsey_run(trap, math.pi, 200.0)
        with pytest.raises(CycleMismatch):
            ramsey_protocol(run, snap=False)


class TestProtocol:
    def test_zero_area_instantaneous_pulses_cancel(self):
        trap = TrapParams(g=g_for_unit_coupling(0.1, 2), eta=0.1, m=2)
        run = make_ramsey_run(trap, 0.0, 200.0, pulse_mode="instantaneous")
        ramsey_protocol(run)
        assert run.result["p_down"] < 1e-6
        assert run.diagnostics["max_nonadiabatic_leak"] < 1e-12

    def test_zero_area_timed_pulse_floor(self):
        # timed pulses leave a small, time-independent excitation floor
        trap = TrapParams(g=g_for_unit_coupling(0.1, 2), eta=0.1, m=2)
        run = make_ramsey_run(trap, 0.0, 200.0)
        ramsey_protocol(run)
        assert run.result["p_down"] < 1e-3

    def test_single_point_matches_prediction(self):
        trap = TrapParams(g=g_for_unit_coupling(0.1, 2), eta=0.1, m=2)
        run = make_ramsey_run(trap, math.pi, 200.0)
        ramsey_protocol(run)
        gamma = analytic_berry_phase(effective_model(trap), math.pi)
        assert gamma == pytest.approx(math.pi / 2.0)
        want = predicted_p_down(trap, gamma, "timed")
        assert run.result["p_down"] == pytest.approx(want, abs=1e-2)
        assert run.result["gamma_inferred"] == pytest.approx(gamma, abs=1e-2)
        assert run.j_cycles == 45
        assert run.diagnostics["branch_transfer"] < 1e-2

    def test_fast_drive_raises(self):
        trap = TrapParams(g=g_for_unit_coupling(0.1, 2), eta=0.1, m=2)
        run = make_ramsey_run(trap, 4.0 * math.pi, 3.0)
        with pytest.raises(NonAdiabatic):
            ramsey_protocol(run)

    def test_sweep_rows_are_csv_ready(self):
        trap = TrapParams(g=g_for_unit_coupling(0.1, 2), eta=0.1, m=2)
        rows = ramsey_sweep(trap, [0.0, math.pi], 120.0)
        assert len(rows) == 2
        assert list(rows[0]) == [
            "m",
            "eta",
            "g",
            "delta_m",
            "omega_solid",
            "total_time",
            "p_down",
            "gamma_inferred",
            "gamma_analytic",
            "leak",
        ]
        assert rows[1]["gamma_analytic"] == pytest.approx(math.pi / 2.0)
