"""Sphere loops, solid angles and the drive-frame rotations.

The spherical-polygon area oracle is the Girard excess of hand-picked
triangles whose area is known exactly (one octant = pi/2), plus a dense
ring compared against the closed-form cap area.
"""

import math

import numpy as np
import pytest

from anyonjc.errors import BadTheta, BasisMismatch, DegeneratePath
from anyonjc.fock import BasisSpec, StateVector, truncated_basis
from anyonjc.model import ModelParams, build_interaction_hamiltonian, default_basis
from anyonjc.paths import (
    LiftCache,
    LoopPath,
    build_periodic_unitary,
    build_unitary,
    constant_latitude_loop,
    default_latitude_loop,
    latitude_solid_angle,
    polygon_loop,
    polygon_solid_angle,
    rotated_hamiltonian,
    schwinger_frame,
    schwinger_jx,
    sphere_point,
    theta_for_solid_angle,
)

TWO_PI = 2.0 * math.pi


class TestSolidAngles:
    def test_latitude_values(self):
        assert latitude_solid_angle(0.0) == 0.0
        assert latitude_solid_angle(math.pi / 2) == pytest.approx(TWO_PI)
        assert latitude_solid_angle(math.pi) == pytest.approx(2 * TWO_PI)
        magic = math.acos(-1.0 / 3.0)
        assert latitude_solid_angle(magic) == pytest.approx(8 * math.pi / 3)

    def test_inverse_round_trip(self):
        for omega in (0.1, math.pi, TWO_PI, 11.0):
            theta = theta_for_solid_angle(omega)
            assert latitude_solid_angle(theta) == pytest.approx(omega, abs=1e-12)

    def test_sphere_point(self):
        v = sphere_point(math.pi / 2, math.pi / 2)
        assert np.allclose(v, [0.0, 1.0, 0.0], atol=1e-15)
        assert np.allclose(sphere_point(0.0, 1.234), [0.0, 0.0, 1.0], atol=1e-15)


class TestLoops:
    def test_latitude_loop_shape(self):
        path = constant_latitude_loop(0.8, 16)
        assert path.closed
        assert path.n_steps == 16
        assert path.samples.shape == (17, 2)
        assert path.omega_solid == pytest.approx(latitude_solid_angle(0.8))
        assert np.allclose(path.samples[:, 0], 0.8)

    def test_multi_revolution(self):
        path = constant_latitude_loop(1.0, 32, revolutions=3)
        assert path.samples.shape == (3 * 32 + 1, 2)
        assert path.total_solid_angle == pytest.approx(3 * path.omega_solid)
        assert path.samples[-1, 1] == pytest.approx(3 * TWO_PI)

    def test_parity_default(self):
        assert default_latitude_loop(1, 0.7).revolutions == 2
        assert default_latitude_loop(2, 0.7).revolutions == 1
        assert default_latitude_loop(3, 0.7).revolutions == 2

    def test_rejects_bad_arguments(self):
        with pytest.raises(BadTheta):
            constant_latitude_loop(-0.1, 64)
        with pytest.raises(BadTheta):
            constant_latitude_loop(math.pi + 0.1, 64)
        with pytest.raises(BadTheta):
            constant_latitude_loop(1.0, 4)  # too few steps to mean anything

    def test_json_round_trip(self):
        path = constant_latitude_loop(1.1, 64, revolutions=2)
        again = LoopPath.from_json(path.to_json())
        assert np.allclose(again.samples, path.samples)
        assert again.revolutions == 2
        poly = polygon_loop([(0.2, 0.0), (1.2, 1.0), (1.2, -1.0)])
        again = LoopPath.from_json(poly.to_json())
        assert np.allclose(again.samples, poly.samples)
        assert again.kind == "polygon"


class TestPolygonArea:
    def test_octant_is_exact(self):
        # +x -> +y -> +z corners of the octant
        path = polygon_loop(
            [(math.pi / 2, 0.0), (math.pi / 2, math.pi / 2), (0.0, 0.0)]
        )
        assert polygon_solid_angle(path) == pytest.approx(math.pi / 2, abs=1e-12)

    def test_orientation_complement(self):
        fwd = [(math.pi / 2, 0.0), (math.pi / 2, math.pi / 2), (0.0, 0.0)]
        area = polygon_solid_angle(polygon_loop(fwd))
        rev = polygon_solid_angle(polygon_loop(fwd[::-1]))
        assert rev == pytest.approx(4 * math.pi - area, abs=1e-12)

    def test_dense_ring_matches_cap_formula(self):
        theta = 1.1
        n = 8192
        ring = polygon_loop([(theta, TWO_PI * k / n) for k in range(n)])
        got = polygon_solid_angle(ring)
        assert abs(got - latitude_solid_angle(theta)) < 1e-6

    def test_coarse_ring_bias_is_second_order(self):
        # 360 vertices leave a visible inscription bias; document its size
        theta = 1.1
        ring = polygon_loop([(theta, TWO_PI * k / 360) for k in range(360)])
        bias = polygon_solid_angle(ring) - latitude_solid_angle(theta)
        assert 0 < abs(bias) < 2e-4

    def test_degenerate_inputs(self):
        with pytest.raises(DegeneratePath):
            polygon_solid_angle(polygon_loop([(1.0, 0.0), (1.0, 1.0)]))
        with pytest.raises(DegeneratePath):
            polygon_solid_angle(
                polygon_loop([(1.0, 0.0), (1.0, 0.0), (0.5, 1.0), (1.2, 2.0)])
            )
        with pytest.raises(DegeneratePath):
            # consecutive antipodal points leave the arc undefined
            polygon_solid_angle(
                polygon_loop([(0.0, 0.0), (math.pi, 0.0), (1.0, 1.0)])
            )


def jz_oracle(basis):
    offset = 1 if basis.qubit_included else 0
    diag = []
    for label in basis.states:
        occ = label[offset:]
        val = (occ[0] - occ[1]) / 2.0
        if len(occ) == 4:
            val += (occ[2] - occ[3]) / 2.0
        diag.append(val)
    return np.array(diag)


class TestFrame:
    def test_jz_is_half_occupation_difference(self):
        for basis in (truncated_basis(3), BasisSpec(4, ((0, 0), (2, 2)))):
            frame = schwinger_frame(basis)
            assert np.allclose(frame.jz_diagonal, jz_oracle(basis))

    @pytest.mark.parametrize(
        "basis", [truncated_basis(2), BasisSpec(4, ((0, 0), (1, 1)))]
    )
    def test_su2_commutators(self, basis):
        frame = schwinger_frame(basis)
        jy = frame.j_y.matrix
        jz = np.diag(frame.jz_diagonal.astype(complex))
        jx = schwinger_jx(frame).matrix
        assert np.abs(jz @ jx - jx @ jz - 1j * jy).max() < 1e-12
        assert np.abs(jx @ jy - jy @ jx - 1j * jz).max() < 1e-12
        assert np.abs(jy @ jz - jz @ jy - 1j * jx).max() < 1e-12

    def test_pair_swap_at_pi(self):
        basis = BasisSpec(2, (1,), qubit_included=False)
        frame = schwinger_frame(basis)
        u = build_unitary(frame, math.pi, 0.0)
        src = StateVector.basis_state(basis, (1, 0))
        out = u.matrix @ src.amplitudes
        assert out[basis.index((0, 1))] == pytest.approx(1.0, abs=1e-14)

    def test_identity_at_origin(self):
        frame = schwinger_frame(truncated_basis(1))
        u = build_unitary(frame, 0.0, 0.0)
        assert np.abs(u.matrix - np.eye(frame.basis.dim)).max() < 1e-14


class TestRotations:
    def test_unitarity_random_angles(self, rng):
        frame = schwinger_frame(truncated_basis(2))
        eye = np.eye(frame.basis.dim)
        for _ in range(25):
            theta, phi = rng.uniform(0, math.pi), rng.uniform(0, 20.0)
            for mat in (
                build_unitary(frame, theta, phi).matrix,
                build_periodic_unitary(frame, theta, phi).matrix,
            ):
                assert np.abs(mat @ mat.conj().T - eye).max() < 1e-11

    def test_periodic_lift_closes_on_odd_sectors(self):
        # sector total 1 carries half-integer weights, where the bare
        # product of exponentials picks up a global sign over one turn
        basis = BasisSpec(2, (0, 1))
        frame = schwinger_frame(basis)
        w0 = build_periodic_unitary(frame, 0.9, 0.0).matrix
        w1 = build_periodic_unitary(frame, 0.9, TWO_PI).matrix
        assert np.abs(w1 - w0).max() < 1e-12
        u0 = build_unitary(frame, 0.9, 0.0).matrix
        u1 = build_unitary(frame, 0.9, TWO_PI).matrix
        assert np.abs(u1 - u0).max() > 0.5

    def test_lifts_agree_at_zero_azimuth(self):
        frame = schwinger_frame(truncated_basis(2))
        u = build_unitary(frame, 1.3, 0.0).matrix
        w = build_periodic_unitary(frame, 1.3, 0.0).matrix
        assert np.abs(u - w).max() < 1e-13

    def test_cache_matches_direct_build(self):
        frame = schwinger_frame(truncated_basis(2))
        cache = LiftCache(frame)
        for theta, phi in [(0.4, 0.0), (0.4, 2.2), (1.9, 2.2), (1.9, 9.0)]:
            want = build_periodic_unitary(frame, theta, phi).matrix
            assert np.abs(cache.matrix(theta, phi) - want).max() < 1e-13

    def test_rotated_hamiltonian_isospectral(self):
        params = ModelParams(m=2, delta_m=0.8)
        basis = default_basis(params)
        frame = schwinger_frame(basis)
        h0 = build_interaction_hamiltonian(params, basis)
        base = np.sort(np.linalg.eigvalsh(h0.matrix))
        for theta, phi in [(0.5, 1.0), (2.4, 4.4)]:
            h = rotated_hamiltonian(h0, frame, theta, phi)
            assert np.allclose(np.sort(np.linalg.eigvalsh(h.matrix)), base, atol=1e-11)
            assert np.abs(h.matrix - h.matrix.conj().T).max() < 1e-12

    def test_rotated_hamiltonian_basis_check(self):
        params = ModelParams(m=2)
        h0 = build_interaction_hamiltonian(params)
        other = schwinger_frame(truncated_basis(3))
        with pytest.raises(BasisMismatch):
            rotated_hamiltonian(h0, other, 0.3, 0.3)
