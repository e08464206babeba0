"""Drive loops on the sphere, their solid angles, and mode-mixing rotations.

A drive configuration is a point (theta, phi) on the unit sphere. Loops are
stored as sampled paths with an explicit duplicate endpoint, either
constant-latitude circles (closed-form solid angle 2 pi (1 - cos theta) per
revolution) or spherical polygons with geodesic edges, whose oriented area
comes from a Girard-style triangle fan.

The two boson modes carry an angular-momentum algebra (Schwinger picture):

    J_z = (a^dag a - b^dag b) / 2,   J_y = i (a b^dag - a^dag b) / 2,

block-diagonal over sectors, where the pair total N acts as spin j = N / 2.
Rotating the drive point is implemented by exponentials of these
generators. Exponentials are taken in the spectral basis of the generator
(J_z is diagonal in the canonical ordering, J_y is diagonalized once per
frame and cached), so arbitrarily large angles stay exact to rounding and
the generic matrix-exponential norm cap does not apply here.

Sign convention: build_unitary(frame, pi, 0) maps |1, 0> to +|0, 1>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .config import TOL
from .errors import BadSolidAngle, BadTheta, BasisMismatch, DegeneratePath
from .fock import BasisSpec, FockOperator

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi

MIN_STEPS = 8


def sphere_point(theta: float, phi: float) -> np.ndarray:
    """Unit vector for polar angle theta, azimuth phi."""
    s = math.sin(theta)
    return np.array([s * math.cos(phi), s * math.sin(phi), math.cos(theta)])


def latitude_solid_angle(theta: float) -> float:
    return TWO_PI * (1.0 - math.cos(theta))


def theta_for_solid_angle(omega_solid: float) -> float:
    """Latitude whose circle encloses the requested solid angle."""
    if not 0.0 <= omega_solid <= FOUR_PI + 1e-12:
        raise BadSolidAngle(f"solid angle {omega_solid} outside [0, 4*pi]")
    return math.acos(max(-1.0, 1.0 - omega_solid / TWO_PI))


@dataclass
class LoopPath:
    """Sampled drive loop.

    samples has shape (K, 2) with columns (theta, phi) and includes the
    duplicate closing point. omega_solid is the enclosed solid angle per
    revolution; total_solid_angle multiplies in the revolution count.
    """

    samples: np.ndarray
    closed: bool
    kind: str
    omega_solid: float
    revolutions: int = 1
    n_steps: int = 0  # samples per revolution (segments); 0 means len - 1

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 2 or self.samples.shape[1] != 2:
            raise ValueError("samples must be a (K, 2) array of (theta, phi)")
        if len(self.samples) < 2:
            raise ValueError("a path needs at least two samples")
        if self.n_steps == 0:
            self.n_steps = (len(self.samples) - 1) // max(self.revolutions, 1)
        if self.closed:
            first = sphere_point(*self.samples[0])
            last = sphere_point(*self.samples[-1])
            if np.linalg.norm(first - last) > TOL.loop_closure:
                raise ValueError("closed path endpoints do not coincide on the sphere")

    @property
    def segments(self) -> int:
        return len(self.samples) - 1

    @property
    def total_solid_angle(self) -> float:
        return self.omega_solid * self.revolutions

    def to_json(self) -> dict:
        if self.kind == "latitude":
            return {
                "kind": "latitude",
                "theta": float(self.samples[0, 0]),
                "n_steps": int(self.n_steps),
                "revolutions": int(self.revolutions),
            }
        return {"kind": self.kind, "vertices": self.samples[:-1].tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "LoopPath":
        if data["kind"] == "latitude":
            return constant_latitude_loop(
                data["theta"],
                n_steps=data.get("n_steps", 1024),
                revolutions=data.get("revolutions", 1),
            )
        if data["kind"] == "polygon":
            return polygon_loop(data["vertices"])
        raise ValueError(f"unknown path kind {data['kind']!r}")


def constant_latitude_loop(
    theta: float, n_steps: int = 1024, revolutions: int = 1
) -> LoopPath:
    """Circle at fixed polar angle, n_steps samples per revolution."""
    if not 0.0 <= theta <= math.pi:
        raise BadTheta(f"theta {theta} outside [0, pi]")
    if n_steps < MIN_STEPS:
        raise BadTheta(f"need at least {MIN_STEPS} steps per revolution")
    if revolutions < 1:
        raise ValueError("revolutions must be at least 1")
    total = n_steps * revolutions
    phi = TWO_PI * np.arange(total + 1) / n_steps
    samples = np.column_stack([np.full(total + 1, theta), phi])
    return LoopPath(
        samples,
        closed=True,
        kind="latitude",
        omega_solid=latitude_solid_angle(theta),
        revolutions=revolutions,
        n_steps=n_steps,
    )


def default_latitude_loop(m: int, theta: float, n_steps: int = 1024) -> LoopPath:
    """Latitude loop with the default traversal count: odd m is driven
    around twice (the doubled loop is reported per revolution downstream)."""
    return constant_latitude_loop(theta, n_steps, revolutions=2 if m % 2 else 1)


def polygon_loop(vertices) -> LoopPath:
    """Closed spherical polygon through the given (theta, phi) vertices."""
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim != 2 or verts.shape[1] != 2 or len(verts) < 3:
        raise DegeneratePath("a polygon needs at least three (theta, phi) vertices")
    first = sphere_point(*verts[0])
    last = sphere_point(*verts[-1])
    if np.linalg.norm(first - last) > TOL.loop_closure:
        verts = np.vstack([verts, verts[0]])
    omega = polygon_solid_angle(verts)
    return LoopPath(verts, closed=True, kind="polygon", omega_solid=omega)


def polygon_solid_angle(path) -> float:
    """Oriented solid angle of a closed spherical polygon, in [0, 4 pi).

    Accepts a LoopPath or a (K, 2) sample array (duplicate endpoint
    optional). The polygon is fanned into triangles from its first vertex
    and each triangle contributes its oriented spherical excess

        E = 2 atan2(v0 . (v1 x v2), 1 + v0.v1 + v1.v2 + v2.v0).

    The signed total is reduced mod 4 pi, so traversing a loop backwards
    reports 4 pi minus the forward area (the complementary cap).
    """
    samples = path.samples if isinstance(path, LoopPath) else np.asarray(path, float)
    pts = np.array([sphere_point(t, p) for t, p in samples])
    if len(pts) > 1 and np.linalg.norm(pts[0] - pts[-1]) <= TOL.loop_closure:
        pts = pts[:-1]
    if len(pts) < 3:
        raise DegeneratePath("fewer than three distinct points")
    chords = np.linalg.norm(np.diff(np.vstack([pts, pts[:1]]), axis=0), axis=1)
    if chords.min() <= TOL.degenerate_edge:
        raise DegeneratePath("repeated consecutive points on the sphere")
    total = 0.0
    v0 = pts[0]
    for i in range(1, len(pts) - 1):
        v1, v2 = pts[i], pts[i + 1]
        d01, d12, d20 = v0 @ v1, v1 @ v2, v2 @ v0
        denom = 1.0 + d01 + d12 + d20
        numer = v0 @ np.cross(v1, v2)
        if abs(denom) < 1e-14 and abs(numer) < 1e-14:
            raise DegeneratePath("triangle with antipodal points is ambiguous")
        total += 2.0 * math.atan2(numer, denom)
    return total % FOUR_PI


@dataclass
class SchwingerFrame:
    """Schwinger angular momentum over a basis, with cached spectral data.

    For four modes the generators are the pair sums J = J^(ab) + J^(cd),
    so the same rotation machinery serves the exchange-coupled pair.
    """

    basis: BasisSpec
    j_y: FockOperator
    j_z: FockOperator

    @cached_property
    def jz_diagonal(self) -> np.ndarray:
        mat = self.j_z.matrix
        if np.abs(mat - np.diag(np.diagonal(mat))).max() > 0:
            raise ValueError("J_z is not diagonal in this basis ordering")
        return np.diagonal(mat).real.copy()

    @cached_property
    def jy_eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        w, v = np.linalg.eigh(self.j_y.matrix)
        return w, v

    def rotation_about_y(self, theta: float) -> np.ndarray:
        w, v = self.jy_eigensystem
        return (v * np.exp(-1j * theta * w)) @ v.conj().T


def _pair_jy_elements(basis: BasisSpec, offset: int, mat: np.ndarray):
    # i/2 (a b^dag - a^dag b) for the pair at the given label offset
    for col, label in enumerate(basis.states):
        n_a, n_b = label[offset], label[offset + 1]
        if n_a >= 1:
            target = label[:offset] + (n_a - 1, n_b + 1) + label[offset + 2 :]
            mat[basis.index(target), col] += 0.5j * math.sqrt(n_a * (n_b + 1))
        if n_b >= 1:
            target = label[:offset] + (n_a + 1, n_b - 1) + label[offset + 2 :]
            mat[basis.index(target), col] += -0.5j * math.sqrt((n_a + 1) * n_b)


def schwinger_frame(basis: BasisSpec) -> SchwingerFrame:
    """Build J_y and J_z for a two- or four-mode basis.

    Elements are written state by state inside each sector, never by
    composing truncated single-mode ladders, so the generators are exactly
    sector preserving with no overflow bookkeeping.
    """
    if basis.mode_count not in (2, 4):
        raise ValueError("Schwinger frame needs a two- or four-mode basis")
    dim = basis.dim
    offset = 1 if basis.qubit_included else 0
    jy = np.zeros((dim, dim), dtype=complex)
    jz = np.zeros(dim, dtype=float)
    for pair_start in range(offset, offset + basis.mode_count, 2):
        _pair_jy_elements(basis, pair_start, jy)
    for k, label in enumerate(basis.states):
        occ = label[offset:]
        jz[k] = 0.5 * (occ[0] - occ[1])
        if basis.mode_count == 4:
            jz[k] += 0.5 * (occ[2] - occ[3])
    return SchwingerFrame(
        basis,
        FockOperator(basis, jy),
        FockOperator(basis, np.diag(jz).astype(complex)),
    )


def schwinger_jx(frame: SchwingerFrame) -> FockOperator:
    """J_x = -i [J_y, J_z] completes the algebra; built from the frame's
    own generators so commutator checks are not circular."""
    jy, jz = frame.j_y.matrix, frame.j_z.matrix
    return FockOperator(frame.basis, -1j * (jy @ jz - jz @ jy))


def build_unitary(frame: SchwingerFrame, theta: float, phi: float) -> FockOperator:
    """Drive rotation exp(-i phi J_z) exp(-i theta J_y).

    This is the plain Euler form; it is not 2 pi periodic in phi on odd
    sectors (a full revolution picks up the parity (-1)^N). See
    build_periodic_unitary for the loop-closing variant.
    """
    dz = frame.jz_diagonal
    ry = frame.rotation_about_y(theta)
    mat = np.exp(-1j * phi * dz)[:, None] * ry
    return FockOperator(frame.basis, mat)


def build_periodic_unitary(
    frame: SchwingerFrame, theta: float, phi: float
) -> FockOperator:
    """Co-rotating drive W = exp(-i phi J_z) exp(-i theta J_y) exp(+i phi J_z).

    Differs from build_unitary only by a diagonal right factor (a choice of
    drive-phase trajectory). W is exactly 2 pi periodic in phi for every
    sector, tilts the mode-mixing axis without winding the coupling phase
    (W a W^dag = cos(theta/2) a + e^{-i phi} sin(theta/2) b), and is the
    lift used for transport and time-dependent drives in this package.
    """
    dz = frame.jz_diagonal
    ry = frame.rotation_about_y(theta)
    phase = np.exp(-1j * phi * dz)
    mat = phase[:, None] * ry * phase.conj()[None, :]
    return FockOperator(frame.basis, mat)


class LiftCache:
    """Repeated W(theta, phi) evaluation with rotation reuse.

    Time-dependent drives call the periodic lift once or twice per
    integrator step; while theta is unchanged (any constant-latitude
    drive) only the diagonal azimuth phases need rebuilding.
    """

    def __init__(self, frame: SchwingerFrame):
        self.frame = frame
        self._theta: float | None = None
        self._ry: np.ndarray | None = None

    def matrix(self, theta: float, phi: float) -> np.ndarray:
        if theta != self._theta:
            self._ry = self.frame.rotation_about_y(theta)
            self._theta = theta
        phase = np.exp(-1j * phi * self.frame.jz_diagonal)
        return phase[:, None] * self._ry * phase.conj()[None, :]


def rotated_hamiltonian(
    hamiltonian: FockOperator, frame: SchwingerFrame, theta: float, phi: float
) -> FockOperator:
    """U H U^dag with the plain Euler rotation U(theta, phi)."""
    if hamiltonian.basis != frame.basis:
        raise BasisMismatch("Hamiltonian and frame use different bases")
    u = build_unitary(frame, theta, phi).matrix
    return FockOperator(
        frame.basis, u @ hamiltonian.matrix @ u.conj().T, hamiltonian.dropped_weight
    )
