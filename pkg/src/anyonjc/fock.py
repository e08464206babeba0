"""Truncated Fock spaces for a qubit coupled to two or four boson modes.

The Hamiltonians in this package conserve the total boson number of each
mode pair up to m-quantum exchange with the qubit, so a basis is specified
by a set of pair totals ("sectors") rather than a plain occupation cutoff.
A two-mode basis with sectors {N1, N2} and the qubit holds every state
|s, n_a, n_b> with n_a + n_b in {N1, N2}; a four-mode basis takes sector
pairs (N_ab, N_cd).

Ordering convention, fixed once and relied on everywhere: sectors
ascending, qubit up before down inside a sector, then n_a descending
(and n_c descending for four modes). Spin labels are integers,
SPIN_UP = 0 and SPIN_DOWN = 1, so lexicographic order on the state label
is the basis order within a sector.

Operators carry their basis with them. A ladder element that leaves the
sector set is not an error by default: its squared magnitude is
accumulated in ``dropped_weight`` so callers can see exactly how much
operator weight the truncation discarded, and strict mode upgrades any
such drop to :class:`~anyonjc.errors.SectorOverflow`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .config import TOL
from .errors import (
    BadSubsystem,
    BasisMismatch,
    NoQubit,
    NormTooLarge,
    SectorOverflow,
    UnknownMode,
)

SPIN_UP = 0
SPIN_DOWN = 1

_PAIRS = {2: (("a", "b"),), 4: (("a", "b"), ("c", "d"))}


def _enumerate_pair(total: int) -> list[tuple[int, int]]:
    # n_a descending within a fixed pair total
    return [(total - k, k) for k in range(total + 1)]


@dataclass(frozen=True)
class BasisSpec:
    """Immutable description of a truncated basis.

    mode_count is 0 (bare qubit), 2 or 4. sector_totals holds ints for two
    modes and (N_ab, N_cd) pairs for four; it is normalized to a sorted
    tuple without duplicates.
    """

    mode_count: int
    sector_totals: tuple
    qubit_included: bool = True

    def __post_init__(self):
        if self.mode_count not in (0, 2, 4):
            raise ValueError(f"mode_count must be 0, 2 or 4, got {self.mode_count}")
        totals = tuple(sorted(set(self.sector_totals)))
        if self.mode_count == 0:
            if not self.qubit_included:
                raise ValueError("an empty basis (no modes, no qubit) is not usable")
            totals = ()
        elif self.mode_count == 2:
            if not totals or not all(isinstance(t, int) and t >= 0 for t in totals):
                raise ValueError("two-mode sector totals must be non-negative ints")
        else:
            if not totals or not all(
                isinstance(t, tuple)
                and len(t) == 2
                and all(isinstance(x, int) and x >= 0 for x in t)
                for t in totals
            ):
                raise ValueError("four-mode sectors must be (N_ab, N_cd) int pairs")
        object.__setattr__(self, "sector_totals", totals)

    @cached_property
    def states(self) -> tuple[tuple, ...]:
        """All basis labels in canonical order.

        Two-mode labels are (spin, n_a, n_b), four-mode labels are
        (spin, n_a, n_b, n_c, n_d); without the qubit the spin entry is
        dropped. A bare qubit enumerates ((SPIN_UP,), (SPIN_DOWN,)).
        """
        spins = (SPIN_UP, SPIN_DOWN) if self.qubit_included else (None,)
        out = []
        if self.mode_count == 0:
            return tuple((s,) for s in spins)
        for sector in self.sector_totals:
            occ_lists: list[tuple[int, ...]] = []
            if self.mode_count == 2:
                occ_lists = [pair for pair in _enumerate_pair(sector)]
            else:
                nab, ncd = sector
                for pa in _enumerate_pair(nab):
                    for pc in _enumerate_pair(ncd):
                        occ_lists.append(pa + pc)
            for s in spins:
                for occ in occ_lists:
                    out.append(occ if s is None else (s,) + occ)
        return tuple(out)

    @cached_property
    def index_map(self) -> dict[tuple, int]:
        return {label: k for k, label in enumerate(self.states)}

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def mode_ids(self) -> tuple[str, ...]:
        return ("a", "b", "c", "d")[: self.mode_count]

    def index(self, label: tuple) -> int:
        try:
            return self.index_map[label]
        except KeyError:
            raise KeyError(f"state {label} not in basis") from None

    def sector_of(self, label: tuple):
        """Pair total (or totals pair) of a basis label."""
        occ = label[1:] if self.qubit_included else label
        if self.mode_count == 2:
            return occ[0] + occ[1]
        return (occ[0] + occ[1], occ[2] + occ[3])


def truncated_basis(n_max: int, *, qubit: bool = True) -> BasisSpec:
    """Conventional two-mode cutoff basis: all sectors 0..n_max."""
    return BasisSpec(2, tuple(range(n_max + 1)), qubit_included=qubit)


def _require_same_basis(x, y):
    if x.basis != y.basis:
        raise BasisMismatch("objects live on different bases")


@dataclass
class StateVector:
    basis: BasisSpec
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.basis.dim,):
            raise ValueError(
                f"amplitude vector has shape {amp.shape}, basis dim {self.basis.dim}"
            )
        self.amplitudes = amp

    @classmethod
    def basis_state(cls, basis: BasisSpec, label: tuple) -> "StateVector":
        amp = np.zeros(basis.dim, dtype=complex)
        amp[basis.index(label)] = 1.0
        return cls(basis, amp)

    @classmethod
    def from_components(cls, basis: BasisSpec, comps: dict) -> "StateVector":
        amp = np.zeros(basis.dim, dtype=complex)
        for label, value in comps.items():
            amp[basis.index(label)] = value
        return cls(basis, amp)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(self.basis, self.amplitudes / self.norm)

    def overlap(self, other: "StateVector") -> complex:
        _require_same_basis(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass
class FockOperator:
    """Dense operator over a :class:`BasisSpec`.

    ``dropped_weight`` is the summed squared magnitude of matrix elements
    that fell outside the basis during construction (0.0 for anything
    built by composition or exponentiation).
    """

    basis: BasisSpec
    matrix: np.ndarray
    dropped_weight: float = 0.0

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (self.basis.dim, self.basis.dim):
            raise ValueError("matrix shape does not match basis dimension")
        self.matrix = mat

    @property
    def has_overflow(self) -> bool:
        return self.dropped_weight > 0.0

    def dagger(self) -> "FockOperator":
        return FockOperator(self.basis, self.matrix.conj().T, self.dropped_weight)

    def apply(self, state: StateVector) -> StateVector:
        _require_same_basis(self, state)
        return StateVector(self.basis, self.matrix @ state.amplitudes)

    def expectation(self, state: StateVector) -> complex:
        _require_same_basis(self, state)
        return complex(np.vdot(state.amplitudes, self.matrix @ state.amplitudes))

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        _require_same_basis(self, other)
        return FockOperator(self.basis, self.matrix @ other.matrix)

    def __add__(self, other: "FockOperator") -> "FockOperator":
        _require_same_basis(self, other)
        return FockOperator(
            self.basis,
            self.matrix + other.matrix,
            self.dropped_weight + other.dropped_weight,
        )

    def __mul__(self, scalar: complex) -> "FockOperator":
        return FockOperator(self.basis, self.matrix * scalar, self.dropped_weight)

    __rmul__ = __mul__


def identity(basis: BasisSpec) -> FockOperator:
    return FockOperator(basis, np.eye(basis.dim, dtype=complex))


def build_ladder(
    basis: BasisSpec, mode: str, *, create: bool = False, strict: bool = False
) -> FockOperator:
    """Single-mode ladder operator, lowering by default.

    Elements that leave the sector set are dropped (tracked) or, in strict
    mode, raise SectorOverflow. ``build_ladder(b, m, create=True)`` is the
    exact adjoint of ``build_ladder(b, m)`` restricted to the basis.
    """
    if mode not in basis.mode_ids:
        raise UnknownMode(f"mode {mode!r} not in basis modes {basis.mode_ids}")
    pos = basis.mode_ids.index(mode)
    offset = 1 if basis.qubit_included else 0
    mat = np.zeros((basis.dim, basis.dim), dtype=complex)
    dropped = 0.0
    for col, label in enumerate(basis.states):
        occ = list(label)
        n = occ[offset + pos]
        if create:
            value = math.sqrt(n + 1)
            occ[offset + pos] = n + 1
        else:
            if n == 0:
                continue
            value = math.sqrt(n)
            occ[offset + pos] = n - 1
        target = tuple(occ)
        row = basis.index_map.get(target)
        if row is None:
            if strict:
                raise SectorOverflow(
                    f"{'creation' if create else 'annihilation'} on mode {mode!r} "
                    f"maps {label} outside the sector set"
                )
            dropped += value * value
            continue
        mat[row, col] = value
    return FockOperator(basis, mat, dropped)


def build_number(basis: BasisSpec, mode: str) -> FockOperator:
    """Occupation-number operator for one mode (always sector preserving)."""
    if mode not in basis.mode_ids:
        raise UnknownMode(f"mode {mode!r} not in basis modes {basis.mode_ids}")
    pos = basis.mode_ids.index(mode)
    offset = 1 if basis.qubit_included else 0
    diag = np.array([label[offset + pos] for label in basis.states], dtype=complex)
    return FockOperator(basis, np.diag(diag))


def build_pauli(basis: BasisSpec, which: str) -> FockOperator:
    """Qubit operator ('z', 'x', 'y', 'plus' or 'minus') acting as identity
    on the boson modes. 'plus' maps down to up."""
    if not basis.qubit_included:
        raise NoQubit("basis has no two-level system")
    mat = np.zeros((basis.dim, basis.dim), dtype=complex)
    if which == "z":
        for k, label in enumerate(basis.states):
            mat[k, k] = 1.0 if label[0] == SPIN_UP else -1.0
        return FockOperator(basis, mat)
    if which not in ("plus", "minus", "x", "y"):
        raise ValueError(f"unknown qubit operator {which!r}")
    for col, label in enumerate(basis.states):
        if label[0] == SPIN_DOWN:
            up = (SPIN_UP,) + label[1:]
            row = basis.index(up)  # same boson occupations, always present
            if which in ("plus", "x"):
                mat[row, col] += 1.0
            if which == "y":
                mat[row, col] += -1.0j
        else:
            down = (SPIN_DOWN,) + label[1:]
            row = basis.index(down)
            if which in ("minus", "x"):
                mat[row, col] += 1.0
            if which == "y":
                mat[row, col] += 1.0j
    return FockOperator(basis, mat)


def matrix_exponential(op: FockOperator, scale: complex = 1.0) -> FockOperator:
    """exp(scale * op) as a new operator on the same basis.

    Hermitian and anti-Hermitian inputs go through an eigendecomposition,
    anything else through Pade scaling and squaring. The spectral norm of
    the scaled argument must stay below the supported cap.
    """
    a = scale * op.matrix
    if np.linalg.norm(a, 2) > TOL.expm_norm_cap:
        raise NormTooLarge(
            f"||scale * op|| exceeds the supported cap {TOL.expm_norm_cap}"
        )
    herm_defect = np.abs(op.matrix - op.matrix.conj().T).max()
    anti_defect = np.abs(op.matrix + op.matrix.conj().T).max()
    if min(herm_defect, anti_defect) < TOL.hermiticity and op.basis.dim > 1:
        if herm_defect <= anti_defect:
            w, v = np.linalg.eigh(op.matrix)
        else:
            w, v = np.linalg.eigh(-1j * op.matrix)
            w = 1j * w
        mat = (v * np.exp(scale * w)) @ v.conj().T
    else:
        mat = scipy.linalg.expm(a)
    return FockOperator(op.basis, mat)


@dataclass
class DensityMatrix:
    basis: BasisSpec
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (self.basis.dim, self.basis.dim):
            raise ValueError("matrix shape does not match basis dimension")
        self.matrix = mat

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityMatrix":
        amp = state.amplitudes
        return cls(state.basis, np.outer(amp, amp.conj()))

    def validate(self):
        """Raise ValueError unless Hermitian, unit trace and PSD within
        the configured tolerances."""
        mat = self.matrix
        if np.abs(mat - mat.conj().T).max() > TOL.hermiticity:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(mat).real - 1.0) > 10 * TOL.state_norm or abs(
            np.trace(mat).imag
        ) > TOL.hermiticity:
            raise ValueError("density matrix trace is not 1")
        if np.linalg.eigvalsh(mat).min() < TOL.psd_floor:
            raise ValueError("density matrix has a negative eigenvalue")
        return self

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


# subsystem units that can be kept or traced as a whole: the qubit, and
# each mode pair (a sector total binds the pair, so tracing half a pair
# has no sector-resolved meaning here)
def _subsystem_units(basis: BasisSpec) -> list[tuple[str, ...]]:
    units: list[tuple[str, ...]] = []
    if basis.qubit_included:
        units.append(("qubit",))
    for pair in _PAIRS.get(basis.mode_count, ()):
        units.append(pair)
    return units


def partial_trace(rho: DensityMatrix, keep: set) -> DensityMatrix:
    """Trace out everything except the subsystems named in ``keep``.

    keep is a set of ids from {'qubit', 'a', 'b', 'c', 'd'}; it must be a
    union of whole units (the qubit, the (a, b) pair, the (c, d) pair)
    and must leave at least one unit on each side of the cut.
    """
    basis = rho.basis
    units = _subsystem_units(basis)
    all_ids = set().union(*units) if units else set()
    keep = set(keep)
    if not keep or not keep.issubset(all_ids):
        raise BadSubsystem(f"keep must be a non-empty subset of {sorted(all_ids)}")
    kept_units = [u for u in units if keep.issuperset(u)]
    covered = set().union(*kept_units) if kept_units else set()
    if covered != keep:
        # some requested id is only half of its unit
        raise BadSubsystem(
            "keep must be a union of whole subsystems: the qubit and mode pairs"
        )
    if len(kept_units) == len(units):
        raise BadSubsystem("nothing left to trace out")

    keep_qubit = ("qubit",) in kept_units
    kept_pairs = [u for u in kept_units if u != ("qubit",)]

    def split(label: tuple) -> tuple[tuple, tuple]:
        parts_kept, parts_rest = [], []
        pos = 0
        if basis.qubit_included:
            (parts_kept if keep_qubit else parts_rest).append(label[0])
            pos = 1
        for pair in _PAIRS.get(basis.mode_count, ()):
            chunk = label[pos : pos + 2]
            (parts_kept if pair in kept_pairs else parts_rest).append(chunk)
            pos += 2
        flat_kept = tuple(
            x for p in parts_kept for x in (p if isinstance(p, tuple) else (p,))
        )
        flat_rest = tuple(
            x for p in parts_rest for x in (p if isinstance(p, tuple) else (p,))
        )
        return flat_kept, flat_rest

    # reduced basis over the kept units
    if kept_pairs:
        if len(kept_pairs) == 1:
            sectors = sorted(
                {
                    (s if isinstance(s, int) else s[0 if kept_pairs[0] == ("a", "b") else 1])
                    for s in basis.sector_totals
                }
            )
            reduced = BasisSpec(2, tuple(sectors), qubit_included=keep_qubit)
        else:
            reduced = BasisSpec(4, basis.sector_totals, qubit_included=keep_qubit)
    else:
        reduced = BasisSpec(0, (), qubit_included=True)

    kept_index = np.empty(basis.dim, dtype=int)
    rest_groups: dict[tuple, list[int]] = {}
    for k, label in enumerate(basis.states):
        fk, fr = split(label)
        kept_index[k] = reduced.index(fk)
        rest_groups.setdefault(fr, []).append(k)

    out = np.zeros((reduced.dim, reduced.dim), dtype=complex)
    for idxs in rest_groups.values():
        sel = np.asarray(idxs)
        out[np.ix_(kept_index[sel], kept_index[sel])] += rho.matrix[np.ix_(sel, sel)]
    return DensityMatrix(reduced, out)


def linear_entropy(rho: DensityMatrix) -> float:
    """1 - Tr(rho^2). Zero iff pure, at most 1 - 1/dim."""
    return float(1.0 - rho.purity())
