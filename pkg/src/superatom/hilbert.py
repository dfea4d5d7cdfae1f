"""Truncated product space (atomic ladder x Fock) and sparse operators on it.

Basis states are ``|E_k, n>`` with ladder level ``k`` (``E_0`` is the
collective ground state ``G``) and photon number ``n <= n_max``.  They are laid
out row-major: ``index = k * (n_max + 1) + n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, DimensionError, NumericalError

HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-12


@dataclass(frozen=True)
class BasisSpec:
    ladder_levels: int
    photon_cutoff: int

    def __post_init__(self):
        if int(self.ladder_levels) != self.ladder_levels or self.ladder_levels < 2:
            raise ConfigurationError("need at least two ladder levels", "ladder_levels")
        if int(self.photon_cutoff) != self.photon_cutoff or self.photon_cutoff < 1:
            raise ConfigurationError("photon cutoff must be >= 1", "n_max")

    @property
    def fock_dim(self) -> int:
        return self.photon_cutoff + 1

    @property
    def dimension(self) -> int:
        return self.ladder_levels * self.fock_dim

    @property
    def n_b(self) -> int:
        return self.ladder_levels - 1


def flat_index(k: int, n: int, basis: BasisSpec) -> int:
    """Position of ``|E_k, n>`` in the flat amplitude vector."""
    if not 0 <= k < basis.ladder_levels:
        raise IndexError(f"ladder level {k} outside 0..{basis.ladder_levels - 1}")
    if not 0 <= n <= basis.photon_cutoff:
        raise IndexError(f"photon number {n} outside 0..{basis.photon_cutoff}")
    return k * basis.fock_dim + n


def unflatten(index: int, basis: BasisSpec) -> tuple[int, int]:
    if not 0 <= index < basis.dimension:
        raise IndexError(f"index {index} outside 0..{basis.dimension - 1}")
    return divmod(index, basis.fock_dim)


def photon_numbers(basis: BasisSpec) -> np.ndarray:
    """Photon number of every basis state, in flat order."""
    return np.tile(np.arange(basis.fock_dim, dtype=float), basis.ladder_levels)


def ladder_numbers(basis: BasisSpec) -> np.ndarray:
    """Ladder level ``k`` of every basis state, in flat order."""
    return np.repeat(np.arange(basis.ladder_levels, dtype=float), basis.fock_dim)


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Complex sparse matrix in canonical CSR form (sorted, no duplicates).

    ``hermitian=True`` asserts ``H == H^dagger`` to ``HERMITIAN_TOL`` in max
    norm; the check runs at construction.
    """

    matrix: sp.csr_matrix
    hermitian: bool = False
    label: str = ""

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=complex)
        if m.shape[0] != m.shape[1]:
            raise DimensionError(f"operator must be square, got {m.shape}")
        m.sum_duplicates()
        m.sort_indices()
        if not np.all(np.isfinite(m.data)):
            raise NumericalError("operator has non-finite entries")
        for arr in (m.data, m.indices, m.indptr):
            arr.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        if self.hermitian:
            err = hermiticity_error(m)
            if err > HERMITIAN_TOL * max(1.0, _max_abs(m)):
                raise NumericalError(f"operator flagged Hermitian deviates by {err:.3e}")

    @classmethod
    def from_entries(cls, dimension: int, entries: Iterable[tuple[int, int, complex]],
                     hermitian: bool = False, label: str = "") -> "SparseOperator":
        entries = list(entries)
        if entries:
            rows, cols, vals = zip(*entries)
        else:
            rows, cols, vals = (), (), ()
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if rows.size and (rows.min() < 0 or cols.min() < 0
                          or rows.max() >= dimension or cols.max() >= dimension):
            raise DimensionError(f"entry index outside 0..{dimension - 1}")
        m = sp.coo_matrix((np.asarray(vals, dtype=complex), (rows, cols)),
                          shape=(dimension, dimension))
        return cls(m.tocsr(), hermitian=hermitian, label=label)

    @classmethod
    def zeros(cls, dimension: int, label: str = "") -> "SparseOperator":
        return cls(sp.csr_matrix((dimension, dimension), dtype=complex), label=label)

    @classmethod
    def identity(cls, dimension: int) -> "SparseOperator":
        return cls(sp.identity(dimension, dtype=complex, format="csr"), hermitian=True,
                   label="identity")

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def entries(self) -> list[tuple[int, int, complex]]:
        """Row-major list of stored ``(row, col, value)`` triples."""
        m = self.matrix
        rows = np.repeat(np.arange(m.shape[0]), np.diff(m.indptr))
        return [(int(r), int(c), complex(v)) for r, c, v in zip(rows, m.indices, m.data)]

    def dag(self) -> "SparseOperator":
        return SparseOperator(self.matrix.conj().T.tocsr(), hermitian=self.hermitian,
                              label=f"{self.label}^dag" if self.label else "")

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def is_zero(self) -> bool:
        return self.matrix.count_nonzero() == 0

    def with_label(self, label: str) -> "SparseOperator":
        return SparseOperator(self.matrix, hermitian=self.hermitian, label=label)

    def __matmul__(self, other: "SparseOperator") -> "SparseOperator":
        _check_dims(self.dimension, other.dimension)
        return SparseOperator(self.matrix @ other.matrix)

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        _check_dims(self.dimension, other.dimension)
        return SparseOperator(self.matrix + other.matrix,
                              hermitian=self.hermitian and other.hermitian)

    def __sub__(self, other: "SparseOperator") -> "SparseOperator":
        _check_dims(self.dimension, other.dimension)
        return SparseOperator(self.matrix - other.matrix,
                              hermitian=self.hermitian and other.hermitian)

    def __mul__(self, scalar: complex) -> "SparseOperator":
        scalar = complex(scalar)
        return SparseOperator(self.matrix * scalar,
                              hermitian=self.hermitian and scalar.imag == 0.0,
                              label=self.label)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseOperator):
            return NotImplemented
        a, b = self.matrix, other.matrix
        return (a.shape == b.shape and np.array_equal(a.indptr, b.indptr)
                and np.array_equal(a.indices, b.indices) and np.array_equal(a.data, b.data))

    __hash__ = None


def _max_abs(m: sp.spmatrix) -> float:
    return float(np.max(np.abs(m.data))) if m.nnz else 0.0


def hermiticity_error(op: SparseOperator | sp.spmatrix) -> float:
    """``max |H - H^dagger|`` over all entries."""
    m = op.matrix if isinstance(op, SparseOperator) else sp.csr_matrix(op)
    return _max_abs(sp.csr_matrix(m - m.conj().T))


def _check_dims(a: int, b: int):
    if a != b:
        raise DimensionError(f"dimension mismatch: {a} vs {b}")


@dataclass(frozen=True, eq=False)
class StateVector:
    basis: BasisSpec
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.dimension,):
            raise DimensionError(
                f"expected {self.basis.dimension} amplitudes, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise NumericalError("state has non-finite amplitudes")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis_state(cls, basis: BasisSpec, k: int, n: int) -> "StateVector":
        amps = np.zeros(basis.dimension, dtype=complex)
        amps[flat_index(k, n, basis)] = 1.0
        return cls(basis, amps)

    @classmethod
    def superposition(cls, basis: BasisSpec,
                      terms: Sequence[tuple[complex, int, int]]) -> "StateVector":
        """Normalized ``sum_i c_i |E_{k_i}, n_i>`` from ``(c, k, n)`` triples."""
        amps = np.zeros(basis.dimension, dtype=complex)
        for c, k, n in terms:
            amps[flat_index(k, n, basis)] += c
        return cls(basis, amps).normalized()

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0.0:
            raise NumericalError("cannot normalize the zero vector")
        amps = self.amplitudes / nrm
        # a second pass removes the last-ulp error of the first division
        amps = amps / np.sqrt(np.vdot(amps, amps).real)
        return StateVector(self.basis, amps)

    def populations(self) -> np.ndarray:
        """Probability of each ladder level ``k`` (normalized state assumed)."""
        p = np.abs(self.amplitudes) ** 2
        return p.reshape(self.basis.ladder_levels, self.basis.fock_dim).sum(axis=1)

    def mean_photon(self) -> float:
        p = np.abs(self.amplitudes) ** 2
        return float(p @ photon_numbers(self.basis) / p.sum())


def apply(op: SparseOperator, psi: StateVector) -> StateVector:
    """``op |psi>`` without renormalization."""
    _check_dims(op.dimension, psi.basis.dimension)
    return StateVector(psi.basis, op.matrix @ psi.amplitudes)


def expectation(op: SparseOperator, psi: StateVector) -> complex:
    """``<psi| op |psi>`` (not divided by the norm)."""
    _check_dims(op.dimension, psi.basis.dimension)
    return complex(np.vdot(psi.amplitudes, op.matrix @ psi.amplitudes))


def _fock_annihilation(n_max: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1,
                    shape=(n_max + 1, n_max + 1), format="csr")


def annihilation(basis: BasisSpec) -> SparseOperator:
    """Cavity ``a`` acting on the Fock factor, identity on the ladder."""
    m = sp.kron(sp.identity(basis.ladder_levels), _fock_annihilation(basis.photon_cutoff))
    return SparseOperator(m.tocsr(), label="a")


def number_operator(basis: BasisSpec) -> SparseOperator:
    return SparseOperator(sp.diags(photon_numbers(basis)).tocsr(), hermitian=True,
                          label="n")


def ladder_number(basis: BasisSpec) -> SparseOperator:
    """``sum_k k |E_k><E_k|`` (identity on the Fock factor)."""
    return SparseOperator(sp.diags(ladder_numbers(basis)).tocsr(), hermitian=True,
                          label="k")


def excitation_number(basis: BasisSpec) -> SparseOperator:
    """Total excitations ``a^dag a + sum_k k |E_k><E_k|``."""
    return SparseOperator(sp.diags(photon_numbers(basis) + ladder_numbers(basis)).tocsr(),
                          hermitian=True, label="N_exc")


def ladder_projector(k: int, basis: BasisSpec) -> SparseOperator:
    diag = (ladder_numbers(basis) == k).astype(float)
    return SparseOperator(sp.diags(diag).tocsr(), hermitian=True, label=f"P_E{k}")


def ladder_raising(couplings: Sequence[float], basis: BasisSpec) -> SparseOperator:
    """``sum_k g_k |E_k><E_{k-1}|`` tensored with the Fock identity."""
    g = np.asarray(couplings, dtype=float)
    if g.ndim != 1 or g.size != basis.ladder_levels - 1:
        raise ConfigurationError(
            f"expected {basis.ladder_levels - 1} couplings, got {g.size}", "couplings")
    atom = sp.diags(g, -1, shape=(basis.ladder_levels, basis.ladder_levels))
    m = sp.kron(atom, sp.identity(basis.fock_dim))
    return SparseOperator(m.tocsr(), label="J+")
