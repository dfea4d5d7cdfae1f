"""Lindblad master equation: propagation and stationary state.

Superoperators act on column-stacked density matrices,
``vec(A rho B) = (B^T kron A) vec(rho)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import DegenerateSteadyStateError, DimensionError, NumericalError
from ..hilbert import SparseOperator, StateVector

ORACLE_CAP = 256


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray
    validate: bool = True

    def __post_init__(self):
        rho = np.array(self.matrix, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DimensionError(f"density matrix must be square, got {rho.shape}")
        if not np.all(np.isfinite(rho)):
            raise NumericalError("density matrix has non-finite entries")
        rho.flags.writeable = False
        object.__setattr__(self, "matrix", rho)
        if self.validate:
            self.check()

    def check(self, herm_tol=1e-10, trace_tol=1e-9, eig_tol=1e-8):
        rho = self.matrix
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > herm_tol:
            raise NumericalError(f"density matrix not Hermitian (deviation {herm:.2e})")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > trace_tol:
            raise NumericalError(f"density matrix trace {tr!r} != 1")
        low = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
        if low < -eig_tol:
            raise NumericalError(f"density matrix has negative eigenvalue {low:.2e}")

    @classmethod
    def from_state(cls, psi: StateVector) -> "DensityMatrix":
        v = psi.normalized().amplitudes
        return cls(np.outer(v, v.conj()))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def expectation(self, op: SparseOperator) -> complex:
        if op.dimension != self.dimension:
            raise DimensionError(f"dimension mismatch: {op.dimension} vs {self.dimension}")
        return complex(np.sum(op.matrix.multiply(self.matrix.T)))

    def trace_distance(self, other: "DensityMatrix | np.ndarray") -> float:
        sigma = other.matrix if isinstance(other, DensityMatrix) else np.asarray(other)
        diff = self.matrix - sigma
        return 0.5 * float(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))).sum())


def _check_cap(dim: int, cap: int):
    if dim > cap:
        raise DimensionError(f"dimension {dim} exceeds the master-equation cap {cap}")


def liouvillian(H: SparseOperator, jumps: Sequence[SparseOperator]) -> sp.csr_matrix:
    """Sparse generator ``L`` with ``d vec(rho)/dt = L vec(rho)``."""
    d = H.dimension
    eye = sp.identity(d, dtype=complex, format="csr")
    h = H.matrix
    out = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
    for c in jumps:
        if c.dimension != d:
            raise DimensionError(f"jump operator dimension {c.dimension} != {d}")
        if c.is_zero():
            continue
        cm = c.matrix
        cdc = (cm.conj().T @ cm).tocsr()
        out = out + sp.kron(cm.conj(), cm) - 0.5 * sp.kron(eye, cdc) - 0.5 * sp.kron(cdc.T, eye)
    return sp.csr_matrix(out)


def _vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def _unvec(v: np.ndarray, d: int) -> np.ndarray:
    rho = v.reshape(d, d, order="F")
    return 0.5 * (rho + rho.conj().T)


def master_evolve(H: SparseOperator, jumps: Sequence[SparseOperator], rho0: DensityMatrix,
                  times: Sequence[float], cap: int = ORACLE_CAP) -> list[DensityMatrix]:
    """Density matrices at each of the (non-decreasing) ``times``, from ``rho0`` at t = 0."""
    d = H.dimension
    _check_cap(d, cap)
    if rho0.dimension != d:
        raise DimensionError(f"rho0 dimension {rho0.dimension} != {d}")
    times = np.asarray(times, dtype=float)
    if times.size and (times[0] < 0 or np.any(np.diff(times) < 0)):
        raise ValueError("times must be non-negative and non-decreasing")
    L = liouvillian(H, jumps).tocsc()
    v = _vec(rho0.matrix).astype(complex)
    t_prev = 0.0
    out = []
    for t in times:
        if t > t_prev:
            v = spla.expm_multiply(L * (t - t_prev), v)
            t_prev = t
        out.append(_as_density(_unvec(v, d)))
    return out


def master_propagate(H: SparseOperator, jumps: Sequence[SparseOperator], rho0: DensityMatrix,
                     t_final: float, dt: float, cap: int = ORACLE_CAP) -> DensityMatrix:
    """``rho(t_final)`` reached in increments of ``dt``."""
    if dt <= 0 or t_final < 0:
        raise ValueError("need dt > 0 and t_final >= 0")
    n = max(1, int(np.ceil(t_final / dt - 1e-12)))
    return master_evolve(H, jumps, rho0, np.linspace(0.0, t_final, n + 1)[1:], cap=cap)[-1]


def _as_density(rho: np.ndarray) -> DensityMatrix:
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-8:
        raise NumericalError(f"trace drifted to {tr!r}")
    return DensityMatrix(rho)


def steady_state(H: SparseOperator, jumps: Sequence[SparseOperator], cap: int = ORACLE_CAP,
                 residual_tol: float = 1e-10, cond_limit: float = 1e13) -> DensityMatrix:
    """Unique stationary state from ``L rho = 0`` with ``tr rho = 1``.

    The first row of ``L`` is replaced by the trace functional.  A singular
    or badly conditioned system means the null space is not one-dimensional.
    """
    d = H.dimension
    _check_cap(d, cap)
    L = liouvillian(H, jumps)
    A = L.tolil()
    A[0, :] = 0.0
    A[0, np.arange(d) * (d + 1)] = 1.0
    A = A.tocsc()
    b = np.zeros(d * d, dtype=complex)
    b[0] = 1.0
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", sp.linalg.MatrixRankWarning)
            lu = spla.splu(A)
    except (RuntimeError, sp.linalg.MatrixRankWarning) as exc:
        raise DegenerateSteadyStateError(f"stationary state is not unique: {exc}") from exc
    inv = spla.LinearOperator(A.shape, matvec=lu.solve,
                              rmatvec=lambda x: lu.solve(x, trans="H"), dtype=complex)
    cond = spla.norm(A, 1) * spla.onenormest(inv)
    if not np.isfinite(cond) or cond > cond_limit:
        raise DegenerateSteadyStateError(
            f"near-degenerate stationary space (1-norm condition estimate {cond:.2e})")
    v = lu.solve(b)
    if not np.all(np.isfinite(v)):
        raise NumericalError("steady-state solve produced non-finite entries")
    rho = _unvec(v, d)
    rho = rho / np.trace(rho).real
    residual = np.max(np.abs(L @ _vec(rho)))
    if residual > residual_tol:
        raise DegenerateSteadyStateError(f"steady-state residual {residual:.2e} > {residual_tol}")
    return DensityMatrix(rho)
