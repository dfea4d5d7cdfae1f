"""Ensembles of independent trajectories with a scheduling-independent reduction.

Trajectory ``i`` draws from the stream keyed by ``(seed, i)``.  Trajectories
are grouped into fixed chunks of ``CHUNK`` consecutive indices; partial sums are
formed inside a chunk in index order and chunks are merged in chunk order, so
the result is bit-identical whether chunks run serially or on any number of
workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from ..errors import ConfigurationError, SuperAtomError
from ..hilbert import SparseOperator, StateVector
from .mcwf import ClickRecord, TrajectoryConfig, TrajectoryEngine, TrajectoryRecord

CHUNK = 64


class TrajectoryFailure(SuperAtomError):
    """A trajectory raised inside an ensemble run."""

    def __init__(self, index: int, message: str):
        super().__init__(index, message)
        self.index = index

    def __str__(self):
        return f"trajectory {self.args[0]} failed: {self.args[1]}"


@dataclass(eq=False)
class _Partial:
    n: int
    photon_sum: np.ndarray
    photon_sq_sum: np.ndarray
    pops_sum: np.ndarray
    rho_sum: np.ndarray | None
    clicks: list[ClickRecord]
    records: list[TrajectoryRecord] | None

    def merge(self, other: "_Partial"):
        self.n += other.n
        self.photon_sum += other.photon_sum
        self.photon_sq_sum += other.photon_sq_sum
        self.pops_sum += other.pops_sum
        if self.rho_sum is not None:
            self.rho_sum += other.rho_sum
        self.clicks.extend(other.clicks)
        if self.records is not None:
            self.records.extend(other.records)


@dataclass(eq=False)
class EnsembleResult:
    """Averages over ``n_trajectories`` plus every trajectory's click record.

    ``record`` is the averaged :class:`TrajectoryRecord` (its click record is
    empty); ``density`` holds the averaged projectors when states were stored.
    """

    record: TrajectoryRecord
    photon_stderr: np.ndarray
    clicks: list[ClickRecord]
    n_trajectories: int
    seed: int
    density: np.ndarray | None = None
    records: list[TrajectoryRecord] | None = field(default=None, repr=False)

    @property
    def sample_times(self) -> np.ndarray:
        return self.record.sample_times

    @property
    def mean_photon(self) -> np.ndarray:
        return self.record.mean_photon


def _run_chunk(engine: TrajectoryEngine, psi0: StateVector, seed: int, start: int, stop: int,
               keep_records: bool) -> _Partial:
    cfg = engine.cfg
    n = cfg.n_samples
    d = engine.dimension
    part = _Partial(0, np.zeros(n), np.zeros(n), np.zeros((n, engine.basis.ladder_levels)),
                    np.zeros((n, d, d), dtype=complex) if cfg.store_states else None,
                    [], [] if keep_records else None)
    for i in range(start, stop):
        try:
            rec = engine.run(psi0, seed, i)
        except Exception as exc:  # noqa: BLE001 - re-raised with the index attached
            raise TrajectoryFailure(i, f"{type(exc).__name__}: {exc}") from exc
        part.n += 1
        part.photon_sum += rec.mean_photon
        part.photon_sq_sum += rec.mean_photon**2
        part.pops_sum += rec.ladder_populations
        if part.rho_sum is not None:
            part.rho_sum += np.einsum("si,sj->sij", rec.states, rec.states.conj())
        part.clicks.append(rec.clicks)
        if part.records is not None:
            part.records.append(rec)
    return part


def _chunk_task(args):
    return _run_chunk(*args)


def chunk_bounds(M: int, chunk: int = CHUNK) -> list[tuple[int, int]]:
    return [(s, min(s + chunk, M)) for s in range(0, M, chunk)]


def run_ensemble(M: int, base_cfg: TrajectoryConfig, H: SparseOperator,
                 jumps: Sequence[SparseOperator], psi0: StateVector,
                 H_quench: SparseOperator | None = None, keep_records: bool = False,
                 map_fn: Callable[[Callable, Iterable], Iterable] | None = None) -> EnsembleResult:
    """Run ``M`` trajectories and reduce them deterministically.

    ``map_fn`` (e.g. ``executor.map``) distributes chunks; the default is the
    builtin ``map``.  ``H_quench`` turns every trajectory into a quench run.
    """
    if M < 1:
        raise ConfigurationError("ensemble size must be >= 1", "M")
    engine = TrajectoryEngine(H, jumps, psi0.basis, base_cfg, H_quench=H_quench)
    tasks = [(engine, psi0, base_cfg.seed, a, b, keep_records) for a, b in chunk_bounds(M)]
    mapper = map if map_fn is None else map_fn
    total = None
    for part in mapper(_chunk_task, tasks):
        if total is None:
            total = part
        else:
            total.merge(part)
    mean = total.photon_sum / M
    if M > 1:
        var = np.maximum(total.photon_sq_sum / M - mean**2, 0.0) * M / (M - 1)
        stderr = np.sqrt(var / M)
    else:
        stderr = np.full_like(mean, np.nan)
    empty = ClickRecord(np.empty(0), (), np.empty(0), base_cfg.t_final)
    record = TrajectoryRecord(base_cfg.sample_times, mean, total.pops_sum / M, empty,
                              seed_used=base_cfg.seed, trajectory_index=-1)
    density = None if total.rho_sum is None else total.rho_sum / M
    return EnsembleResult(record, stderr, total.clicks, M, base_cfg.seed, density,
                          total.records)
