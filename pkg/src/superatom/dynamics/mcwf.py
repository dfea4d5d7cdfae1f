"""Monte-Carlo wave-function trajectories with waiting-time jump selection.

Between jumps the unnormalized state follows
``i d psi/dt = (H - i/2 sum_m C_m^dag C_m) psi``.  A jump fires when
``||psi||^2`` falls to a uniform threshold ``r``; the crossing is located by
bisection on a dyadic sub-grid of the integration step.

Time is tracked in integer units ``u = dt / 2**K`` so that click times and
sample times never accumulate rounding drift.  The step propagators
``exp(-i H_eff u 2**l)`` for ``l = 0..K`` are precomputed once per
Hamiltonian; whole steps are taken ``lookahead`` at a time with stacked
powers of the step matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from ..errors import (
    ConfigurationError,
    DimensionError,
    IntegratorError,
    InvalidJumpError,
    NumericalError,
)
from ..hilbert import SparseOperator, StateVector, photon_numbers

DENSE_CAP = 1024
INTEGRATORS = ("expm", "rk4")


@dataclass(frozen=True)
class TrajectoryConfig:
    """Integration and sampling settings; times in microseconds.

    The actual step ``dt`` is the largest value ``<= dt_max`` that divides
    ``sample_dt``; ``t_final`` must be a whole number of sampling intervals.
    """

    t_final: float = 20.0
    dt_max: float = 0.005
    sample_dt: float = 0.01
    seed: int = 0
    jump_time_tol: float = 1e-5
    norm_floor: float = 1e-12
    integrator: str = "expm"
    store_states: bool = False
    lookahead: int = 32

    def __post_init__(self):
        if not 0 < self.dt_max <= self.sample_dt <= self.t_final:
            raise ConfigurationError("need 0 < dt_max <= sample_dt <= t_final", "dt_max")
        ratio = self.t_final / self.sample_dt
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ConfigurationError("t_final must be a multiple of sample_dt", "t_final")
        if not 0 < self.jump_time_tol <= self.dt_max / 10:
            raise ConfigurationError("need 0 < jump_time_tol <= dt_max/10", "jump_time_tol")
        if not 0 < self.norm_floor < 1:
            raise ConfigurationError("need 0 < norm_floor < 1", "norm_floor")
        if self.integrator not in INTEGRATORS:
            raise ConfigurationError(f"unknown integrator {self.integrator!r}", "integrator")
        if self.lookahead < 1:
            raise ConfigurationError("must be >= 1", "lookahead")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError("seed must fit in 64 bits", "seed")

    @property
    def steps_per_sample(self) -> int:
        return max(1, math.ceil(self.sample_dt / self.dt_max - 1e-9))

    @property
    def dt(self) -> float:
        return self.sample_dt / self.steps_per_sample

    @property
    def n_samples(self) -> int:
        return int(round(self.t_final / self.sample_dt)) + 1

    @property
    def bisection_levels(self) -> int:
        return max(1, math.ceil(math.log2(self.dt / self.jump_time_tol)))

    @property
    def sample_times(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.sample_dt


@dataclass(frozen=True, eq=False)
class ClickRecord:
    """Detector clicks of one trajectory.

    ``post_jump_photon`` holds ``<a^dag a>`` of the state right after each
    jump, i.e. the conditional photon number at zero delay.
    """

    times: np.ndarray
    channels: tuple[str, ...]
    post_jump_photon: np.ndarray
    t_final: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        post = np.asarray(self.post_jump_photon, dtype=float)
        if not (times.shape == post.shape == (len(self.channels),)):
            raise DimensionError("click fields have inconsistent lengths")
        if np.any(np.diff(times) <= 0):
            raise NumericalError("click times must be strictly increasing")
        if times.size and (times[0] < 0 or times[-1] > self.t_final * (1 + 1e-12)):
            raise NumericalError("click time outside [0, t_final]")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "post_jump_photon", post)
        object.__setattr__(self, "channels", tuple(self.channels))

    @property
    def events(self) -> list[tuple[float, str]]:
        return list(zip(self.times.tolist(), self.channels))

    def channel_times(self, channel: str = "cavity") -> np.ndarray:
        mask = np.array([c == channel for c in self.channels], dtype=bool)
        return self.times[mask] if mask.size else self.times

    def __len__(self) -> int:
        return len(self.channels)


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    sample_times: np.ndarray
    mean_photon: np.ndarray
    ladder_populations: np.ndarray
    clicks: ClickRecord
    seed_used: int
    trajectory_index: int = 0
    states: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        n = len(self.sample_times)
        if self.mean_photon.shape != (n,) or self.ladder_populations.shape[0] != n:
            raise DimensionError("sample arrays have inconsistent lengths")


def apply_jump(C: SparseOperator, psi: StateVector) -> StateVector:
    """Post-jump state ``C psi / ||C psi||``."""
    if C.dimension != psi.basis.dimension:
        raise DimensionError(f"dimension mismatch: {C.dimension} vs {psi.basis.dimension}")
    out = C.matrix @ psi.amplitudes
    nrm = np.linalg.norm(out)
    if nrm == 0.0:
        raise InvalidJumpError(f"jump {C.label or '?'} annihilates the state")
    return StateVector(psi.basis, out / nrm).normalized()


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for trajectory ``index`` of the ensemble keyed by ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def effective_hamiltonian(H: SparseOperator, jumps: Sequence[SparseOperator]) -> np.ndarray:
    heff = H.toarray().astype(complex)
    for c in jumps:
        cm = c.matrix
        heff -= 0.5j * (cm.conj().T @ cm).toarray()
    return heff


class _Propagators:
    """Dense dyadic step matrices for one ``H_eff``."""

    def __init__(self, heff: np.ndarray, cfg: TrajectoryConfig):
        d = heff.shape[0]
        K = cfg.bisection_levels
        unit = cfg.dt / 2**K
        self.levels = []
        for level in range(K + 1):
            z = -1j * heff * (unit * 2**level)
            if cfg.integrator == "expm":
                m = scipy.linalg.expm(z)
            else:
                m = _rk4_matrix(z)
            self.levels.append(np.ascontiguousarray(m))
        step = self.levels[K]
        if cfg.integrator == "rk4":
            rho = np.max(np.abs(np.linalg.eigvals(step)))
            if rho > 1 + 1e-12:
                raise IntegratorError(
                    f"rk4 step dt={cfg.dt:.3g} is unstable (spectral radius {rho:.6f})")
        powers = [step]
        for _ in range(cfg.lookahead - 1):
            powers.append(step @ powers[-1])
        self.block = np.ascontiguousarray(np.stack(powers).reshape(cfg.lookahead * d, d))
        if not all(np.all(np.isfinite(m)) for m in self.levels) or not np.all(
                np.isfinite(self.block)):
            raise NumericalError("non-finite propagator")


def _rk4_matrix(z: np.ndarray) -> np.ndarray:
    """Classical RK4 update matrix ``1 + z + z^2/2 + z^3/6 + z^4/24`` for ``y' = (z/h) y``."""
    eye = np.eye(z.shape[0], dtype=complex)
    return eye + z @ (eye + z @ (eye + z @ (eye + z / 4) / 3) / 2)


class TrajectoryEngine:
    """Precomputed propagators for repeated trajectories of one model.

    ``H_quench`` (optional) replaces ``H`` from the first cavity click on.
    Engines are immutable after construction and safe to share.
    """

    def __init__(self, H: SparseOperator, jumps: Sequence[SparseOperator],
                 basis, cfg: TrajectoryConfig, H_quench: SparseOperator | None = None,
                 quench_channel: str = "cavity"):
        d = H.dimension
        if d != basis.dimension:
            raise DimensionError(f"H dimension {d} != basis dimension {basis.dimension}")
        if d > DENSE_CAP:
            raise DimensionError(f"dimension {d} exceeds dense propagator cap {DENSE_CAP}")
        if not H.hermitian:
            raise ConfigurationError("H must be flagged Hermitian", "H")
        for c in jumps:
            if c.dimension != d:
                raise DimensionError(f"jump {c.label!r} has dimension {c.dimension} != {d}")
        self.cfg = cfg
        self.basis = basis
        self.dimension = d
        self.jumps = [c.matrix for c in jumps if not c.is_zero()]
        self.labels = [c.label or f"channel{i}" for i, c in enumerate(jumps) if not c.is_zero()]
        self.props = _Propagators(effective_hamiltonian(H, jumps), cfg)
        self.quench_props = None
        self.quench_channel = quench_channel
        if H_quench is not None:
            if H_quench.dimension != d or not H_quench.hermitian:
                raise ConfigurationError("quench Hamiltonian must match H", "H_quench")
            self.quench_props = _Propagators(effective_hamiltonian(H_quench, jumps), cfg)
        self.photon = photon_numbers(basis)

    def run(self, psi0: StateVector, seed: int | None = None, index: int = 0) -> TrajectoryRecord:
        seed = self.cfg.seed if seed is None else seed
        if psi0.basis != self.basis:
            raise DimensionError("initial state lives in a different basis")
        if abs(psi0.norm() - 1.0) > 1e-10:
            raise ConfigurationError("initial state must be normalized", "psi0")
        return _Run(self, trajectory_rng(seed, index)).execute(psi0.amplitudes, seed, index)


class _Run:
    """Mutable state of a single trajectory."""

    def __init__(self, engine: TrajectoryEngine, rng: np.random.Generator):
        cfg = engine.cfg
        self.e = engine
        self.rng = rng
        self.props = engine.props
        self.quenched = False
        self.K = cfg.bisection_levels
        self.unit = cfg.dt / 2**self.K
        self.steps_per_sample = cfg.steps_per_sample
        self.times: list[float] = []
        self.channels: list[str] = []
        self.post: list[float] = []
        n = cfg.n_samples
        levels = engine.basis.ladder_levels
        self.mean_photon = np.empty(n)
        self.pops = np.empty((n, levels))
        self.states = np.empty((n, engine.dimension), dtype=complex) if cfg.store_states else None
        self.r = self._threshold()

    def _threshold(self) -> float:
        r = self.rng.random()
        while r == 0.0:
            r = self.rng.random()
        return r

    def _sample(self, k: int, psi: np.ndarray):
        p = (psi.real**2 + psi.imag**2)
        total = p.sum()
        p = p / total
        self.mean_photon[k] = p @ self.e.photon
        self.pops[k] = p.reshape(self.e.basis.ladder_levels, -1).sum(axis=1)
        if self.states is not None:
            self.states[k] = psi / math.sqrt(total)

    def _sample_block(self, first_step: int, Y: np.ndarray):
        """Record samples for rows of ``Y`` (states at steps first_step, first_step+1, ...)."""
        m = self.steps_per_sample
        offset = (-first_step) % m
        for row in range(offset, Y.shape[0], m):
            self._sample((first_step + row) // m, Y[row])

    def _jump(self, psi: np.ndarray, t: float) -> np.ndarray:
        outs = [c @ psi for c in self.e.jumps]
        weights = np.array([np.vdot(o, o).real for o in outs])
        total = weights.sum()
        if not total > 0:
            raise InvalidJumpError(f"norm threshold crossed at t={t} with zero jump weight")
        x = self.rng.random() * total
        m = min(int(np.searchsorted(np.cumsum(weights), x, side="right")), len(weights) - 1)
        while weights[m] == 0.0:
            m -= 1
        out = outs[m] / math.sqrt(weights[m])
        label = self.e.labels[m]
        if self.times and t <= self.times[-1]:
            raise IntegratorError("two jumps resolved at the same time")
        self.times.append(t)
        self.channels.append(label)
        p = out.real**2 + out.imag**2
        self.post.append(float(p @ self.e.photon / p.sum()))
        if (self.e.quench_props is not None and not self.quenched
                and label == self.e.quench_channel):
            self.props = self.e.quench_props
            self.quenched = True
        self.r = self._threshold()
        return out

    @staticmethod
    def _norm2(psi: np.ndarray) -> float:
        return float(psi.real @ psi.real + psi.imag @ psi.imag)

    def _check_decay(self, before: float, after: float):
        if not np.isfinite(after):
            raise NumericalError("non-finite amplitudes during propagation")
        if after > before * (1 + 1e-10) + 1e-300:
            raise IntegratorError(f"norm grew from {before!r} to {after!r} between jumps")

    def _advance(self, psi: np.ndarray, start: int, n_units: int) -> np.ndarray:
        """Propagate ``n_units`` fine units from unit ``start``, firing any jumps."""
        pos = 0
        levels = self.props.levels
        while pos < n_units:
            level = min(self.K, (n_units - pos).bit_length() - 1)
            levels = self.props.levels
            cand = levels[level] @ psi
            before, after = self._norm2(psi), self._norm2(cand)
            self._check_decay(before, after)
            if after > self.r:
                psi = cand
                pos += 1 << level
                continue
            base, off = psi, 0
            for sub in range(level - 1, -1, -1):
                trial = levels[sub] @ base
                if self._norm2(trial) > self.r:
                    base, off = trial, off + (1 << sub)
            psi = levels[0] @ base
            pos += off + 1
            psi = self._jump(psi, (start + pos) * self.unit)
        return psi

    def execute(self, psi: np.ndarray, seed: int, index: int) -> TrajectoryRecord:
        cfg = self.e.cfg
        d = self.e.dimension
        psi = np.array(psi, dtype=complex)
        n_steps = (cfg.n_samples - 1) * self.steps_per_sample
        step_units = 1 << self.K
        self._sample(0, psi)
        step = 0
        while step < n_steps:
            J = min(cfg.lookahead, n_steps - step)
            Y = (self.props.block[: J * d] @ psi).reshape(J, d)
            n2 = np.einsum("ij,ij->i", Y.real, Y.real) + np.einsum("ij,ij->i", Y.imag, Y.imag)
            if not np.all(np.isfinite(n2)):
                raise NumericalError("non-finite amplitudes during propagation")
            seq = np.concatenate(([self._norm2(psi)], n2))
            if np.any(seq[1:] > seq[:-1] * (1 + 1e-10) + 1e-300):
                raise IntegratorError("norm increased between jumps")
            crossed = np.nonzero(n2 <= self.r)[0]
            if crossed.size == 0:
                self._sample_block(step + 1, Y)
                psi = Y[-1]
                step += J
                if n2[-1] < cfg.norm_floor:
                    raise IntegratorError(
                        f"norm {n2[-1]:.3e} fell below norm_floor without a jump bracket")
                continue
            j = int(crossed[0])
            if j:
                self._sample_block(step + 1, Y[:j])
                psi = Y[j - 1]
            step += j
            psi = self._advance(psi, step * step_units, step_units)
            step += 1
            if step % self.steps_per_sample == 0:
                self._sample(step // self.steps_per_sample, psi)
        clicks = ClickRecord(np.array(self.times), tuple(self.channels), np.array(self.post),
                             cfg.t_final)
        return TrajectoryRecord(cfg.sample_times, self.mean_photon, self.pops, clicks,
                                seed_used=seed, trajectory_index=index, states=self.states)


def run_trajectory(H: SparseOperator, jumps: Sequence[SparseOperator], psi0: StateVector,
                   cfg: TrajectoryConfig, index: int = 0) -> TrajectoryRecord:
    """One MCWF trajectory; deterministic in ``(cfg.seed, index)`` and the inputs."""
    return TrajectoryEngine(H, jumps, psi0.basis, cfg).run(psi0, cfg.seed, index)


def run_trajectory_with_quench(H: SparseOperator, H_quench: SparseOperator,
                               jumps: Sequence[SparseOperator], psi0: StateVector,
                               cfg: TrajectoryConfig, index: int = 0) -> TrajectoryRecord:
    """As :func:`run_trajectory`, switching to ``H_quench`` at the first cavity click."""
    engine = TrajectoryEngine(H, jumps, psi0.basis, cfg, H_quench=H_quench)
    return engine.run(psi0, cfg.seed, index)
