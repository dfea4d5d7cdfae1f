"""Hamiltonians and jump operators for the blockaded-ensemble cavity system.

Every frequency is an angular frequency in rad/us (hbar = 1).  Hamiltonians
are written in the frame rotating at the probe frequency, so the probe
detuning ``delta = omega_probe - omega_c`` appears as ``-delta`` per
excitation quantum and the drive is the time-independent ``alpha (a + a^dag)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, DimensionError, ParameterError
from .hilbert import (
    BasisSpec,
    SparseOperator,
    StateVector,
    annihilation,
    excitation_number,
    ladder_number,
    ladder_raising,
)

TWO_PI = 2.0 * math.pi


def mhz(value: float) -> float:
    """Convert a frequency quoted as ``2 pi x value MHz`` to rad/us."""
    return TWO_PI * value


@dataclass(frozen=True)
class PhysicalParams:
    """Model parameters; frequencies and rates in rad/us.

    ``kappa`` is the cavity energy decay rate and ``gamma`` the Rydberg decay
    rate.  ``dispersive_shift`` is an optional extra energy per Rydberg
    excitation (AC Stark correction); it is zero unless set explicitly.
    """

    N: float = 1000
    g0: float = mhz(10.0)
    Omega: float = mhz(30.0)
    Delta: float = mhz(900.0)
    kappa: float = mhz(1.3)
    gamma: float = mhz(0.55e-3)
    alpha: float = 0.0
    delta_probe: float = 0.0
    n_b: int = 1
    n_max: int = 8
    dispersive_shift: float = 0.0

    def __post_init__(self):
        if not self.N >= 1:
            raise ConfigurationError("atom number must be >= 1", "N")
        if int(self.n_b) != self.n_b or self.n_b < 1:
            raise ConfigurationError("bubble count must be an integer >= 1", "n_b")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ConfigurationError("photon cutoff must be an integer >= 1", "n_max")
        if self.Delta == 0:
            raise ConfigurationError("intermediate-state detuning must be nonzero", "Delta")
        if not self.kappa > 0:
            raise ConfigurationError("cavity decay rate must be positive", "kappa")
        if not self.gamma >= 0:
            raise ConfigurationError("Rydberg decay rate must be >= 0", "gamma")
        if not self.alpha >= 0:
            raise ConfigurationError("drive amplitude is taken real and >= 0", "alpha")
        for name in ("g0", "Omega"):
            if not getattr(self, name) >= 0:
                raise ConfigurationError("coupling is taken real and >= 0", name)
        for name in ("N", "g0", "Omega", "Delta", "kappa", "gamma", "alpha",
                     "delta_probe", "dispersive_shift"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError("must be finite", name)

    def replace(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)

    @property
    def basis(self) -> BasisSpec:
        return BasisSpec(self.n_b + 1, self.n_max)


def effective_coupling(p: PhysicalParams) -> float:
    """Collective two-photon coupling ``sqrt(N) g0 Omega / Delta``."""
    if p.Delta == 0:
        raise ParameterError("Delta = 0: adiabatic elimination undefined")
    return math.sqrt(p.N) * p.g0 * p.Omega / p.Delta


def bubble_coupling(k: int, p: PhysicalParams) -> float:
    """Coupling ``g_k`` between ``E_{k-1}`` and ``E_k``; zero for ``k > n_b``.

    Each of the ``n_b`` bubbles is an effective two-level atom carrying
    ``N / n_b`` atoms, so ``g_k`` is a spin-``n_b/2`` raising matrix element.
    """
    if k < 1:
        raise ParameterError("ladder couplings start at k = 1")
    if k > p.n_b:
        return 0.0
    single = math.sqrt(p.N / p.n_b) * p.g0 * p.Omega / p.Delta
    return math.sqrt((p.n_b - k + 1) * k) * single


def ladder_couplings(p: PhysicalParams) -> np.ndarray:
    return np.array([bubble_coupling(k, p) for k in range(1, p.n_b + 1)])


def coupling_operator(p: PhysicalParams) -> SparseOperator:
    """``a sum_k g_k |E_k><E_{k-1}| + h.c.``"""
    basis = p.basis
    forward = annihilation(basis) @ ladder_raising(ladder_couplings(p), basis)
    return SparseOperator(forward.matrix + forward.matrix.conj().T, hermitian=True)


def drive_operator(p: PhysicalParams) -> SparseOperator:
    """Probe term ``alpha (a + a^dag)`` in the rotating frame."""
    a = annihilation(p.basis).matrix
    return SparseOperator(p.alpha * (a + a.T), hermitian=True, label="drive")


def build_ladder_hamiltonian(p: PhysicalParams) -> SparseOperator:
    """Driven bubble-ladder Hamiltonian; ``n_b = 1`` is the driven JC model."""
    basis = p.basis
    m = (-p.delta_probe) * excitation_number(basis).matrix
    if p.dispersive_shift:
        m = m + p.dispersive_shift * ladder_number(basis).matrix
    m = m + coupling_operator(p).matrix + drive_operator(p).matrix
    return SparseOperator(m, hermitian=True, label="H")


def ladder_lowering(basis: BasisSpec) -> SparseOperator:
    """Collective Rydberg decay ``|E_k, n> -> sqrt(k) |E_{k-1}, n>``."""
    k = np.arange(1, basis.ladder_levels, dtype=float)
    atom = sp.diags(np.sqrt(k), 1, shape=(basis.ladder_levels, basis.ladder_levels))
    return SparseOperator(sp.kron(atom, sp.identity(basis.fock_dim)).tocsr(), label="L")


def jump_operators(p: PhysicalParams) -> list[SparseOperator]:
    """``[sqrt(kappa) a, sqrt(gamma) L]`` labelled ``cavity`` and ``rydberg``."""
    basis = p.basis
    cav = math.sqrt(p.kappa) * annihilation(basis)
    ryd = math.sqrt(p.gamma) * ladder_lowering(basis)
    return [cav.with_label("cavity"), ryd.with_label("rydberg")]


def ground_state(p: PhysicalParams) -> StateVector:
    return StateVector.basis_state(p.basis, 0, 0)


# --- three-level collective model (adiabatic-elimination oracle) -----------


@dataclass(frozen=True)
class ThreeLevelBasisSpec:
    """Permutation-symmetric states ``|n_g, n_i, n_e>`` tensored with Fock states.

    Flat layout: ``atomic_index * (photon_cutoff + 1) + n`` with the atomic
    states ordered as in :attr:`atomic_states`.
    """

    N_small: int
    max_rydberg: int
    photon_cutoff: int
    max_dimension: int = 4096

    def __post_init__(self):
        if int(self.N_small) != self.N_small or not 1 <= self.N_small <= 6:
            raise ConfigurationError("oracle model supports 1 <= N_small <= 6", "N_small")
        if self.max_rydberg < 0:
            raise ConfigurationError("must be >= 0", "max_rydberg")
        if self.photon_cutoff < 1:
            raise ConfigurationError("must be >= 1", "photon_cutoff")
        if self.dimension > self.max_dimension:
            raise DimensionError(
                f"three-level basis has {self.dimension} states, cap is {self.max_dimension}")

    @property
    def atomic_states(self) -> list[tuple[int, int, int]]:
        out = []
        for n_e in range(min(self.max_rydberg, self.N_small) + 1):
            for n_i in range(self.N_small - n_e + 1):
                out.append((self.N_small - n_i - n_e, n_i, n_e))
        return out

    @property
    def fock_dim(self) -> int:
        return self.photon_cutoff + 1

    @property
    def dimension(self) -> int:
        return len(self.atomic_states) * self.fock_dim

    def index(self, n_g: int, n_i: int, n_e: int, n: int) -> int:
        atomic = self.atomic_states.index((n_g, n_i, n_e))
        if not 0 <= n <= self.photon_cutoff:
            raise IndexError(f"photon number {n} outside 0..{self.photon_cutoff}")
        return atomic * self.fock_dim + n

    def diagonal(self, which: str) -> np.ndarray:
        """Per-state value of ``n_g``, ``n_i``, ``n_e`` or ``n`` (photons)."""
        col = {"n_g": 0, "n_i": 1, "n_e": 2}
        if which == "n":
            return np.tile(np.arange(self.fock_dim, dtype=float), len(self.atomic_states))
        vals = np.array([s[col[which]] for s in self.atomic_states], dtype=float)
        return np.repeat(vals, self.fock_dim)


def build_three_level_full(spec: ThreeLevelBasisSpec, p: PhysicalParams,
                           U_shift: float = 0.0) -> SparseOperator:
    """Collective three-level Hamiltonian before adiabatic elimination.

    Uses ``p.g0``, ``p.Omega``, ``p.Delta``, ``p.alpha`` and ``p.delta_probe``;
    ``p.N`` is ignored in favour of ``spec.N_small``.  States with two or more
    Rydberg excitations are shifted by ``U_shift``.
    """
    n_ph = spec.fock_dim
    atoms = spec.atomic_states
    lookup = {s: i for i, s in enumerate(atoms)}
    entries: dict[tuple[int, int], complex] = {}

    def add(r, c, v):
        entries[(r, c)] = entries.get((r, c), 0.0) + v

    for ai, (n_g, n_i, n_e) in enumerate(atoms):
        for n in range(n_ph):
            col = ai * n_ph + n
            diag = -p.Delta * n_i - p.delta_probe * (n + n_i + n_e)
            if n_e >= 2:
                diag += U_shift
            if diag:
                add(col, col, diag)
            # g0 a |i><g| : absorb a photon, g -> i
            target = (n_g - 1, n_i + 1, n_e)
            if n_g > 0 and n > 0 and target in lookup:
                row = lookup[target] * n_ph + n - 1
                v = p.g0 * math.sqrt(n_g * (n_i + 1)) * math.sqrt(n)
                add(row, col, v)
                add(col, row, v)
            # Omega |e><i| : i -> e
            target = (n_g, n_i - 1, n_e + 1)
            if n_i > 0 and target in lookup:
                row = lookup[target] * n_ph + n
                v = p.Omega * math.sqrt(n_i * (n_e + 1))
                add(row, col, v)
                add(col, row, v)
            if p.alpha and n + 1 < n_ph:
                row = ai * n_ph + n + 1
                v = p.alpha * math.sqrt(n + 1)
                add(row, col, v)
                add(col, row, v)
    return SparseOperator.from_entries(
        spec.dimension, [(r, c, v) for (r, c), v in entries.items()],
        hermitian=True, label="H_3level")
