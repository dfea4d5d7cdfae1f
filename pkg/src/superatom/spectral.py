"""Spectroscopy of the undriven ladder: dressed states, multi-photon
resonances, perturbative line strengths and the combinatorial blockade."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ParameterError
from .hilbert import flat_index
from .models import PhysicalParams, build_ladder_hamiltonian, effective_coupling

DENSE_BLOCK_LIMIT = 64


@dataclass(frozen=True)
class DressedLevel:
    n: int
    branch: int
    frequency_offset: float


def dressed_frequencies(n: int, p: PhysicalParams) -> tuple[float, float]:
    """``(+g_eff sqrt(n), -g_eff sqrt(n))`` relative to ``n omega_c``."""
    if p.n_b != 1:
        raise ParameterError("closed-form dressed ladder needs n_b = 1; use ladder_spectrum")
    if n < 0:
        raise ParameterError("excitation number must be >= 0")
    if n == 0:
        return 0.0, 0.0
    shift = effective_coupling(p) * math.sqrt(n)
    return shift, -shift


def dressed_levels(p: PhysicalParams, n_max: int | None = None) -> list[DressedLevel]:
    top = p.n_max if n_max is None else n_max
    out = []
    for n in range(1, top + 1):
        plus, minus = dressed_frequencies(n, p)
        out += [DressedLevel(n, +1, plus), DressedLevel(n, -1, minus)]
    return out


def n_photon_resonance(n: int, p: PhysicalParams) -> tuple[float, float]:
    """Probe detunings ``+-g_eff / sqrt(n)`` that reach ``|n, +->`` with n photons."""
    if n < 1:
        raise ParameterError("n-photon resonance needs n >= 1")
    d = effective_coupling(p) / math.sqrt(n)
    return d, -d


@dataclass(frozen=True)
class PerturbativeStrengths:
    beta1: float
    p1: float
    n_avg1: float
    beta2: float
    p2: float
    n_avg2: float


def perturbative_strengths(p: PhysicalParams) -> PerturbativeStrengths:
    """Weak-drive estimates on resonance (``delta = 0`` from the dressed line).

    One photon: ``beta1 = alpha/sqrt(2)``, ``p1 = beta1^2 / (kappa^2/4)``,
    ``<n> = p1/2``.  Two photons: ``beta2 = 3 alpha^2 / g_eff``,
    ``p2 = beta2^2 / kappa'^2`` with ``kappa' = 3 kappa / 2``, ``<n> = 3 p2 / 2``.
    The two-photon amplitude is an order-of-magnitude estimate.
    """
    g = effective_coupling(p)
    beta1 = p.alpha / math.sqrt(2.0)
    p1 = beta1**2 / (p.kappa**2 / 4.0)
    if p.alpha == 0:
        beta2 = 0.0
    else:
        if g == 0:
            raise ParameterError("two-photon estimate needs g_eff > 0")
        beta2 = 3.0 * p.alpha**2 / g
    kappa_prime = 1.5 * p.kappa
    p2 = beta2**2 / kappa_prime**2
    return PerturbativeStrengths(beta1, p1, 0.5 * p1, beta2, p2, 1.5 * p2)


def excitation_block(p: PhysicalParams, n_exc: int) -> np.ndarray:
    """Flat indices of ``|E_k, n_exc - k>``, ordered by ``k``."""
    basis = p.basis
    if n_exc < 0:
        raise ParameterError("excitation number must be >= 0")
    if n_exc > basis.photon_cutoff:
        raise ConfigurationError(
            f"block n_exc={n_exc} is truncated by the photon cutoff {basis.photon_cutoff}",
            "n_max")
    return np.array([flat_index(k, n_exc - k, basis)
                     for k in range(min(p.n_b, n_exc) + 1)])


def ladder_spectrum(p: PhysicalParams, n_exc: int) -> np.ndarray:
    """Sorted eigenvalues of the undriven ``n_exc``-excitation block at ``delta = 0``."""
    idx = excitation_block(p, n_exc)
    if idx.size > DENSE_BLOCK_LIMIT:
        raise ConfigurationError(f"block of size {idx.size} exceeds dense limit", "n_exc")
    h = build_ladder_hamiltonian(p.replace(alpha=0.0, delta_probe=0.0))
    block = h.matrix[idx][:, idx].toarray()
    return np.sort(np.linalg.eigvalsh(block))


def two_excitation_eigenvalues(p: PhysicalParams) -> np.ndarray:
    """Closed form ``{0, +-sqrt(2 - 1/n_b) sqrt(2) g_eff}``; the zero is absent for n_b = 1."""
    g = effective_coupling(p)
    s = math.sqrt(2.0 - 1.0 / p.n_b) * math.sqrt(2.0) * g
    vals = [-s, s] if p.n_b == 1 else [-s, 0.0, s]
    return np.array(sorted(vals))


def blockade_detuning(p: PhysicalParams) -> tuple[float, float]:
    """Mismatch between the one- and two-photon resonances, exact and ``g_eff/(2 n_b)``."""
    g = effective_coupling(p)
    exact = 2.0 * (1.0 - math.sqrt(1.0 - 1.0 / (2.0 * p.n_b))) * g
    return exact, g / (2.0 * p.n_b)
