"""Rydberg transfer in the three-level collective model versus the eliminated
two-level model, as a function of Delta / g_eff."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from superatom.hilbert import flat_index
from superatom.models import (
    PhysicalParams,
    ThreeLevelBasisSpec,
    build_ladder_hamiltonian,
    build_three_level_full,
)


@dataclass(frozen=True)
class Sweep:
    ratios: tuple[float, ...] = (10, 30, 60, 100, 200, 400)
    atoms: tuple[int, ...] = (1, 2, 3)
    Delta: float = 2 * math.pi * 900.0
    points: int = 201


def deviation(n_small: int, ratio: float, sweep: Sweep) -> float:
    g_eff = sweep.Delta / ratio
    Omega = math.sqrt(g_eff * sweep.Delta)
    p = PhysicalParams(N=n_small, g0=Omega / math.sqrt(n_small), Omega=Omega,
                       Delta=sweep.Delta, n_max=1)
    spec = ThreeLevelBasisSpec(n_small, 1, 1)
    full = build_three_level_full(spec, p).toarray()
    eff = build_ladder_hamiltonian(p).toarray()
    n_e = spec.diagonal("n_e")
    worst = 0.0
    for t in np.linspace(0.0, math.pi / g_eff, sweep.points):
        pf = np.sum(np.abs(sla.expm(-1j * full * t)[:, spec.index(n_small, 0, 0, 1)]) ** 2 * n_e)
        pe = abs(sla.expm(-1j * eff * t)[flat_index(1, 0, p.basis), flat_index(0, 1, p.basis)]) ** 2
        worst = max(worst, abs(pf - pe))
    return worst


def main():
    sweep = Sweep()
    print("Delta/g_eff  " + "  ".join(f"N={n:<5d}" for n in sweep.atoms) + "  2 pi g/Delta")
    for r in sweep.ratios:
        devs = [deviation(n, r, sweep) for n in sweep.atoms]
        print(f"{r:>10g}  " + "  ".join(f"{d:7.4f}" for d in devs) + f"  {2 * math.pi / r:8.4f}")


if __name__ == "__main__":
    main()
