"""Post-click photon number <a+ a+ a a>/<a+ a> in steady state versus drive strength.

A cavity click samples the steady state weighted by <n>, so the mean photon
number right after a click equals <a+^2 a^2>/<a+ a>.  Scans the drive from the
figure value down to 1/16 of it at the two- and three-photon resonances, and
splits the one-photon off-resonant weight from the multi-photon one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from superatom.config import apply_preset
from superatom.dynamics import steady_state
from superatom.hilbert import flat_index
from superatom.models import PhysicalParams, build_ladder_hamiltonian, jump_operators
from superatom.observables import photon_moments


@dataclass(frozen=True)
class DriveScan:
    n_max: int = 8
    scales: tuple[float, ...] = (1.0, 0.5, 0.25, 0.125, 0.0625)


def one_excitation_weight(rho, p):
    b = p.basis
    idx = [flat_index(0, 1, b), flat_index(1, 0, b)]
    return float(np.real(np.trace(rho.matrix[np.ix_(idx, idx)])))


def main():
    scan = DriveScan()
    for preset, target in (("fig4", 2 / 3), ("fig5", 8 / 5)):
        base = apply_preset(PhysicalParams(n_max=scan.n_max), preset)
        print(f"{preset}: ideal post-click <n> = {target:.3f}")
        for s in scan.scales:
            p = base.replace(alpha=base.alpha * s)
            rho = steady_state(build_ladder_hamiltonian(p), jump_operators(p))
            n1, n2 = photon_moments(rho, p.basis)
            print(f"  alpha x {s:<7g} <n>_ss = {n1:.3e}  post-click <n> = {n2 / n1:.3f}  "
                  f"one-excitation weight = {one_excitation_weight(rho, p):.3e}")


if __name__ == "__main__":
    main()
