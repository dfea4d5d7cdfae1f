"""Probe-detuning sweep: peak positions, widths and g2(0) at the multi-photon lines."""

from __future__ import annotations

import argparse
import math
from dataclasses import dataclass

import numpy as np

from superatom.models import PhysicalParams, effective_coupling, mhz
from superatom.observables import peak_fwhm, spectrum_peaks, transmission_spectrum


@dataclass(frozen=True)
class Scan:
    alpha_mhz: float = 0.15
    step_mhz: float = 0.05
    span: float = 1.6  # in units of g_eff
    n_max: int = 6


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=Scan.alpha_mhz, help="drive in MHz")
    ap.add_argument("--step", type=float, default=Scan.step_mhz, help="grid step in MHz")
    ap.add_argument("--n-max", type=int, default=Scan.n_max)
    a = ap.parse_args(argv)
    s = Scan(a.alpha, a.step, Scan.span, a.n_max)

    p = PhysicalParams(alpha=mhz(s.alpha_mhz), n_max=s.n_max)
    g = effective_coupling(p)
    n = math.ceil(s.span * g / mhz(s.step_mhz))
    grid = np.arange(-n, n + 1) * mhz(s.step_mhz)
    res = transmission_spectrum(p, grid)
    to_mhz = 1 / (2 * math.pi)
    print(f"g_eff = {g * to_mhz:.4f} MHz, kappa = {p.kappa * to_mhz:.3f} MHz")
    for i in spectrum_peaks(res.mean_photon_ss, rel_height=1e-3):
        try:
            width = f"{peak_fwhm(grid, res.mean_photon_ss, i) / p.kappa:.3f} kappa"
        except ValueError:
            width = "n/a"
        print(f"peak at {grid[i] * to_mhz:+8.3f} MHz  (delta/g_eff = {grid[i] / g:+.4f})  "
              f"<n> = {res.mean_photon_ss[i]:.3e}  FWHM = {width}  g2(0) = {res.g2_zero[i]:.3f}")


if __name__ == "__main__":
    main()
