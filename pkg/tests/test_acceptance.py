"""Acceptance criteria, each checked at its stated tolerance.

Every test prints one ``PASS``/``FAIL`` line; the lines are repeated in the
pytest terminal summary.  Run alone with ``pytest tests/test_acceptance.py``.
"""

import math

import numpy as np
import pytest
import scipy.linalg as sla
from scipy import stats

from conftest import ACCEPTANCE_LINES
from superatom.config import apply_preset
from superatom.dynamics import (
    DensityMatrix,
    TrajectoryConfig,
    TrajectoryEngine,
    apply_jump,
    master_evolve,
    run_ensemble,
    steady_state,
)
from superatom.hilbert import StateVector, annihilation, flat_index
from superatom.models import (
    PhysicalParams,
    ThreeLevelBasisSpec,
    build_ladder_hamiltonian,
    build_three_level_full,
    effective_coupling,
    ground_state,
    jump_operators,
    mhz,
)
from superatom.observables import (
    burst_statistics,
    conditional_mean_photon_after_click,
    first_burst_sizes,
    g2_zero,
    g2_zero_from_clicks,
    peak_fwhm,
    photon_moments,
    spectrum_peaks,
    transmission_spectrum,
)
from superatom.spectral import (
    blockade_detuning,
    dressed_frequencies,
    ladder_spectrum,
    two_excitation_eigenvalues,
)

BASE = PhysicalParams()
G = effective_coupling(BASE)


def report(number: int, title: str, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _model(p):
    return build_ladder_hamiltonian(p), jump_operators(p), ground_state(p)


def test_criterion_01_effective_coupling():
    got = effective_coupling(BASE)
    exact = math.sqrt(1000) * mhz(10) * mhz(30) / mhz(900)
    err = abs(got - exact) / exact
    ok = err <= 1e-12 and round(got / (2 * math.pi), 2) == 10.54
    report(1, "effective coupling", ok,
           f"g_eff = 2pi x {got / (2 * math.pi):.6f} MHz, rel err {err:.1e}")


def test_criterion_02_dressed_spectrum():
    worst = 0.0
    for n in range(1, BASE.n_max + 1):
        plus, minus = dressed_frequencies(n, BASE)
        numeric = ladder_spectrum(BASE, n)
        worst = max(worst, np.max(np.abs(numeric - [minus, plus]) / abs(plus)))
    report(2, "dressed spectrum +-g_eff sqrt(n)", worst <= 1e-10,
           f"max rel err {worst:.1e} for n = 1..{BASE.n_max}")


def test_criterion_03_vacuum_rabi_splitting():
    p = BASE.replace(alpha=mhz(0.15))
    step = mhz(0.1)
    half = math.ceil(2 * G / step)
    grid = np.arange(-half, half + 1) * step
    res = transmission_spectrum(p, grid)
    peaks = spectrum_peaks(res.mean_photon_ss, rel_height=0.1)
    located = peaks.size == 2 and all(
        abs(abs(grid[i]) - G) <= step for i in peaks) and grid[peaks[0]] < 0 < grid[peaks[1]]
    widths = [peak_fwhm(grid, res.mean_photon_ss, i) for i in peaks]
    width_ok = all(abs(w / p.kappa - 1) <= 0.30 for w in widths)
    report(3, "vacuum Rabi splitting", located and width_ok,
           f"{peaks.size} dominant peaks at "
           + ", ".join(f"{grid[i] / (2 * math.pi):+.2f}" for i in peaks)
           + f" MHz (g_eff {G / (2 * math.pi):.2f}); FWHM/kappa = "
           + ", ".join(f"{w / p.kappa:.3f}" for w in widths) + " (need 0.70..1.30)")


def test_criterion_04_jump_back_action():
    p = BASE.replace(n_max=4)
    b = p.basis
    C = math.sqrt(p.kappa) * annihilation(b)
    eps = 1e-3
    errs = []
    for sign in (1, -1):
        two = StateVector.superposition(b, [(1, 0, 0), (eps, 0, 2), (sign * eps, 1, 1)])
        three = StateVector.superposition(b, [(1, 0, 0), (eps, 0, 3), (sign * eps, 1, 2)])
        errs.append(abs(apply_jump(C, two).mean_photon() - 2 / 3))
        errs.append(abs(apply_jump(C, three).mean_photon() - 8 / 5))
    report(4, "jump back-action 2/3 and 8/5", max(errs) <= 1e-12,
           f"max deviation {max(errs):.1e}")


def test_criterion_05_oracle_equivalence():
    p = apply_preset(BASE.replace(n_max=3), "fig3")
    H, jumps, psi0 = _model(p)
    M = 4000
    cfg = TrajectoryConfig(t_final=10.0, sample_dt=0.05, seed=5, store_states=True)
    ens = run_ensemble(M, cfg, H, jumps, psi0)
    idx = np.arange(1, 21) * 10
    rhos = master_evolve(H, jumps, DensityMatrix.from_state(psi0), cfg.sample_times[idx])
    dist = np.array([r.trace_distance(ens.density[i]) for r, i in zip(rhos, idx)])
    bound = 5 / math.sqrt(M)
    report(5, "trajectory ensemble vs master equation", bool(np.all(dist <= bound)),
           f"max trace distance {dist.max():.4f} over 20 checkpoints, bound {bound:.4f}")


def _g2_pair(preset, n_max, M, seed):
    p = apply_preset(BASE.replace(n_max=n_max), preset)
    H, jumps, psi0 = _model(p)
    ens = run_ensemble(M, TrajectoryConfig(t_final=20.0, seed=seed), H, jumps, psi0)
    clicks = g2_zero_from_clicks(ens.clicks, window=0.1 / p.kappa, t_start=2.0)
    exact = g2_zero(steady_state(H, jumps), p.basis)
    return clicks, exact


def test_criterion_06_photon_statistics():
    anti, anti_dm = _g2_pair("fig3", 3, 2500, 6)
    bunch, bunch_dm = _g2_pair("fig4", 6, 400, 6)
    z_anti = (1 - anti.value) / anti.stderr
    z_bunch = (bunch.value - 1) / bunch.stderr
    c_anti = abs(anti.value - anti_dm) / anti.stderr
    c_bunch = abs(bunch.value - bunch_dm) / bunch.stderr
    ok = (z_anti > 3 and z_bunch > 3 and anti_dm < 1 < bunch_dm and c_anti <= 5
          and c_bunch <= 5 and anti.sufficient and bunch.sufficient)
    report(6, "antibunching at fig3, bunching at fig4", ok,
           f"fig3 clicks {anti.value:.3f}+-{anti.stderr:.3f} ({z_anti:.1f} sigma < 1), "
           f"rho {anti_dm:.3f}; fig4 clicks {bunch.value:.3f}+-{bunch.stderr:.3f} "
           f"({z_bunch:.1f} sigma > 1), rho {bunch_dm:.3f}; "
           f"consistency {c_anti:.1f}, {c_bunch:.1f} sigma")


def _conditional(preset, target, seed):
    p0 = apply_preset(BASE.replace(n_max=6), preset)
    p = p0.replace(alpha=p0.alpha / 4)
    H, jumps, psi0 = _model(p)
    ens = run_ensemble(1000, TrajectoryConfig(t_final=20.0, seed=seed), H, jumps, psi0,
                       keep_records=True)
    value = conditional_mean_photon_after_click(ens.records, [0.0])[0]
    n1, n2 = photon_moments(steady_state(H, jumps), p.basis)
    return value, n2 / n1, abs(value / target - 1) <= 0.15


def test_criterion_07_conditional_photon_number():
    v2, exact2, ok2 = _conditional("fig4", 2 / 3, 7)
    v3, exact3, ok3 = _conditional("fig5", 8 / 5, 7)
    report(7, "conditional photon number after a click", ok2 and ok3,
           f"fig4 alpha/4: {v2:.3f} (target 0.667, steady-state <a+a+aa>/<a+a> {exact2:.3f}); "
           f"fig5 alpha/4: {v3:.3f} (target 1.600, steady-state {exact3:.3f})")


def test_criterion_08_bursts_and_quench():
    p = apply_preset(BASE, "fig6")
    H, jumps, psi0 = _model(p)
    Hq = build_ladder_hamiltonian(p.replace(alpha=0.0))
    cfg = TrajectoryConfig(t_final=5.0, seed=42)
    M = 5000
    window = 2 / p.kappa
    plain = run_ensemble(M, cfg, H, jumps, psi0)
    quench = run_ensemble(M, cfg, H, jumps, psi0, H_quench=Hq)
    hist = burst_statistics(plain.clicks, window)
    big = sum(c for m, c in hist.counts.items() if m >= 3)
    fa, fb = first_burst_sizes(plain.clicks, window), first_burst_sizes(quench.clicks, window)
    both = (fa > 0) & (fb > 0)
    diff = fa[both] - fb[both]
    se = diff.std(ddof=1) / math.sqrt(diff.size)
    qhist = burst_statistics(quench.clicks, window)
    ok = big > 0 and diff.mean() > 0 and qhist.mean_multiplicity < hist.mean_multiplicity
    report(8, "bursts >= 3 and quench reduction", ok,
           f"{big} bursts with >= 3 clicks (max {max(hist.counts)}); first-burst size "
           f"{fa[both].mean():.2f} -> {fb[both].mean():.2f} under quench "
           f"(paired diff {diff.mean():.2f} +- {se:.2f}); mean multiplicity "
           f"{hist.mean_multiplicity:.2f} -> {qhist.mean_multiplicity:.2f}")


def test_criterion_09_combinatorial_blockade():
    worst = 0.0
    for n_b in (1, 2, 3, 5, 10):
        p = BASE.replace(n_b=n_b, n_max=2)
        ev = ladder_spectrum(p, 2)
        closed = two_excitation_eigenvalues(p)
        worst = max(worst, np.max(np.abs(ev - closed)) / G)
    ratios = []
    for n_b in (3, 5, 10):
        exact, approx = blockade_detuning(BASE.replace(n_b=n_b))
        ratios.append(abs(exact / approx - 1))
    ok = worst <= 1e-10 and max(ratios) <= 0.05
    report(9, "combinatorial blockade", ok,
           f"eigenvalue err {worst:.1e} g_eff; detuning vs g_eff/(2 n_b) max dev "
           f"{max(ratios):.3f} for n_b >= 3")


def _elimination_error(n_small: int, ratio: float) -> float:
    """Max |P_e(full) - P_e(effective)| / peak over one Rabi period at Delta = ratio g_eff."""
    Delta = 2 * math.pi * 900.0
    g_eff = Delta / ratio
    Omega = math.sqrt(g_eff * Delta)  # sqrt(N) g0 = Omega: equal light shifts cancel
    p = PhysicalParams(N=n_small, g0=Omega / math.sqrt(n_small), Omega=Omega, Delta=Delta,
                       n_max=1, alpha=0.0, delta_probe=0.0)
    spec = ThreeLevelBasisSpec(n_small, max_rydberg=1, photon_cutoff=1)
    full = build_three_level_full(spec, p).toarray()
    eff = build_ladder_hamiltonian(p).toarray()
    start_full = spec.index(n_small, 0, 0, 1)
    start_eff = flat_index(0, 1, p.basis)
    n_e = spec.diagonal("n_e")
    times = np.linspace(0.0, math.pi / g_eff, 201)
    pf = np.array([np.sum(np.abs(sla.expm(-1j * full * t)[:, start_full]) ** 2 * n_e)
                   for t in times])
    pe = np.array([abs(sla.expm(-1j * eff * t)[flat_index(1, 0, p.basis), start_eff]) ** 2
                   for t in times])
    return float(np.max(np.abs(pf - pe)) / pe.max())


def test_criterion_10_adiabatic_elimination():
    errs = {n: _elimination_error(n, 30.0) for n in (1, 2)}
    ok = all(e <= 0.05 for e in errs.values())
    report(10, "adiabatic elimination at Delta = 30 g_eff", ok,
           "; ".join(f"N_small={n}: max dev {e:.3f} of peak" for n, e in errs.items())
           + " (need <= 0.05)")


def test_criterion_11_exponential_clicks():
    p = PhysicalParams(g0=0.0, alpha=0.0, gamma=0.0, n_max=1)
    H, jumps, _ = _model(p)
    psi0 = StateVector.basis_state(p.basis, 0, 1)
    cfg = TrajectoryConfig(t_final=3.0, sample_dt=0.1, dt_max=0.005, seed=11)
    engine = TrajectoryEngine(H, jumps, p.basis, cfg)
    M = 100_000
    times = np.empty(M)
    for i in range(M):
        c = engine.run(psi0, cfg.seed, i).clicks
        assert len(c) == 1
        times[i] = c.times[0]
    pvalue = stats.kstest(times, "expon", args=(0, 1 / p.kappa)).pvalue
    rate = 1 / times.mean()
    report(11, "exponential click statistics", pvalue > 0.01,
           f"KS p = {pvalue:.3f} over {M} trajectories, fitted rate {rate / p.kappa:.4f} kappa")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
