"""Command-line experiment runner.

    superatom preset fig4 --out runs/fig4 --seed 7
    superatom spectrum --config my.ini --out runs/spec
    superatom ensemble --set run.trajectories=2000 --workers 4

Exit status: 0 on success, 1 for invalid configuration, 2 for solver or
integrator failures, 3 for I/O errors.  Failures print a JSON object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .config import (
    PRESETS,
    RunConfig,
    display_sections,
    parse_config,
    resolved_sections,
)
from .dynamics import (
    DensityMatrix,
    EnsembleResult,
    master_evolve,
    run_ensemble,
    steady_state,
)
from .dynamics.mcwf import TrajectoryEngine
from .errors import ConfigurationError, SuperAtomError
from .hilbert import number_operator
from .models import (
    build_ladder_hamiltonian,
    effective_coupling,
    ground_state,
    jump_operators,
)
from .observables import burst_statistics, photon_moments, transmission_spectrum
from .spectral import ladder_spectrum

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path: Path, units: dict[str, str], rows) -> None:
    """CSV with a leading ``# units:`` comment naming every column's unit."""
    with open(path, "w", newline="") as fh:
        fh.write("# units: " + ", ".join(f"{k}={v}" for k, v in units.items()) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(units))
        for row in rows:
            w.writerow([c if isinstance(c, str) else _fmt(c) for c in row])


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _hamiltonians(cfg: RunConfig):
    p = cfg.params
    H = build_ladder_hamiltonian(p)
    Hq = build_ladder_hamiltonian(p.replace(alpha=0.0)) if cfg.run.quench else None
    return H, Hq, jump_operators(p), ground_state(p)


def burst_window(cfg: RunConfig) -> float:
    return cfg.run.burst_window if cfg.run.burst_window else 2.0 / cfg.params.kappa


def run_parallel_ensemble(cfg: RunConfig, M: int | None = None) -> EnsembleResult:
    """Ensemble over ``cfg.workers`` processes; identical output for any worker count."""
    M = cfg.run.trajectories if M is None else M
    if M < 1:
        raise ConfigurationError("ensemble size must be >= 1", "trajectories")
    H, Hq, jumps, psi0 = _hamiltonians(cfg)
    if cfg.workers == 1:
        return run_ensemble(M, cfg.trajectory, H, jumps, psi0, H_quench=Hq)
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return run_ensemble(M, cfg.trajectory, H, jumps, psi0, H_quench=Hq, map_fn=pool.map)


def _pop_units(n_b: int) -> dict[str, str]:
    return {f"pop_E{k}": "probability" for k in range(1, n_b + 1)}


def _click_flags(times: np.ndarray, sample_times: np.ndarray) -> np.ndarray:
    """Number of clicks in ``(t_{k-1}, t_k]`` for each sample ``k``."""
    idx = np.searchsorted(sample_times, times, side="left")
    return np.bincount(idx, minlength=sample_times.size)[: sample_times.size]


def _write_trajectory(cfg: RunConfig, out: Path) -> dict:
    H, Hq, jumps, psi0 = _hamiltonians(cfg)
    engine = TrajectoryEngine(H, jumps, psi0.basis, cfg.trajectory, H_quench=Hq)
    rec = engine.run(psi0, cfg.trajectory.seed, 0)
    n_b = cfg.params.n_b
    flags = _click_flags(rec.clicks.channel_times("cavity"), rec.sample_times)
    units = {"t_us": "microseconds", "mean_photon": "photons", **_pop_units(n_b),
             "click": "0|1 cavity click in (t_prev, t]"}
    rows = ([t, n, *pops[1:], int(f > 0)] for t, n, pops, f in
            zip(rec.sample_times, rec.mean_photon, rec.ladder_populations, flags))
    write_csv(out / "record.csv", units, rows)
    write_csv(out / "clicks.csv", {"t_us": "microseconds", "channel": "cavity|rydberg"},
              rec.clicks.events)
    return {"files": ["record.csv", "clicks.csv"], "clicks": len(rec.clicks)}


def _write_ensemble(cfg: RunConfig, out: Path) -> dict:
    res = run_parallel_ensemble(cfg)
    rec = res.record
    n_b = cfg.params.n_b
    all_cav = np.concatenate([c.channel_times("cavity") for c in res.clicks])
    flags = _click_flags(np.sort(all_cav), rec.sample_times)
    units = {"t_us": "microseconds", "mean_photon": "photons",
             "mean_photon_stderr": "photons", **_pop_units(n_b),
             "clicks": "cavity clicks in (t_prev, t] summed over trajectories"}
    rows = ([t, n, e, *pops[1:], int(f)] for t, n, e, pops, f in
            zip(rec.sample_times, rec.mean_photon, res.photon_stderr,
                rec.ladder_populations, flags))
    write_csv(out / "record.csv", units, rows)
    write_csv(out / "clicks.csv", {"trajectory": "index", "t_us": "microseconds",
                                   "channel": "cavity|rydberg"},
              ([i, t, ch] for i, c in enumerate(res.clicks) for t, ch in c.events))
    window = burst_window(cfg)
    hist = burst_statistics(res.clicks, window)
    write_csv(out / "bursts.csv", {"multiplicity": "clicks per burst", "count": "bursts"},
              sorted(hist.counts.items()))
    return {"files": ["record.csv", "clicks.csv", "bursts.csv"], "trajectories": res.n_trajectories,
            "burst_window_us": window, "mean_burst_multiplicity": hist.mean_multiplicity}


def spectrum_grid(cfg: RunConfig) -> np.ndarray:
    g = effective_coupling(cfg.params)
    lo = -2.0 * g if cfg.run.spectrum_min is None else cfg.run.spectrum_min
    hi = 2.0 * g if cfg.run.spectrum_max is None else cfg.run.spectrum_max
    return np.linspace(lo, hi, cfg.run.spectrum_points)


def _write_spectrum(cfg: RunConfig, out: Path) -> dict:
    res = transmission_spectrum(cfg.params, spectrum_grid(cfg))
    units = {"delta_rad_per_us": "rad/us", "mean_photon_ss": "photons",
             "flux": "photons/us", "g2_zero": "dimensionless"}
    write_csv(out / "spectrum.csv", units,
              zip(res.detunings, res.mean_photon_ss, res.output_flux, res.g2_zero))
    return {"files": ["spectrum.csv"], "points": int(res.detunings.size)}


def _write_master(cfg: RunConfig, out: Path) -> dict:
    H, _, jumps, psi0 = _hamiltonians(cfg)
    times = np.arange(0.0, cfg.trajectory.t_final + 0.5 * cfg.run.master_dt, cfg.run.master_dt)
    rhos = master_evolve(H, jumps, DensityMatrix.from_state(psi0), times)
    nop = number_operator(psi0.basis)
    n_b = cfg.params.n_b
    fock = cfg.params.n_max + 1

    def row(t, rho):
        pops = np.real(np.diag(rho.matrix)).reshape(n_b + 1, fock).sum(axis=1)
        return [t, rho.expectation(nop).real, *pops[1:]]

    write_csv(out / "master.csv", {"t_us": "microseconds", "mean_photon": "photons",
                                   **_pop_units(n_b)},
              (row(t, r) for t, r in zip(times, rhos)))
    ss = steady_state(H, jumps)
    n1, n2 = photon_moments(ss, psi0.basis)
    return {"files": ["master.csv"], "steady_mean_photon": n1,
            "steady_g2_zero": n2 / n1**2 if n1 > 0 else None}


def _write_ladder(cfg: RunConfig, out: Path) -> dict:
    rows = []
    for n_exc in range(0, min(cfg.run.n_exc_max, cfg.params.n_max) + 1):
        for j, v in enumerate(ladder_spectrum(cfg.params, n_exc)):
            rows.append([j, n_exc, v])
    write_csv(out / "eigenvalues.csv",
              {"block": "eigenvalue index within the block", "n_exc": "excitations",
               "value": "rad/us"}, rows)
    return {"files": ["eigenvalues.csv"]}


_WRITERS = {
    "trajectory": _write_trajectory,
    "ensemble": _write_ensemble,
    "spectrum": _write_spectrum,
    "master": _write_master,
    "ladder-spectrum": _write_ladder,
}


def _error(kind: str, exc: BaseException, code: int) -> int:
    payload = {"error": kind, "type": type(exc).__name__, "message": str(exc)}
    key = getattr(exc, "key", None)
    if key:
        payload["key"] = key
    print(json.dumps(payload), file=sys.stderr)
    return code


def run(cfg: RunConfig) -> int:
    """Execute ``cfg`` and write ``manifest.json`` plus the mode's CSV files."""
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        return _error("io", exc, EXIT_IO)
    start = time.perf_counter()
    try:
        summary = _WRITERS[cfg.mode](cfg, out)
    except ConfigurationError as exc:
        return _error("config", exc, EXIT_CONFIG)
    except SuperAtomError as exc:
        return _error("solver", exc, EXIT_SOLVER)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        return _error("solver", exc, EXIT_SOLVER)
    except OSError as exc:
        return _error("io", exc, EXIT_IO)
    manifest = {
        "code_version": __version__,
        "mode": cfg.mode,
        "preset": cfg.preset,
        "seed": cfg.trajectory.seed,
        "wall_time_s": time.perf_counter() - start,
        "g_eff_rad_per_us": effective_coupling(cfg.params),
        "config": display_sections(cfg),
        "resolved": resolved_sections(cfg),
        "summary": summary,
    }
    try:
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, allow_nan=False,
                                                      default=_json_default) + "\n")
    except (OSError, ValueError) as exc:
        return _error("io", exc, EXIT_IO)
    return EXIT_OK


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="superatom", description=__doc__.split("\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file or a previous manifest.json")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("-M", "--trajectories", type=int, help="ensemble size")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override a config value (MHz / microseconds)")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in ("spectrum", "trajectory", "ensemble", "master", "ladder-spectrum"):
        sub.add_parser(verb, parents=[common])
    pre = sub.add_parser("preset", parents=[common], help="single trajectory of a figure preset")
    pre.add_argument("name", choices=sorted(PRESETS))
    pre.add_argument("--mode", default="trajectory", choices=sorted(_WRITERS))
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides: dict[str, str] = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigurationError("expected SECTION.KEY=VALUE", item)
        k, v = item.split("=", 1)
        overrides[k.strip()] = v
    if args.verb == "preset":
        overrides["run.preset"] = args.name
        overrides["run.mode"] = args.mode
    else:
        overrides["run.mode"] = args.verb
    if args.seed is not None:
        overrides["trajectory.seed"] = str(args.seed)
    if args.workers is not None:
        overrides["run.workers"] = str(args.workers)
    if args.out is not None:
        overrides["run.output_dir"] = args.out
    if args.trajectories is not None:
        overrides["run.trajectories"] = str(args.trajectories)
    return parse_config(args.config, overrides)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigurationError as exc:
        return _error("config", exc, EXIT_CONFIG)
    except OSError as exc:
        return _error("io", exc, EXIT_IO)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
