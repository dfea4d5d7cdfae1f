"""Single trajectory plus a small ensemble for each figure preset.

    python scripts/figure_presets.py --out runs/presets --trajectories 200
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from superatom.cli import run
from superatom.config import PRESETS, RunConfig, RunSettings, apply_preset
from superatom.dynamics import TrajectoryConfig
from superatom.models import PhysicalParams


@dataclass(frozen=True)
class Experiment:
    out: Path = Path("runs/presets")
    trajectories: int = 200
    t_final: float = 20.0
    seed: int = 0
    workers: int = 1


def configs(exp: Experiment, name: str):
    params = apply_preset(PhysicalParams(), name)
    traj = TrajectoryConfig(t_final=exp.t_final, seed=exp.seed)
    single = RunConfig(params=params, trajectory=traj, mode="trajectory", preset=name,
                       output_dir=str(exp.out / name / "trajectory"))
    ensemble = replace(single, mode="ensemble", workers=exp.workers,
                       output_dir=str(exp.out / name / "ensemble"),
                       run=RunSettings(trajectories=exp.trajectories))
    return single, ensemble


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--out", type=Path, default=Experiment.out)
    ap.add_argument("--trajectories", type=int, default=Experiment.trajectories)
    ap.add_argument("--t-final", type=float, default=Experiment.t_final)
    ap.add_argument("--seed", type=int, default=Experiment.seed)
    ap.add_argument("--workers", type=int, default=Experiment.workers)
    a = ap.parse_args(argv)
    exp = Experiment(a.out, a.trajectories, a.t_final, a.seed, a.workers)
    for name in sorted(PRESETS):
        for cfg in configs(exp, name):
            code = run(cfg)
            if code:
                raise SystemExit(code)
        rec = np.genfromtxt(exp.out / name / "ensemble" / "record.csv", delimiter=",",
                            names=True, comments="#")
        late = rec["t_us"] >= 5.0
        print(f"{name}: <n> after 5 us = {rec['mean_photon'][late].mean():.4f}")


if __name__ == "__main__":
    main()
