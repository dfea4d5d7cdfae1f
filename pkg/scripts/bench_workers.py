"""Ensemble throughput versus worker count (documented, not asserted).

    python scripts/bench_workers.py -M 10000 --workers 1 2 4 8
"""

from __future__ import annotations

import argparse
import os
import time
from dataclasses import dataclass

from superatom.cli import run_parallel_ensemble
from superatom.config import RunConfig, RunSettings, apply_preset
from superatom.dynamics import TrajectoryConfig
from superatom.models import PhysicalParams


@dataclass(frozen=True)
class Bench:
    trajectories: int = 10_000
    n_max: int = 6
    t_final: float = 5.0
    preset: str = "fig4"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("-M", "--trajectories", type=int, default=Bench.trajectories)
    ap.add_argument("--workers", type=int, nargs="+", default=[1, 2, 4, 8])
    a = ap.parse_args(argv)
    b = Bench(trajectories=a.trajectories)
    params = apply_preset(PhysicalParams(n_max=b.n_max), b.preset)
    print(f"cpus available: {os.cpu_count()}")
    base_time = None
    reference = None
    for w in a.workers:
        cfg = RunConfig(params=params, trajectory=TrajectoryConfig(t_final=b.t_final),
                        mode="ensemble", workers=w, run=RunSettings(trajectories=b.trajectories))
        t0 = time.perf_counter()
        res = run_parallel_ensemble(cfg)
        dt = time.perf_counter() - t0
        base_time = base_time or dt
        same = reference is None or res.mean_photon.tobytes() == reference
        reference = reference or res.mean_photon.tobytes()
        print(f"workers {w}: {dt:7.2f} s, {b.trajectories / dt:8.1f} traj/s, "
              f"speedup {base_time / dt:4.2f}, identical to first run: {same}")


if __name__ == "__main__":
    main()
