"""Quantum-trajectory engine and the Lindblad oracle it is checked against."""

from .ensemble import EnsembleResult, TrajectoryFailure, run_ensemble
from .lindblad import (
    DensityMatrix,
    liouvillian,
    master_evolve,
    master_propagate,
    steady_state,
)
from .mcwf import (
    ClickRecord,
    TrajectoryConfig,
    TrajectoryEngine,
    TrajectoryRecord,
    apply_jump,
    run_trajectory,
    run_trajectory_with_quench,
    trajectory_rng,
)

__all__ = [
    "ClickRecord",
    "DensityMatrix",
    "EnsembleResult",
    "TrajectoryConfig",
    "TrajectoryEngine",
    "TrajectoryFailure",
    "TrajectoryRecord",
    "apply_jump",
    "liouvillian",
    "master_evolve",
    "master_propagate",
    "run_ensemble",
    "run_trajectory",
    "run_trajectory_with_quench",
    "steady_state",
    "trajectory_rng",
]
