"""Trajectory simulations of a Rydberg superatom coupled to a driven cavity."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .hilbert import (
    BasisSpec,
    SparseOperator,
    StateVector,
    annihilation,
    apply,
    expectation,
    flat_index,
    number_operator,
    unflatten,
)
from .models import (
    PhysicalParams,
    ThreeLevelBasisSpec,
    build_ladder_hamiltonian,
    build_three_level_full,
    effective_coupling,
    ground_state,
    jump_operators,
    mhz,
)
from .spectral import (
    dressed_frequencies,
    ladder_spectrum,
    n_photon_resonance,
    perturbative_strengths,
)
from .dynamics import (
    DensityMatrix,
    TrajectoryConfig,
    run_ensemble,
    run_trajectory,
    run_trajectory_with_quench,
    master_evolve,
    steady_state,
)
