"""Gridless MIMO channel estimation via frequency-selective atomic norm minimization."""

from .signal_model import (
    ArrayResponse,
    FrequencyInterval,
    FULL_BAND,
    MeasurementSet,
    PathSet,
    PathSpec,
    PriorScenario,
    SignalModelError,
    angle_prior_to_interval,
    array_response,
    channel_matrix,
    dft_sensing_matrix,
    gaussian_sensing_matrix,
    generate_channel,
    generate_prior_scenario,
    simulate_measurements,
    steering_matrix,
    wrap_distance,
)
from .fs_toeplitz import (
    BetaCoeffs,
    RetrievalError,
    ToeplitzSeq,
    TwoLevelToeplitzSeq,
    VandermondeDecomposition,
    beta_coeffs,
    is_psd,
    min_eigenvalue,
    psd_project,
    t_beta1_2d,
    t_beta2_2d,
    t_beta_1d,
    toeplitz,
    two_level_toeplitz,
    vandermonde_retrieve,
)
from .solver import SdpProblem, SdpSolution, SolverOptions, atomic_norm, solve
from .estimators import (
    EstimateResult,
    GridDictionary,
    estimate_anm_plain,
    estimate_fs_anm_1d,
    estimate_fs_anm_2d,
    estimate_omp,
    nmse_db,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
