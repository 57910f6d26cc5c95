"""Gaussian-state toolkit for quantum-optical frequency combs.

Builds the normally ordered covariance data of down-converted combs (pair
combs and all-to-all combs), evaluates integrated-intensity moments and the
second-order nonclassicality identifiers, quantifies nonclassicality through
the Lee depth, and regenerates eight seeded Monte Carlo experiments.
"""

from .state import (
    Bipartition,
    CovarianceBlocks,
    GaussianCombState,
    ValidationReport,
    add_thermal_noise,
    assemble_full_matrix,
    restrict,
    state_from_json,
    state_to_json,
    vacuum_state,
    validate,
)
from .dynamics import (
    DEFAULT_GT_CAP,
    FullyOverlappingTopology,
    NonOverlappingTopology,
    comb_nonoverlapping,
    comb_overlapping,
    coupling_time_for_gain,
    evolution_matrix,
    gain_for_coupling_time,
    overlap_covariance_elements,
    overlap_gt_for_gain,
    overlap_mean_photon,
    overlap_seed_response,
    propagate_seed,
    propagator,
    state_from_propagator,
    twin_beam_state,
)
from .moments import (
    ArmMoments,
    GeneratingFunctionError,
    OracleError,
    apply_efficiency,
    arm_moments,
    fd_moment_oracle,
    generating_function,
    mode_covariance,
    mode_mean,
    mode_variance,
)
from .identifiers import (
    IdentifierResult,
    e1,
    e2,
    e_m_copies,
    e_m_spontaneous,
    e_m_spontaneous_pure,
    e_m_spontaneous_symmetric,
    e_sp_overlap_pair,
    e_sp_two_mode,
    e_st_pure_two_mode,
    identify,
)
from .depth import DepthResult, tau_eigen, tau_m
from .montecarlo import (
    SampleRecord,
    SweepConfig,
    default_config,
    experiment_arrays,
    run_experiment,
    write_csv,
)

__version__ = "0.1.0"
