"""Sparse support recovery toolkit.

Subset-selection solvers for the noisy sparse linear model, tuning-rule
families with signal-to-noise-adaptive scaling, analytic recovery bounds,
design-matrix qualifiers, and a deterministic Monte Carlo engine for
probability-of-error curves.
"""

from .bounds import (
    BoundValue,
    E2Bound,
    RateBoundInputs,
    chi2_tail_bound,
    e1_rate_bound,
    e2_rate_bound,
    l0_pe_lower_bound,
    omp_selection_margin,
    q_function,
)
from .experiment import (
    ALGORITHM_TAGS,
    ERCHadamard,
    ExperimentConfig,
    MatrixFile,
    PECurve,
    PEPoint,
    RandomGaussian,
    TrialExecutionError,
    estimate_pe,
    gen_erc_matrix,
    gen_random_matrix,
    gen_signal,
    load_config,
    parse_matrix_spec,
    run_trial,
    snr_db,
    sweep,
)
from .linalg import (
    DesignMatrix,
    GramDiagnostics,
    RankDeficiencyError,
    SupportSet,
    gram_diagnostics,
    least_squares_min_norm,
    projection_residual,
    read_matrix_file,
    read_vector_file,
    write_matrix_file,
)
from .qualifiers import (
    QualifierReport,
    SparkResult,
    erc_coefficient,
    mic_max_sparsity,
    mutual_coherence,
    qualify,
    spark_condition_holds,
    spark_exhaustive,
)
from .solvers import (
    ConvergenceError,
    RecoveryResult,
    StopRule,
    SubsetScanPlan,
    omp,
    oracle_known_k,
    solve_dantzig_orthonormal,
    solve_l0,
    solve_l1_error,
    solve_l1_penalty,
    support_from_estimate,
)
from .tuning import (
    ConsistencyVerdict,
    TuningRule,
    classify_consistency,
    format_rule,
    gamma_value,
    parse_rule,
)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHM_TAGS",
    "BoundValue",
    "ConsistencyVerdict",
    "ConvergenceError",
    "DesignMatrix",
    "E2Bound",
    "ERCHadamard",
    "ExperimentConfig",
    "GramDiagnostics",
    "MatrixFile",
    "PECurve",
    "PEPoint",
    "QualifierReport",
    "RandomGaussian",
    "RankDeficiencyError",
    "RateBoundInputs",
    "RecoveryResult",
    "SparkResult",
    "StopRule",
    "SubsetScanPlan",
    "SupportSet",
    "TrialExecutionError",
    "TuningRule",
    "chi2_tail_bound",
    "classify_consistency",
    "e1_rate_bound",
    "e2_rate_bound",
    "erc_coefficient",
    "estimate_pe",
    "format_rule",
    "gamma_value",
    "gen_erc_matrix",
    "gen_random_matrix",
    "gen_signal",
    "gram_diagnostics",
    "l0_pe_lower_bound",
    "least_squares_min_norm",
    "load_config",
    "mic_max_sparsity",
    "mutual_coherence",
    "omp",
    "omp_selection_margin",
    "oracle_known_k",
    "parse_matrix_spec",
    "parse_rule",
    "projection_residual",
    "q_function",
    "qualify",
    "read_matrix_file",
    "read_vector_file",
    "run_trial",
    "snr_db",
    "solve_dantzig_orthonormal",
    "solve_l0",
    "solve_l1_error",
    "solve_l1_penalty",
    "spark_condition_holds",
    "spark_exhaustive",
    "support_from_estimate",
    "sweep",
    "write_matrix_file",
]
