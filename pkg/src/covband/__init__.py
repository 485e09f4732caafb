"""Regularized estimation of large covariance matrices.

Banding, tapering, and Cholesky-factor banding of the inverse, with
resampling-based bandwidth selection, simulation benchmarks, eigenstructure
diagnostics, and a partitioned linear-prediction workflow.
"""

from .bench import (
    ExperimentReport,
    ExperimentSpec,
    ForecastOutcome,
    ReplicationRecord,
    forecast_workflow,
    parse_spec,
    read_experiment_report,
    run_forecast_experiment,
    run_simulation_experiment,
    write_experiment_report,
    write_ratio_table,
)
from .errors import (
    BandwidthTooLarge,
    CovbandError,
    DataFormatError,
    InsufficientData,
    NotPositiveDefinite,
    SingularBlock,
    SingularDesign,
    SpectralDegeneracy,
    ZeroTrace,
)
from .estimators import (
    BandedCholeskyFactors,
    banded_covariance,
    cholesky_banded_covariance,
    factors_to_matrices,
    fit_banded_cholesky,
    load_data_csv,
    sample_covariance,
    save_data_csv,
    tapered_covariance,
)
from .forecast import (
    TRANSFORMS,
    PartitionedMoments,
    conditional_coefficients,
    forecast_error,
    ingest_counts,
    partition_moments,
    predict_second_half,
    write_forecast_report,
)
from .matcore import (
    NORMS,
    TAPER_FAMILIES,
    EigenDecomposition,
    TaperSpec,
    band,
    cholesky_factor,
    effective_bandwidth,
    is_positive_definite,
    load_matrix_csv,
    matrix_norm,
    require_symmetric,
    save_matrix_csv,
    schur_product,
    sym_eigen,
    symmetrize,
    taper_weights,
)
from .selection import (
    ESTIMATOR_KINDS,
    SELECTION_NORMS,
    RiskCurve,
    SelectionResult,
    default_k_grid,
    estimate_risk,
    log_split_size,
    oracle_k0,
    oracle_k1,
    read_risk_curve,
    select_k,
    theoretical_bandwidth,
    write_risk_curve,
)
from .simgen import (
    MODEL_KINDS,
    CovarianceModel,
    build_covariance,
    parse_model,
    sample_gaussian,
    substream,
    substream_seed,
)
from .spectral import (
    DEGENERACY_GAP,
    EigenComparison,
    eigen_compare,
    variance_captured,
    write_comparison_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BandedCholeskyFactors",
    "BandwidthTooLarge",
    "CovarianceModel",
    "CovbandError",
    "DataFormatError",
    "DEGENERACY_GAP",
    "EigenComparison",
    "EigenDecomposition",
    "ESTIMATOR_KINDS",
    "ExperimentReport",
    "ExperimentSpec",
    "ForecastOutcome",
    "InsufficientData",
    "MODEL_KINDS",
    "NORMS",
    "NotPositiveDefinite",
    "PartitionedMoments",
    "ReplicationRecord",
    "RiskCurve",
    "SELECTION_NORMS",
    "SelectionResult",
    "SingularBlock",
    "SingularDesign",
    "SpectralDegeneracy",
    "TAPER_FAMILIES",
    "TRANSFORMS",
    "TaperSpec",
    "ZeroTrace",
    "band",
    "banded_covariance",
    "build_covariance",
    "cholesky_banded_covariance",
    "cholesky_factor",
    "conditional_coefficients",
    "default_k_grid",
    "effective_bandwidth",
    "eigen_compare",
    "estimate_risk",
    "factors_to_matrices",
    "fit_banded_cholesky",
    "forecast_error",
    "forecast_workflow",
    "ingest_counts",
    "is_positive_definite",
    "load_data_csv",
    "load_matrix_csv",
    "log_split_size",
    "matrix_norm",
    "oracle_k0",
    "oracle_k1",
    "parse_model",
    "parse_spec",
    "partition_moments",
    "predict_second_half",
    "read_experiment_report",
    "read_risk_curve",
    "require_symmetric",
    "run_forecast_experiment",
    "run_simulation_experiment",
    "sample_covariance",
    "sample_gaussian",
    "save_data_csv",
    "save_matrix_csv",
    "schur_product",
    "select_k",
    "substream",
    "substream_seed",
    "sym_eigen",
    "symmetrize",
    "taper_weights",
    "tapered_covariance",
    "theoretical_bandwidth",
    "variance_captured",
    "write_comparison_csv",
    "write_experiment_report",
    "write_forecast_report",
    "write_ratio_table",
    "write_risk_curve",
]
