"""Conservative false discovery rate estimation from very few p-values.

The package estimates nonlocal FDRs from a single discovery count, local
FDRs from ranked p-values via rank doubling, runs the mixture simulation
study behind those estimators, and ships a small CSV pipeline plus CLI.
"""

__version__ = "0.1.0"

from .confidence import (
    ConfidenceDistribution,
    SignificanceRangeError,
    attainable_range,
    inverse_significance,
    one_sided_interval,
    sample_parameter,
    significance,
)
from .distributions import (
    BinomialParams,
    Chi2MixtureParams,
    binomial_pmf,
    binomial_sf,
    chi2_1df_sf,
    noncentral_chi2_1df_pdf,
    std_normal_cdf,
    student_t_sf,
)
from .ingest import (
    AbundanceMatrix,
    Subject,
    TableFormatError,
    load_abundance_csv,
    load_pvalues_csv,
    pooled_t_statistic,
    shift_log_transform,
    two_sample_t_pvalues,
)
from .lfdr import (
    BhLfdrLink,
    BhRejection,
    LfdrResult,
    LfdrRow,
    PValueSet,
    bh_lfdr_link,
    bh_reject,
    enforce_monotonicity,
    lfdr_estimates,
)
from .nfdr import (
    ESTIMATOR_KINDS,
    KIND_CORRECTED,
    KIND_MEAN,
    KIND_MLE,
    MixtureTruth,
    NfdrEstimate,
    NumericFailure,
    corrected_nfdr,
    mean_nfdr,
    mle_nfdr,
    true_nfdr,
)
from .simulate import (
    DEFAULT_N_GRID,
    DEFAULT_PI0_GRID,
    MetricsRow,
    SimulatedDataset,
    SimulationConfig,
    exact_small_n_coverage,
    generate_dataset,
    pearson_skewness,
    run_grid,
    true_lfdr,
)

__all__ = [
    "AbundanceMatrix",
    "BhLfdrLink",
    "BhRejection",
    "BinomialParams",
    "Chi2MixtureParams",
    "ConfidenceDistribution",
    "DEFAULT_N_GRID",
    "DEFAULT_PI0_GRID",
    "ESTIMATOR_KINDS",
    "KIND_CORRECTED",
    "KIND_MEAN",
    "KIND_MLE",
    "LfdrResult",
    "LfdrRow",
    "MetricsRow",
    "MixtureTruth",
    "NfdrEstimate",
    "NumericFailure",
    "PValueSet",
    "SignificanceRangeError",
    "SimulatedDataset",
    "SimulationConfig",
    "Subject",
    "TableFormatError",
    "attainable_range",
    "bh_lfdr_link",
    "bh_reject",
    "binomial_pmf",
    "binomial_sf",
    "chi2_1df_sf",
    "corrected_nfdr",
    "enforce_monotonicity",
    "exact_small_n_coverage",
    "generate_dataset",
    "inverse_significance",
    "lfdr_estimates",
    "load_abundance_csv",
    "load_pvalues_csv",
    "mean_nfdr",
    "mle_nfdr",
    "noncentral_chi2_1df_pdf",
    "one_sided_interval",
    "pearson_skewness",
    "pooled_t_statistic",
    "run_grid",
    "sample_parameter",
    "shift_log_transform",
    "significance",
    "std_normal_cdf",
    "student_t_sf",
    "true_lfdr",
    "true_nfdr",
    "two_sample_t_pvalues",
]
