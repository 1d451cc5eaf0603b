"""Heavy-tailed p-value combination tests.

Global tests on dependent p-values via regularly varying tailed
transforms, baseline tests (Bonferroni, Fisher), a closed-testing
shortcut for individual-hypothesis decisions, and a seeded Monte Carlo
engine for validity/power/equivalence experiments.
"""

__version__ = "0.1.0"

from .combine import (
    CombinedResult,
    bh_adjust,
    bonferroni,
    bonferroni_as_max_statistic,
    combine_average,
    combine_standard,
    combine_weighted,
    fisher,
    transform,
)
from .closed_testing import (
    ClosedTestingResult,
    closed_test_bruteforce,
    closed_test_shortcut,
)
from .distributions import (
    Cauchy,
    Frechet,
    HeavyTailDistribution,
    InverseGamma,
    Levy,
    LogCauchy,
    LogGamma,
    Pareto,
    StudentT,
    TruncatedT,
    parse_distribution,
    truncation_point,
)
from .simulate import (
    CovarianceEstimate,
    EquivalenceReport,
    ExchangeableModel,
    ExperimentConfig,
    ExperimentReport,
    MethodSpec,
    MinPCalibration,
    calibrate_minp,
    estimate_equivalence_ratio,
    estimate_rejection_rate,
    pvalue_covariance,
    replication_rng,
    sample_statistics,
    statistics_to_pvalues,
    tail_dependence_t,
)

__all__ = [
    "__version__",
    "CombinedResult",
    "bh_adjust",
    "bonferroni",
    "bonferroni_as_max_statistic",
    "combine_average",
    "combine_standard",
    "combine_weighted",
    "fisher",
    "transform",
    "ClosedTestingResult",
    "closed_test_bruteforce",
    "closed_test_shortcut",
    "Cauchy",
    "Frechet",
    "HeavyTailDistribution",
    "InverseGamma",
    "Levy",
    "LogCauchy",
    "LogGamma",
    "Pareto",
    "StudentT",
    "TruncatedT",
    "parse_distribution",
    "truncation_point",
    "CovarianceEstimate",
    "EquivalenceReport",
    "ExchangeableModel",
    "ExperimentConfig",
    "ExperimentReport",
    "MethodSpec",
    "MinPCalibration",
    "calibrate_minp",
    "estimate_equivalence_ratio",
    "estimate_rejection_rate",
    "pvalue_covariance",
    "replication_rng",
    "sample_statistics",
    "statistics_to_pvalues",
    "tail_dependence_t",
]
