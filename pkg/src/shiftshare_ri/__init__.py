"""Randomization inference for shift-share designs.

Hypothesis tests and confidence intervals built by re-simulating sector
shocks under a hypothesized assignment mechanism, with studentized
statistics that keep the procedure accurate whether or not that guess
is right.  Includes exact group-enumeration tests, regularity
diagnostics, and a Monte Carlo harness.
"""

from .design import (
    NullResiduals,
    ShiftShareDesign,
    build_instrument,
    demean_shocks,
    null_residuals,
)
from .diagnostics import (
    AsymptoticReport,
    ConcentrationReport,
    asymptotic_report,
    compute_vj,
    concentration_report,
    ks_to_standard_normal,
    normality_distance,
    prop2_conditions,
    prop3_conditions,
)
from .errors import (
    ConfigError,
    DataValidationError,
    DegenerateDrawError,
    DegenerateInstrumentError,
    EnumerationSizeError,
    NotReducedFormError,
    NumericDegeneracyError,
    ShiftShareError,
    ZeroVarianceError,
)
from .estimator import (
    EstimateResult,
    VarianceKind,
    VarianceResult,
    sector_residual_sums,
    shift_share_estimate,
    stat_t0,
    stat_t1,
    stat_t2,
    variance_clustered,
    variance_null_imposed,
    variance_plugin,
)
from .io import load_design, save_design
from .montecarlo import (
    DGPSpec,
    ExperimentConfig,
    ExperimentResult,
    GroundTruth,
    MethodKind,
    MethodSpec,
    generate_dataset,
    parse_experiment_config,
    power_curve,
    size_experiment,
)
from .ri import (
    ConfidenceIntervalResult,
    RITestResult,
    Sidedness,
    Statistic,
    TestSpec,
    berger_boos_test,
    confidence_interval,
    critical_count,
    exact_enumeration_test,
    generate_draws,
    p_value_from_stats,
    psi,
    reject_by_order_statistic,
    reject_by_pvalue,
    ri_test,
    simulate_null_statistics,
)
from .schemes import (
    IIDNormal,
    KnownDistribution,
    Permutation,
    RecentredBootstrap,
    SignChange,
    SimulationScheme,
    draw_shocks,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticReport",
    "ConcentrationReport",
    "ConfidenceIntervalResult",
    "ConfigError",
    "DGPSpec",
    "DataValidationError",
    "DegenerateDrawError",
    "DegenerateInstrumentError",
    "EnumerationSizeError",
    "EstimateResult",
    "ExperimentConfig",
    "ExperimentResult",
    "GroundTruth",
    "IIDNormal",
    "KnownDistribution",
    "MethodKind",
    "MethodSpec",
    "NotReducedFormError",
    "NullResiduals",
    "NumericDegeneracyError",
    "Permutation",
    "RITestResult",
    "RecentredBootstrap",
    "ShiftShareDesign",
    "ShiftShareError",
    "Sidedness",
    "SignChange",
    "SimulationScheme",
    "Statistic",
    "TestSpec",
    "VarianceKind",
    "VarianceResult",
    "ZeroVarianceError",
    "asymptotic_report",
    "berger_boos_test",
    "build_instrument",
    "compute_vj",
    "concentration_report",
    "confidence_interval",
    "critical_count",
    "demean_shocks",
    "draw_shocks",
    "exact_enumeration_test",
    "generate_dataset",
    "generate_draws",
    "ks_to_standard_normal",
    "load_design",
    "normality_distance",
    "null_residuals",
    "p_value_from_stats",
    "parse_experiment_config",
    "power_curve",
    "prop2_conditions",
    "prop3_conditions",
    "psi",
    "reject_by_order_statistic",
    "reject_by_pvalue",
    "ri_test",
    "save_design",
    "sector_residual_sums",
    "shift_share_estimate",
    "simulate_null_statistics",
    "size_experiment",
    "stat_t0",
    "stat_t1",
    "stat_t2",
    "variance_clustered",
    "variance_null_imposed",
    "variance_plugin",
]
