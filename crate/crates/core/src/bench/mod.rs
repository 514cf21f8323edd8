//! Benchmark harness: repeated seeded trials, approximation ratios, energy
//! estimates, Wilcoxon tests, report export and the fuel/CO₂ projection.
//!
//! The harness works in `f64`; instances are generated and solved at that
//! precision.

mod export;
mod impact;
mod metrics;
mod suite;
mod wilcoxon;

pub use export::{
    export_report, read_report, records_csv, report_json, svg_charts, write_atomic, ExportFormat,
    CSV_HEADER,
};
pub use impact::{
    impact_projection, ImpactProjection, DEFAULT_BASELINE_EJ, DEFAULT_EMISSION_FACTOR_G_PER_MJ,
    DEFAULT_IMPROVEMENT,
};
pub use metrics::{approximation_ratio, energy_estimate, EnergyModel, ORACLE_TOLERANCE, SOLVER_KINDS};
pub use suite::{
    aggregate, run_benchmark, Aggregate, BenchmarkReport, EnergySetting, InstanceDescriptor,
    InstanceSpec, OptimumKind, PairwiseTest, ReportMetadata, SolverSpec, SuiteConfig, TrialRecord,
    TrialStatus,
};
pub use wilcoxon::{
    midranks, signed_rank_null_distribution, wilcoxon_signed_rank, wilcoxon_signed_rank_with,
    MethodChoice, WilcoxonMethod, WilcoxonResult, EXACT_MAX_N,
};
