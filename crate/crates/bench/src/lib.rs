//! Scenario catalog, trajectory recording and metrics for comparing
//! contact solvers on small rigid-body scenes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod csv;
pub mod error;
pub mod metrics;
pub mod record;
pub mod scenario;
pub mod suite;

pub use error::{BenchError, Result};
pub use metrics::{
    analytic_sliding_energy, conditioning_sweep, energy_vs_analytic, integral_consistency_error,
    internal_force_spread, timing_report, ConditioningRow, TimingReport, TimingStep,
};
pub use record::{run_scenario, run_solver, ContactRecord, ScenarioRun, StepRecord, TrajectoryRecord};
pub use scenario::{Builtin, ScenarioSpec};
pub use catalog::{bench_config, resolve_names, run_bench, run_named, BenchOptions, CsvFile, ScenarioOutput, SCENARIOS};
