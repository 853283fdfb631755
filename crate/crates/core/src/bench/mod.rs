//! Benchmark suites, stepwise evaluation and metric reports.

pub mod evaluate;
pub mod report;
pub mod runner;
pub mod systems;

pub use evaluate::{evaluate_run, EvalError, RunResult, StepResult};
pub use report::{BenchReport, StepRate, SummaryRow, CSV_FILE, STEPWISE_FILE};
pub use runner::{run_benchmark, run_id, run_one, BenchOptions, BenchPolicy, PolicySource};
pub use systems::{BenchmarkSystem, Category, Suite};

/// Suites, policies, fault bundles and the literature corpus shipped with
/// the crate.
pub const FIXTURE_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
