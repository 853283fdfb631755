//! Planner, worker and analyzer.

pub mod analyzer;
pub mod conversation;
pub mod plan;
pub mod planner;
pub mod prompts;
pub mod report;
pub mod worker;

pub use analyzer::{analyze, AnalysisReport, AnalysisStats, AnalyzerError, Prose, ANALYSIS_FILE};
pub use conversation::{pairing_violations, Conversation, Summarizer, SummaryOutcome, SUMMARY_PREFIX, SUMMARY_THRESHOLD};
pub use plan::{PdbSource, Plan, PlanError, PlanStep, StepStatus};
pub use planner::{parse_request, request_source, PlanRequest, Planner, PlannerError};
pub use report::{ExitReport, FailedStep, Stability, StopReason, EXIT_REPORT_JSON, EXIT_REPORT_MD};
pub use worker::{Worker, WorkerError, WorkerOptions, WorkerOutcome};

/// Plan state inside the run directory.
pub const PLAN_FILE: &str = "plan.json";
/// Every message the worker exchanged with the model.
pub const TRANSCRIPT_FILE: &str = "transcript.json";
