//! Stepwise evaluation of a finished run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::systems::BenchmarkSystem;
use crate::agent::{ExitReport, EXIT_REPORT_JSON};
use crate::sandbox::{read_trace, TraceError, TraceKind, TRACE_FILE};
use crate::steps::StepName;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("run {0} has no trace; the run is corrupted")]
    MissingTrace(PathBuf),
    #[error("run {0} has no exit report; the run did not exit")]
    MissingExitReport(PathBuf),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("unreadable exit report in {path}: {message}")]
    ExitReport { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub step: StepName,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub system_id: String,
    pub policy_id: String,
    pub repetition: usize,
    pub run_id: String,
    pub step_success: Vec<StepResult>,
    pub tool_calls: usize,
    pub min_tool_calls: usize,
    pub completed: bool,
    pub iterations_used: usize,
    pub elapsed_secs: f64,
    /// Why the run could not be executed or evaluated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunResult {
    pub fn accuracy(&self) -> f64 {
        if self.step_success.is_empty() {
            return 0.0;
        }
        self.step_success.iter().filter(|s| s.success).count() as f64 / self.step_success.len() as f64
    }

    pub fn efficiency(&self) -> f64 {
        self.tool_calls as f64 / self.min_tool_calls.max(1) as f64
    }

    /// A result for a run that failed before it could be evaluated.
    pub fn failed(system: &BenchmarkSystem, policy_id: &str, repetition: usize, run_id: &str, error: String) -> Self {
        Self {
            system_id: system.system_id.clone(),
            policy_id: policy_id.to_string(),
            repetition,
            run_id: run_id.to_string(),
            step_success: system.essential_steps().iter().map(|&step| StepResult { step, success: false }).collect(),
            tool_calls: 0,
            min_tool_calls: system.min_tool_calls(),
            completed: false,
            iterations_used: 0,
            elapsed_secs: 0.0,
            error: Some(error),
        }
    }
}

fn nonempty(path: &Path) -> bool {
    std::fs::metadata(path).map(|m| m.is_file() && m.len() > 0).unwrap_or(false)
}

/// Marks each essential step by its expected files and counts tool calls
/// from the trace.
pub fn evaluate_run(
    run_dir: &Path,
    system: &BenchmarkSystem,
    policy_id: &str,
    repetition: usize,
) -> Result<RunResult, EvalError> {
    let trace_path = run_dir.join(TRACE_FILE);
    if !trace_path.is_file() {
        return Err(EvalError::MissingTrace(run_dir.to_path_buf()));
    }
    let report_path = run_dir.join(EXIT_REPORT_JSON);
    if !report_path.is_file() {
        return Err(EvalError::MissingExitReport(run_dir.to_path_buf()));
    }
    let records = read_trace(&trace_path)?;
    let report: ExitReport = std::fs::read_to_string(&report_path)
        .map_err(|e| e.to_string())
        .and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string()))
        .map_err(|message| EvalError::ExitReport { path: report_path.clone(), message })?;
    let step_success: Vec<StepResult> = system
        .expected_files()
        .into_iter()
        .map(|(step, files)| StepResult { step, success: files.iter().all(|f| nonempty(&run_dir.join(f))) })
        .collect();
    Ok(RunResult {
        system_id: system.system_id.clone(),
        policy_id: policy_id.to_string(),
        repetition,
        run_id: run_dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        completed: step_success.iter().all(|s| s.success),
        step_success,
        tool_calls: records.iter().filter(|r| r.kind == TraceKind::ToolCall).count(),
        min_tool_calls: system.min_tool_calls(),
        iterations_used: report.iterations_used,
        elapsed_secs: report.elapsed_secs,
        error: None,
    })
}
