//! Aggregated metrics with CSV and JSON output.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::evaluate::RunResult;
use super::systems::Suite;
use crate::steps::StepName;

pub const CSV_FILE: &str = "bench.csv";
pub const STEPWISE_FILE: &str = "bench_steps.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRate {
    pub step: StepName,
    /// Fraction of repetitions in which the step succeeded.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub system_id: String,
    pub category: String,
    pub policy_id: String,
    pub repetitions: usize,
    /// Mean over steps, then over repetitions.
    pub accuracy: f64,
    /// Mean tool_calls / min_tool_calls over completed repetitions.
    pub efficiency: Option<f64>,
    pub completed: usize,
    pub mean_tool_calls: f64,
    pub min_tool_calls: usize,
    pub steps: Vec<StepRate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub suite_id: String,
    pub rows: Vec<SummaryRow>,
    pub runs: Vec<RunResult>,
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.into_iter().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

impl BenchReport {
    /// Rows follow suite order, then policy order.
    pub fn aggregate(suite: &Suite, policy_ids: &[String], runs: Vec<RunResult>) -> Self {
        let mut rows = Vec::new();
        for system in &suite.systems {
            for policy in policy_ids {
                let reps: Vec<&RunResult> =
                    runs.iter().filter(|r| r.system_id == system.system_id && &r.policy_id == policy).collect();
                if reps.is_empty() {
                    continue;
                }
                let steps = system
                    .essential_steps()
                    .iter()
                    .map(|&step| StepRate {
                        step,
                        rate: mean(reps.iter().map(|r| {
                            let ok = r.step_success.iter().any(|s| s.step == step && s.success);
                            if ok { 1.0 } else { 0.0 }
                        }))
                        .unwrap_or(0.0),
                    })
                    .collect();
                rows.push(SummaryRow {
                    system_id: system.system_id.clone(),
                    category: system.category.as_str().to_string(),
                    policy_id: policy.clone(),
                    repetitions: reps.len(),
                    accuracy: mean(reps.iter().map(|r| r.accuracy())).unwrap_or(0.0),
                    efficiency: mean(reps.iter().filter(|r| r.completed).map(|r| r.efficiency())),
                    completed: reps.iter().filter(|r| r.completed).count(),
                    mean_tool_calls: mean(reps.iter().map(|r| r.tool_calls as f64)).unwrap_or(0.0),
                    min_tool_calls: system.min_tool_calls(),
                    steps,
                });
            }
        }
        Self { suite_id: suite.suite_id.clone(), rows, runs }
    }

    pub fn row(&self, system_id: &str, policy_id: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.system_id == system_id && r.policy_id == policy_id)
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("system_id,category,policy_id,repetitions,accuracy,efficiency,completed,mean_tool_calls,min_tool_calls\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.3},{},{},{:.2},{}\n",
                r.system_id,
                r.category,
                r.policy_id,
                r.repetitions,
                r.accuracy,
                r.efficiency.map(|e| format!("{e:.3}")).unwrap_or_default(),
                r.completed,
                r.mean_tool_calls,
                r.min_tool_calls
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default() + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    /// Writes the CSV and the stepwise document into `dir`.
    pub fn emit(&self, dir: &Path) -> Result<(PathBuf, PathBuf), std::io::Error> {
        if self.rows.is_empty() {
            return Err(std::io::Error::new(std::io::ErrorKind::InvalidInput, "benchmark report is empty"));
        }
        std::fs::create_dir_all(dir)?;
        let csv = dir.join(CSV_FILE);
        let json = dir.join(STEPWISE_FILE);
        std::fs::write(&csv, self.to_csv())?;
        std::fs::write(&json, self.to_json())?;
        Ok((csv, json))
    }
}
