//! The ordered, typed plan shared by planner and worker.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::steps::{StepFiles, StepName};

pub const DEFAULT_TEMPERATURE_K: f64 = 300.0;
pub const DEFAULT_PRODUCTION_PS: f64 = 1000.0;
pub const DEFAULT_PRESSURE_BAR: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PdbSource {
    /// Four-character PDB identifier, downloaded by the fetch step.
    Fetch(String),
    /// Structure file supplied by the user, copied into the run directory.
    Local(PathBuf),
}

impl PdbSource {
    /// File name of the structure inside the run directory.
    pub fn structure_file(&self) -> String {
        match self {
            PdbSource::Fetch(id) => format!("{}.pdb", id.to_ascii_uppercase()),
            PdbSource::Local(path) => path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "input.pdb".to_string()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            PdbSource::Fetch(id) => id.to_ascii_uppercase(),
            PdbSource::Local(path) => path
                .file_stem()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "input".to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepStatus {
    Pending,
    InProgress,
    Done,
    Failed,
}

impl StepStatus {
    /// Allowed transitions: pending -> in_progress -> done | failed,
    /// failed -> in_progress. Done is terminal.
    pub fn can_become(self, next: StepStatus) -> bool {
        use StepStatus::*;
        matches!(
            (self, next),
            (Pending, InProgress) | (InProgress, Done) | (InProgress, Failed) | (Failed, InProgress)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub index: usize,
    pub name: StepName,
    pub description: String,
    pub status: StepStatus,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PlanError {
    #[error("invalid plan: {0}")]
    Invalid(String),
    #[error("step {step} cannot go from {from:?} to {to:?}")]
    Transition { step: StepName, from: StepStatus, to: StepStatus },
    #[error("step {0} is not part of this plan")]
    UnknownStep(StepName),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub pdb_source: PdbSource,
    pub run_dir: PathBuf,
    /// Ligand residue codes in the order the user named them.
    pub ligand_names: Vec<String>,
    pub temperature: f64,
    pub production_ps: f64,
    pub pressure_bar: f64,
    pub steps: Vec<PlanStep>,
}

impl Plan {
    pub fn new(
        pdb_source: PdbSource,
        run_dir: &Path,
        ligand_names: Vec<String>,
        temperature: f64,
        production_ps: f64,
    ) -> Result<Self, PlanError> {
        let steps = StepName::for_system(!ligand_names.is_empty())
            .iter()
            .enumerate()
            .map(|(index, &name)| PlanStep {
                index,
                name,
                description: name.description().to_string(),
                status: StepStatus::Pending,
            })
            .collect();
        let plan = Self {
            pdb_source,
            run_dir: run_dir.to_path_buf(),
            ligand_names,
            temperature,
            production_ps,
            pressure_bar: DEFAULT_PRESSURE_BAR,
            steps,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        if let PdbSource::Fetch(id) = &self.pdb_source {
            if id.len() != 4 || !id.chars().all(|c| c.is_ascii_alphanumeric()) {
                return Err(PlanError::Invalid(format!("'{id}' is not a PDB identifier")));
            }
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(PlanError::Invalid(format!("temperature {} K must be positive", self.temperature)));
        }
        if !(self.production_ps.is_finite() && self.production_ps > 0.0) {
            return Err(PlanError::Invalid(format!("duration {} ps must be positive", self.production_ps)));
        }
        let expected = StepName::for_system(self.has_ligand());
        let names: Vec<StepName> = self.steps.iter().map(|s| s.name).collect();
        if names != expected {
            return Err(PlanError::Invalid(format!(
                "steps {:?} do not match the essential steps {:?}",
                names, expected
            )));
        }
        for code in &self.ligand_names {
            if code.is_empty() || !code.chars().all(|c| c.is_ascii_alphanumeric()) {
                return Err(PlanError::Invalid(format!("'{code}' is not a ligand code")));
            }
        }
        Ok(())
    }

    pub fn has_ligand(&self) -> bool {
        !self.ligand_names.is_empty()
    }

    pub fn structure_file(&self) -> String {
        self.pdb_source.structure_file()
    }

    pub fn step_files(&self) -> StepFiles {
        StepFiles { structure_file: self.structure_file(), ligands: self.ligand_names.clone() }
    }

    pub fn status(&self, step: StepName) -> Option<StepStatus> {
        self.steps.iter().find(|s| s.name == step).map(|s| s.status)
    }

    pub fn set_status(&mut self, step: StepName, to: StepStatus) -> Result<(), PlanError> {
        let entry = self.steps.iter_mut().find(|s| s.name == step).ok_or(PlanError::UnknownStep(step))?;
        if entry.status == to {
            return Ok(());
        }
        if !entry.status.can_become(to) {
            return Err(PlanError::Transition { step, from: entry.status, to });
        }
        entry.status = to;
        Ok(())
    }

    /// First step that is not done.
    pub fn next_step(&self) -> Option<StepName> {
        self.steps.iter().find(|s| s.status != StepStatus::Done).map(|s| s.name)
    }

    pub fn completed(&self) -> Vec<StepName> {
        self.with_status(|s| s == StepStatus::Done)
    }

    pub fn remaining(&self) -> Vec<StepName> {
        self.with_status(|s| s != StepStatus::Done)
    }

    pub fn failed(&self) -> Vec<StepName> {
        self.with_status(|s| s == StepStatus::Failed)
    }

    fn with_status(&self, keep: impl Fn(StepStatus) -> bool) -> Vec<StepName> {
        self.steps.iter().filter(|s| keep(s.status)).map(|s| s.name).collect()
    }

    pub fn all_done(&self) -> bool {
        self.steps.iter().all(|s| s.status == StepStatus::Done)
    }

    /// Values the worker exposes to the model as plan variables.
    pub fn variables(&self) -> Map<String, Value> {
        let pdb_id = match &self.pdb_source {
            PdbSource::Fetch(id) => id.to_ascii_uppercase(),
            PdbSource::Local(_) => self.pdb_source.label(),
        };
        let value = json!({
            "pdb_id": pdb_id,
            "structure_file": self.structure_file(),
            "ligand": self.ligand_names.first().cloned().unwrap_or_default(),
            "ligands": self.ligand_names,
            "temperature": self.temperature,
            "duration_ps": self.production_ps,
            "run_dir": self.run_dir.display().to_string(),
        });
        match value {
            Value::Object(map) => map,
            _ => Map::new(),
        }
    }

    /// Human-readable plan for prompts and logs.
    pub fn render_text(&self) -> String {
        let mut out = format!(
            "Plan for {}{}: {} K, {} ps production, {} bar.\n",
            self.pdb_source.label(),
            if self.has_ligand() { format!(" with ligand(s) {}", self.ligand_names.join(", ")) } else { String::new() },
            self.temperature,
            self.production_ps,
            self.pressure_bar
        );
        for step in &self.steps {
            out.push_str(&format!(
                "{}. {} [{}]: {}\n",
                step.index + 1,
                step.name,
                serde_json::to_value(step.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                step.description
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }
}
