//! Benchmark systems and suite files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::PlanRequest;
use crate::md::FaultBundle;
use crate::steps::{StepFiles, StepName};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Protein,
    ProteinLigand,
    FaultAtomname,
    FaultRestraints,
    FaultTwoligands,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Protein => "protein",
            Category::ProteinLigand => "protein_ligand",
            Category::FaultAtomname => "fault_atomname",
            Category::FaultRestraints => "fault_restraints",
            Category::FaultTwoligands => "fault_twoligands",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSystem {
    pub system_id: String,
    /// Identifier the structure is fetched under.
    pub pdb_id: String,
    #[serde(default)]
    pub ligands: Vec<String>,
    pub category: Category,
    /// Fault bundle file, relative to the suite file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<PathBuf>,
}

impl BenchmarkSystem {
    pub fn essential_steps(&self) -> &'static [StepName] {
        StepName::for_system(!self.ligands.is_empty())
    }

    pub fn min_tool_calls(&self) -> usize {
        self.essential_steps().len()
    }

    pub fn step_files(&self) -> StepFiles {
        StepFiles { structure_file: format!("{}.pdb", self.pdb_id.to_ascii_uppercase()), ligands: self.ligands.clone() }
    }

    /// Essential steps with the files that prove each one.
    pub fn expected_files(&self) -> Vec<(StepName, Vec<String>)> {
        let files = self.step_files();
        self.essential_steps().iter().map(|&s| (s, files.expected(s))).collect()
    }

    pub fn request(&self) -> PlanRequest {
        let mut text = format!("simulate {}", self.pdb_id);
        if !self.ligands.is_empty() {
            text.push_str(&format!(" with ligand {}", self.ligands.join(", ")));
        }
        PlanRequest {
            text,
            pdb: Some(self.pdb_id.clone()),
            ligands: self.ligands.clone(),
            temperature: None,
            duration_ps: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suite {
    pub suite_id: String,
    #[serde(default)]
    pub description: String,
    pub systems: Vec<BenchmarkSystem>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Suite {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, String> {
        let mut suite: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        suite.base_dir = base_dir.to_path_buf();
        let mut ids = std::collections::BTreeSet::new();
        for s in &suite.systems {
            if !ids.insert(s.system_id.as_str()) {
                return Err(format!("duplicate system id '{}'", s.system_id));
            }
        }
        Ok(suite)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read suite {}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&text, base).map_err(|e| format!("invalid suite {}: {e}", path.display()))
    }

    pub fn system(&self, id: &str) -> Option<&BenchmarkSystem> {
        self.systems.iter().find(|s| s.system_id == id)
    }

    pub fn fault_bundle(&self, system: &BenchmarkSystem) -> Result<Option<FaultBundle>, String> {
        system.fault.as_ref().map(|p| FaultBundle::load(&self.base_dir.join(p))).transpose()
    }

    /// Restricts the suite to the named systems, keeping suite order.
    pub fn only(&self, ids: &[String]) -> Result<Suite, String> {
        if let Some(missing) = ids.iter().find(|id| self.system(id).is_none()) {
            return Err(format!("system '{missing}' is not in suite {}", self.suite_id));
        }
        let mut out = self.clone();
        out.systems.retain(|s| ids.contains(&s.system_id));
        Ok(out)
    }
}
