//! Canonical essential steps and the files that prove each one happened.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepName {
    Fetch,
    Prep,
    Protonate,
    ParamLigand,
    Merge,
    Build,
    Em,
    Nvt,
    Npt,
    Prod,
    Analysis,
}

pub const PROTEIN_STEPS: [StepName; 8] = [
    StepName::Fetch,
    StepName::Prep,
    StepName::Build,
    StepName::Em,
    StepName::Nvt,
    StepName::Npt,
    StepName::Prod,
    StepName::Analysis,
];

pub const LIGAND_STEPS: [StepName; 11] = [
    StepName::Fetch,
    StepName::Prep,
    StepName::Protonate,
    StepName::ParamLigand,
    StepName::Merge,
    StepName::Build,
    StepName::Em,
    StepName::Nvt,
    StepName::Npt,
    StepName::Prod,
    StepName::Analysis,
];

/// Output curves produced by `run_analysis`.
pub const ANALYSIS_CURVES: [&str; 4] = ["rmsd.xvg", "rmsf.xvg", "gyrate.xvg", "hbond.xvg"];

impl StepName {
    pub fn as_str(self) -> &'static str {
        match self {
            StepName::Fetch => "fetch",
            StepName::Prep => "prep",
            StepName::Protonate => "protonate",
            StepName::ParamLigand => "param_ligand",
            StepName::Merge => "merge",
            StepName::Build => "build",
            StepName::Em => "em",
            StepName::Nvt => "nvt",
            StepName::Npt => "npt",
            StepName::Prod => "prod",
            StepName::Analysis => "analysis",
        }
    }

    /// Essential steps for a system, in execution order.
    pub fn for_system(has_ligand: bool) -> &'static [StepName] {
        if has_ligand {
            &LIGAND_STEPS
        } else {
            &PROTEIN_STEPS
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            StepName::Fetch => "Obtain the input structure (download from the PDB or use the provided file).",
            StepName::Prep => "Clean the structure, cap termini with ACE/NME, and extract ligands.",
            StepName::Protonate => "Add hydrogens to each ligand at pH 7.0 unless specified.",
            StepName::ParamLigand => "Parameterize the ligand with GAFF2 and AM1-BCC charges.",
            StepName::Merge => "Merge the capped protein and the ligand into complex.pdb.",
            StepName::Build => "Build the solvated, neutralized system topology and GROMACS inputs.",
            StepName::Em => "Energy minimization (steepest descent).",
            StepName::Nvt => "NVT equilibration with position restraints.",
            StepName::Npt => "NPT equilibration with position restraints.",
            StepName::Prod => "Production molecular dynamics.",
            StepName::Analysis => "Compute RMSD, RMSF, radius of gyration and hydrogen bonds, then interpret them.",
        }
    }
}

impl fmt::Display for StepName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StepName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LIGAND_STEPS
            .iter()
            .copied()
            .find(|step| step.as_str() == s)
            .ok_or_else(|| format!("unknown step '{s}'"))
    }
}

/// What the expected-file table needs to know about a run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StepFiles {
    /// File name of the input structure inside the run directory.
    pub structure_file: String,
    /// Ligand labels; one protonated file is expected per label.
    pub ligands: Vec<String>,
}

impl StepFiles {
    pub fn expected(&self, step: StepName) -> Vec<String> {
        let owned = |names: &[&str]| names.iter().map(|s| s.to_string()).collect();
        match step {
            StepName::Fetch => vec![self.structure_file.clone()],
            StepName::Prep => owned(&["protein_clean.pdb"]),
            StepName::Protonate => self.ligands.iter().map(|l| format!("{l}_h.pdb")).collect(),
            StepName::ParamLigand => owned(&["ligand.mol2", "ligand.frcmod"]),
            StepName::Merge => owned(&["complex.pdb"]),
            StepName::Build => owned(&["topol.top", "solv_ions.gro"]),
            StepName::Em => owned(&["em.gro"]),
            StepName::Nvt => owned(&["nvt.gro"]),
            StepName::Npt => owned(&["npt.gro"]),
            StepName::Prod => owned(&["md.xtc"]),
            StepName::Analysis => {
                let mut files = owned(&ANALYSIS_CURVES);
                files.push("analysis.txt".to_string());
                files
            }
        }
    }
}

/// The plan step a tool call works on, if any.
pub fn step_for_tool(tool: &str, args: &Map<String, Value>) -> Option<StepName> {
    Some(match tool {
        "fetch_pdb" => StepName::Fetch,
        "prepare_structures" => StepName::Prep,
        "protonate_ligand" => StepName::Protonate,
        "parameterize_ligand" => StepName::ParamLigand,
        "merge_complex" => StepName::Merge,
        "build_system" => StepName::Build,
        "run_md_stage" => match args.get("stage").and_then(Value::as_str)? {
            "em" => StepName::Em,
            "nvt" => StepName::Nvt,
            "npt" => StepName::Npt,
            "prod" => StepName::Prod,
            _ => return None,
        },
        "run_analysis" => StepName::Analysis,
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn step_lists() {
        assert_eq!(StepName::for_system(false).len(), 8);
        assert_eq!(StepName::for_system(true).len(), 11);
        for step in LIGAND_STEPS {
            assert_eq!(step.as_str().parse::<StepName>().unwrap(), step);
        }
        assert!(PROTEIN_STEPS.iter().all(|s| LIGAND_STEPS.contains(s)));
    }

    #[test]
    fn expected_files() {
        let files = StepFiles {
            structure_file: "3HTB.pdb".into(),
            ligands: vec!["JZ4".into()],
        };
        assert_eq!(files.expected(StepName::Fetch), ["3HTB.pdb"]);
        assert_eq!(files.expected(StepName::Protonate), ["JZ4_h.pdb"]);
        assert_eq!(files.expected(StepName::Analysis).len(), 5);
    }

    #[test]
    fn tools_map_to_steps() {
        let stage = |s: &str| json!({"stage": s}).as_object().unwrap().clone();
        assert_eq!(step_for_tool("run_md_stage", &stage("npt")), Some(StepName::Npt));
        assert_eq!(step_for_tool("run_md_stage", &stage("xx")), None);
        assert_eq!(step_for_tool("file_tool", &Map::new()), None);
    }
}
