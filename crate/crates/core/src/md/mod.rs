//! Chemistry tool handlers over a pluggable executable backend.
//!
//! Native code owns everything that is bookkeeping: structure cleaning,
//! capping, ligand extraction, tLEaP scripts, stage parameter files,
//! restraint/index generation and all output parsing. An [`MdBackend`]
//! only stands in for the external programs. [`MockBackend`] emulates them
//! with small deterministic files seeded by the run id; [`RealBackend`]
//! runs the configured executables.

pub mod catalog;
pub mod fault;
pub mod gro;
pub mod leap;
pub mod mdp;
pub mod mmpbsa;
mod mock;
pub mod mol2;
pub mod pdb;
pub mod process;
mod real;
pub mod topology;
mod toolset;
pub mod xvg;

pub use fault::{ClearsOn, FaultBundle, FaultEffect, FaultFixture, FaultyHandler};
pub use leap::ForceFieldChoice;
pub use mdp::MdpParams;
pub use mmpbsa::{BindingEnergy, EnergyComponents};
pub use mock::MockBackend;
pub use real::{ExecutablePaths, RealBackend};
pub use toolset::{build_registry, embedded_specs, ToolsetOptions, TOOL_NAMES};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::tools::{ToolContext, ToolFailure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Em,
    Nvt,
    Npt,
    Prod,
}

pub const STAGES: [Stage; 4] = [Stage::Em, Stage::Nvt, Stage::Npt, Stage::Prod];

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Em => "em",
            Stage::Nvt => "nvt",
            Stage::Npt => "npt",
            Stage::Prod => "prod",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Stage::Em => "Energy minimization",
            Stage::Nvt => "NVT equilibration",
            Stage::Npt => "NPT equilibration",
            Stage::Prod => "Production",
        }
    }

    /// Output file stem used with `-deffnm`.
    pub fn deffnm(self) -> &'static str {
        match self {
            Stage::Prod => "md",
            other => other.as_str(),
        }
    }

    pub fn mdp_file(self) -> String {
        format!("mdp/{}.mdp", self.as_str())
    }

    /// Coordinates the stage starts from.
    pub fn input_coordinates(self) -> &'static str {
        match self {
            Stage::Em => "solv_ions.gro",
            Stage::Nvt => "em.gro",
            Stage::Npt => "nvt.gro",
            Stage::Prod => "npt.gro",
        }
    }

    /// Files that must exist and be non-empty before the stage may run.
    pub fn precursors(self) -> Vec<String> {
        let mut files: Vec<String> = match self {
            Stage::Em => vec!["topol.top".into(), "solv_ions.gro".into()],
            Stage::Nvt => vec!["em.gro".into(), "topol.top".into(), "index.ndx".into()],
            Stage::Npt => vec![
                "nvt.gro".into(),
                "nvt.cpt".into(),
                "topol.top".into(),
                "index.ndx".into(),
            ],
            Stage::Prod => vec![
                "npt.gro".into(),
                "npt.cpt".into(),
                "topol.top".into(),
                "index.ndx".into(),
            ],
        };
        files.push(self.mdp_file());
        files
    }

    /// Primary outputs checked after the stage.
    pub fn outputs(self) -> Vec<String> {
        match self {
            Stage::Em => vec!["em.gro".into(), "em.log".into()],
            Stage::Nvt => vec!["nvt.gro".into(), "nvt.cpt".into(), "temperature.xvg".into()],
            Stage::Npt => vec![
                "npt.gro".into(),
                "npt.cpt".into(),
                "pressure.xvg".into(),
                "density.xvg".into(),
            ],
            Stage::Prod => vec!["md.xtc".into(), "md.gro".into(), "md.log".into()],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        STAGES
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown stage '{s}' (expected em, nvt, npt or prod)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalysisKind {
    Rmsd,
    Rmsf,
    Gyrate,
    Hbond,
}

pub const ANALYSIS_KINDS: [AnalysisKind; 4] = [
    AnalysisKind::Rmsd,
    AnalysisKind::Rmsf,
    AnalysisKind::Gyrate,
    AnalysisKind::Hbond,
];

impl AnalysisKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnalysisKind::Rmsd => "rmsd",
            AnalysisKind::Rmsf => "rmsf",
            AnalysisKind::Gyrate => "gyrate",
            AnalysisKind::Hbond => "hbond",
        }
    }

    pub fn output(self) -> String {
        format!("{}.xvg", self.as_str())
    }

    pub fn unit(self) -> &'static str {
        match self {
            AnalysisKind::Hbond => "count",
            _ => "nm",
        }
    }
}

impl FromStr for AnalysisKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ANALYSIS_KINDS
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown analysis kind '{s}' (expected rmsd, rmsf, gyrate or hbond)"))
    }
}

/// Stand-in for the external programs. Every method works inside the
/// run directory of `ctx` and writes the files its real counterpart
/// would write.
pub trait MdBackend: Send + Sync {
    fn label(&self) -> &'static str;

    /// Returns the PDB text of an entry.
    fn download_structure(&self, ctx: &ToolContext<'_>, pdb_id: &str) -> Result<String, ToolFailure>;

    /// Adds hydrogens: `input` to `output`.
    fn protonate(&self, ctx: &ToolContext<'_>, input: &str, output: &str, ph: f64) -> Result<(), ToolFailure>;

    /// Writes `ligand.mol2` and `ligand.frcmod` from a protonated ligand.
    fn parameterize(
        &self,
        ctx: &ToolContext<'_>,
        input: &str,
        resname: &str,
        net_charge: i64,
    ) -> Result<(), ToolFailure>;

    /// Runs a tLEaP script; returns the leap log.
    fn tleap(&self, ctx: &ToolContext<'_>, script: &str) -> Result<String, ToolFailure>;

    /// Converts the Amber system to `topol.top` and `solv_ions.gro`.
    fn convert(&self, ctx: &ToolContext<'_>) -> Result<(), ToolFailure>;

    /// Preprocesses and runs one stage; returns the engine log.
    fn md_stage(&self, ctx: &ToolContext<'_>, stage: Stage) -> Result<String, ToolFailure>;

    /// Writes the curve file for one analysis kind.
    fn analysis(&self, ctx: &ToolContext<'_>, kind: AnalysisKind) -> Result<(), ToolFailure>;

    /// Writes `FINAL_RESULTS_MMPBSA.dat`.
    fn mmpbsa(&self, ctx: &ToolContext<'_>, temperature: f64) -> Result<(), ToolFailure>;
}

pub const MMPBSA_RESULTS: &str = "FINAL_RESULTS_MMPBSA.dat";
