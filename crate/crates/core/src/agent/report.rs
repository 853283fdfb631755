//! Structured exit report written at the end of every run.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::analyzer::mean_std;
use crate::md::xvg::Curve;
use crate::sandbox::{Sandbox, SandboxError};
use crate::steps::StepName;
use crate::text::cap_tail;

pub const EXIT_REPORT_MD: &str = "exit_report.md";
pub const EXIT_REPORT_JSON: &str = "exit_report.json";
const EXCERPT_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    AllStepsDone,
    IterationCap,
    /// The model answered without calling a tool.
    TextOnlyTurn,
    GatewayFailure,
}

impl StopReason {
    pub fn describe(self) -> &'static str {
        match self {
            StopReason::AllStepsDone => "all plan steps completed",
            StopReason::IterationCap => "iteration limit reached",
            StopReason::TextOnlyTurn => "the model replied without a tool call",
            StopReason::GatewayFailure => "the model gateway failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedStep {
    pub step: StepName,
    pub tool: String,
    /// Tail of the last error text, verbatim.
    pub excerpt: String,
}

impl FailedStep {
    pub fn new(step: StepName, tool: &str, error: &str) -> Self {
        Self { step, tool: tool.to_string(), excerpt: cap_tail(error, EXCERPT_CAP) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Stability {
    pub temperature_k: Option<MeanStd>,
    pub pressure_bar: Option<MeanStd>,
    pub density_kg_m3: Option<MeanStd>,
    /// Start and end of the minimization potential energy.
    pub potential_start: Option<f64>,
    pub potential_end: Option<f64>,
}

impl Stability {
    pub fn from_sandbox(sandbox: &Sandbox) -> Self {
        let curve = |f: &str| sandbox.read_string(f).ok().and_then(|t| Curve::parse(&t).ok()).filter(|c| !c.points.is_empty());
        let ms = |f: &str| {
            curve(f).map(|c| {
                let (mean, std) = mean_std(&c.ys());
                MeanStd { mean, std }
            })
        };
        let potential = curve("potential.xvg");
        Self {
            temperature_k: ms("temperature.xvg"),
            pressure_bar: ms("pressure.xvg"),
            density_kg_m3: ms("density.xvg"),
            potential_start: potential.as_ref().and_then(|c| c.points.first().map(|p| p.1)),
            potential_end: potential.as_ref().and_then(|c| c.points.last().map(|p| p.1)),
        }
    }

    pub fn energy_trend(&self) -> Option<&'static str> {
        let (a, b) = (self.potential_start?, self.potential_end?);
        Some(if b < a {
            "decreasing"
        } else if b > a {
            "increasing"
        } else {
            "flat"
        })
    }

    pub fn is_empty(&self) -> bool {
        self.temperature_k.is_none() && self.pressure_bar.is_none() && self.density_kg_m3.is_none() && self.potential_start.is_none()
    }

    fn render(&self) -> Vec<String> {
        let mut lines = Vec::new();
        let fmt = |name: &str, unit: &str, v: &MeanStd| format!("- {name}: {:.2} ± {:.2} {unit}", v.mean, v.std);
        if let Some(t) = &self.temperature_k {
            lines.push(fmt("Temperature (NVT)", "K", t));
        }
        if let Some(p) = &self.pressure_bar {
            lines.push(fmt("Pressure (NPT)", "bar", p));
        }
        if let Some(d) = &self.density_kg_m3 {
            lines.push(fmt("Density (NPT)", "kg/m^3", d));
        }
        if let (Some(a), Some(b), Some(trend)) = (self.potential_start, self.potential_end, self.energy_trend()) {
            lines.push(format!("- Potential energy (EM): {trend}, {a:.1} to {b:.1} kJ/mol"));
        }
        lines
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitReport {
    pub run_id: String,
    pub run_dir: PathBuf,
    pub system: String,
    pub stop_reason: StopReason,
    pub completed_steps: Vec<StepName>,
    pub failed_steps: Vec<FailedStep>,
    pub remaining_steps: Vec<StepName>,
    pub suggestions: Vec<String>,
    pub stability: Stability,
    pub analysis_summary: Option<String>,
    pub offer_mmpbsa: bool,
    pub iterations_used: usize,
    pub tool_calls: usize,
    pub elapsed_secs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gateway_error: Option<String>,
}

impl ExitReport {
    pub fn succeeded(&self) -> bool {
        self.stop_reason == StopReason::AllStepsDone
    }

    pub fn render_markdown(&self) -> String {
        let mut out = format!(
            "# Exit report: {}\n\nRun `{}` stopped because {} after {} iteration(s) and {} tool call(s) in {:.1} s.\n",
            self.system,
            self.run_id,
            self.stop_reason.describe(),
            self.iterations_used,
            self.tool_calls,
            self.elapsed_secs
        );
        let list = |items: Vec<String>, empty: &str| {
            if items.is_empty() {
                format!("{empty}\n")
            } else {
                items.join("\n") + "\n"
            }
        };
        out.push_str("\n## Completed\n\n");
        out.push_str(&list(self.completed_steps.iter().map(|s| format!("- {s}")).collect(), "None."));
        out.push_str("\n## Errors\n\n");
        let mut errors: Vec<String> = self
            .failed_steps
            .iter()
            .map(|f| format!("### {} ({})\n\n```\n{}\n```", f.step, f.tool, f.excerpt.trim_end()))
            .collect();
        if let Some(e) = &self.gateway_error {
            errors.push(format!("### model gateway\n\n```\n{e}\n```"));
        }
        out.push_str(&list(errors, "None."));
        out.push_str("\n## Suggestions\n\n");
        out.push_str(&list(self.suggestions.iter().map(|s| format!("- {s}")).collect(), "None."));
        out.push_str("\n## Stability\n\n");
        out.push_str(&list(self.stability.render(), "No equilibration data."));
        out.push_str("\n## Analysis\n\n");
        out.push_str(&format!("{}\n", self.analysis_summary.as_deref().unwrap_or("Not available.")));
        out.push_str("\n## Next actions\n\n");
        let mut next: Vec<String> = self.remaining_steps.iter().map(|s| format!("- Complete step {s}")).collect();
        if self.offer_mmpbsa {
            next.push(format!(
                "- Estimate the binding free energy with MM/PBSA: `mdagent mmpbsa --run {}`",
                self.run_dir.display()
            ));
        }
        out.push_str(&list(next, "None."));
        out
    }

    /// Writes exit_report.md and exit_report.json into the run directory.
    pub fn write(&self, sandbox: &Sandbox) -> Result<(), SandboxError> {
        sandbox.write(EXIT_REPORT_MD, self.render_markdown())?;
        sandbox.write(EXIT_REPORT_JSON, serde_json::to_string_pretty(self).unwrap_or_default())?;
        Ok(())
    }

    pub fn load(sandbox: &Sandbox) -> Result<Self, String> {
        let text = sandbox.read_string(EXIT_REPORT_JSON).map_err(|e| e.to_string())?;
        serde_json::from_str(&text).map_err(|e| format!("invalid {EXIT_REPORT_JSON}: {e}"))
    }
}

/// Heuristic next moves for the recorded failures.
pub fn suggestions(failed: &[FailedStep], stop: StopReason, iterations: usize) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut add = |s: String| {
        if !out.contains(&s) {
            out.push(s);
        }
    };
    for f in failed {
        let e = &f.excerpt;
        if e.contains("does not have a type") {
            add(format!(
                "{}: an atom name in the structure does not match the ligand parameters; compare the atom names in complex.pdb with ligand.mol2 (element capitalization, e.g. CL1 vs Cl1) and edit them with file_tool",
                f.step
            ));
        } else if e.contains("posre") || e.contains("include file") {
            add(format!(
                "{}: position restraint files are missing; rebuild the system so every protein chain gets a posre_*.itp, or remove the missing include from topol.top",
                f.step
            ));
        } else if e.contains("does not match any loaded ligand") || e.contains("Ligand coordinate file") {
            add(format!(
                "{}: the system has more ligands than the single-ligand build supports; parameterize and merge each ligand, or simulate with one ligand",
                f.step
            ));
        } else if e.contains("Unknown residue") {
            add(format!("{}: tleap does not know a residue; remove it or provide parameters", f.step));
        } else if e.contains("missing or empty") {
            add(format!("{}: a prerequisite step has not produced its files; run the earlier steps first", f.step));
        } else if e.contains("HTTP 404") || e.contains("not a four-character") {
            add(format!("{}: check the PDB identifier or provide a local structure file", f.step));
        } else if e.contains("not found in") {
            add(format!("{}: the ligand code is not present in the structure; check the heteroatom groups listed in the error", f.step));
        } else {
            add(format!("{}: inspect the error above, correct the inputs for this step and retry", f.step));
        }
    }
    match stop {
        StopReason::IterationCap => add(format!(
            "the run used all {iterations} iterations; resume from the first remaining step with corrected inputs"
        )),
        StopReason::TextOnlyTurn => add("the model stopped calling tools; rerun and ask it to continue with the next step".to_string()),
        StopReason::GatewayFailure => add("check the model endpoint, API key and network, then rerun".to_string()),
        StopReason::AllStepsDone => {}
    }
    out
}
