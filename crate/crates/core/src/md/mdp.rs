//! Stage parameter files for the simulation engine.

use serde::{Deserialize, Serialize};

use super::Stage;
use crate::text::fmt_real;

/// Integration time step for dynamic stages (ps).
pub const DT_PS: f64 = 0.002;
/// Fixed NVT and NPT equilibration length (ps).
pub const EQUILIBRATION_PS: f64 = 100.0;
pub const EM_STEPS: u64 = 5000;
/// Minimization force tolerance (kJ mol^-1 nm^-1).
pub const EM_TOLERANCE: f64 = 1000.0;
pub const R_SWITCH_NM: f64 = 1.0;
pub const R_CUTOFF_NM: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpParams {
    pub stage: Stage,
    /// ps; zero for minimization.
    pub dt: f64,
    pub nsteps: u64,
    pub temperature: f64,
    pub pressure: f64,
    pub thermostat: String,
    pub barostat: String,
    pub constraint_algorithm: String,
    pub cutoff_scheme: String,
    pub vdw_modifier: String,
    pub r_switch: f64,
    pub r_cutoff: f64,
    pub electrostatics: String,
    pub coupling_groups: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid {stage} parameters: {message}")]
pub struct MdpError {
    pub stage: String,
    pub message: String,
}

/// Number of steps covering `ps` picoseconds at the standard time step.
pub fn steps_for(ps: f64) -> u64 {
    (ps / DT_PS).round() as u64
}

impl MdpParams {
    /// Standard parameters for a stage. `production_ps` only affects prod.
    pub fn for_stage(stage: Stage, temperature: f64, production_ps: f64, has_ligand: bool) -> Self {
        let solute = if has_ligand { "Protein_Ligand" } else { "Protein" };
        let (dt, nsteps, thermostat, barostat) = match stage {
            Stage::Em => (0.0, EM_STEPS, "no", "no"),
            Stage::Nvt => (DT_PS, steps_for(EQUILIBRATION_PS), "berendsen", "no"),
            Stage::Npt => (DT_PS, steps_for(EQUILIBRATION_PS), "berendsen", "berendsen"),
            Stage::Prod => (DT_PS, steps_for(production_ps), "berendsen", "berendsen"),
        };
        Self {
            stage,
            dt,
            nsteps,
            temperature,
            pressure: 1.0,
            thermostat: thermostat.to_string(),
            barostat: barostat.to_string(),
            constraint_algorithm: "lincs".to_string(),
            cutoff_scheme: "Verlet".to_string(),
            vdw_modifier: "Force-switch".to_string(),
            r_switch: R_SWITCH_NM,
            r_cutoff: R_CUTOFF_NM,
            electrostatics: "PME".to_string(),
            coupling_groups: vec![solute.to_string(), "Water_and_ions".to_string()],
        }
    }

    pub fn validate(&self) -> Result<(), MdpError> {
        let fail = |message: String| {
            Err(MdpError {
                stage: self.stage.as_str().to_string(),
                message,
            })
        };
        if self.r_switch != R_SWITCH_NM || self.r_cutoff != R_CUTOFF_NM {
            return fail(format!(
                "switch/cutoff must be {R_SWITCH_NM}/{R_CUTOFF_NM} nm, got {}/{}",
                self.r_switch, self.r_cutoff
            ));
        }
        if self.temperature.is_nan() || self.temperature <= 0.0 {
            return fail(format!("temperature must be positive, got {}", self.temperature));
        }
        match self.stage {
            Stage::Em => {
                if self.nsteps != EM_STEPS {
                    return fail(format!("minimization uses {EM_STEPS} steps, got {}", self.nsteps));
                }
            }
            stage => {
                if self.dt != DT_PS {
                    return fail(format!("dt must be {DT_PS} ps, got {}", self.dt));
                }
                if matches!(stage, Stage::Nvt | Stage::Npt)
                    && self.nsteps != steps_for(EQUILIBRATION_PS)
                {
                    return fail(format!(
                        "equilibration must cover {EQUILIBRATION_PS} ps, got {} steps",
                        self.nsteps
                    ));
                }
                if self.nsteps == 0 {
                    return fail("nsteps must be positive".to_string());
                }
                if self.coupling_groups.len() != 2 {
                    return fail("two temperature-coupling groups are required".to_string());
                }
            }
        }
        Ok(())
    }

    /// Renders the `key = value` file.
    pub fn render(&self) -> Result<String, MdpError> {
        self.validate()?;
        let mut lines: Vec<(String, String)> = Vec::new();
        let mut kv = |k: &str, v: String| lines.push((k.to_string(), v));
        let temp = fmt_real(self.temperature);
        let groups = self.coupling_groups.len();
        match self.stage {
            Stage::Em => {
                kv("integrator", "steep".into());
                kv("emtol", fmt_real(EM_TOLERANCE));
                kv("emstep", "0.01".into());
                kv("nsteps", self.nsteps.to_string());
                kv("nstenergy", "100".into());
            }
            stage => {
                if matches!(stage, Stage::Nvt | Stage::Npt) {
                    kv("define", "-DPOSRES".into());
                }
                kv("integrator", "md".into());
                kv("nsteps", self.nsteps.to_string());
                kv("dt", fmt_dt(self.dt));
                kv("nstxout-compressed", "5000".into());
                kv("nstenergy", "500".into());
                kv("nstlog", "500".into());
                let continuation = if stage == Stage::Nvt { "no" } else { "yes" };
                kv("continuation", continuation.into());
                kv("constraint_algorithm", self.constraint_algorithm.clone());
                kv("constraints", "h-bonds".into());
                kv("lincs_iter", "1".into());
                kv("lincs_order", "4".into());
            }
        }
        kv("cutoff-scheme", self.cutoff_scheme.clone());
        kv("nstlist", "10".into());
        kv("pbc", "xyz".into());
        kv("coulombtype", self.electrostatics.clone());
        kv("rcoulomb", fmt_real(self.r_cutoff));
        kv("vdwtype", "Cut-off".into());
        kv("vdw-modifier", self.vdw_modifier.clone());
        kv("rvdw-switch", fmt_real(self.r_switch));
        kv("rvdw", fmt_real(self.r_cutoff));
        if self.stage != Stage::Em {
            kv("DispCorr", "no".into());
            kv("fourierspacing", "0.16".into());
            kv("pme_order", "4".into());
            kv("tcoupl", self.thermostat.clone());
            kv("tc-grps", self.coupling_groups.join(" "));
            kv("tau_t", vec!["0.1"; groups].join(" "));
            kv("ref_t", vec![temp.as_str(); groups].join(" "));
            kv("pcoupl", self.barostat.clone());
            if self.barostat != "no" {
                kv("pcoupltype", "isotropic".into());
                kv("tau_p", "2.0".into());
                kv("ref_p", fmt_real(self.pressure));
                kv("compressibility", "4.5e-5".into());
                if self.stage == Stage::Npt {
                    kv("refcoord_scaling", "com".into());
                }
            }
            if self.stage == Stage::Nvt {
                kv("gen_vel", "yes".into());
                kv("gen_temp", temp.clone());
                kv("gen_seed", "-1".into());
            } else {
                kv("gen_vel", "no".into());
            }
        }
        let mut out = format!("; {} parameters generated by mdagent\n", self.stage.title());
        for (k, v) in lines {
            out.push_str(&format!("{k} = {v}\n"));
        }
        Ok(out)
    }
}

fn fmt_dt(dt: f64) -> String {
    format!("{dt}")
}

/// Reads one `key = value` entry from an mdp file.
pub fn mdp_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|line| {
        let line = line.split(';').next()?.trim();
        let (k, v) = line.split_once('=')?;
        let k = k.trim().replace('_', "-");
        (k == key.replace('_', "-")).then(|| v.trim())
    })
}
