//! Binding free energy bookkeeping and the gmx_MMPBSA results file.

use serde::{Deserialize, Serialize};

/// Allowed disagreement between summed components and the reported total.
pub const TOTAL_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyComponents {
    pub vdw: f64,
    pub electrostatic: f64,
    pub polar_solvation: f64,
    pub nonpolar_sasa: f64,
}

impl EnergyComponents {
    pub fn delta_h(&self) -> f64 {
        self.vdw + self.electrostatic + self.polar_solvation + self.nonpolar_sasa
    }
}

/// All energies in kcal/mol; entropy in kcal/mol/K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BindingEnergy {
    pub components: EnergyComponents,
    pub delta_h: f64,
    pub temperature: f64,
    pub delta_s: Option<f64>,
    pub delta_g: f64,
    pub entropy_omitted: bool,
}

impl BindingEnergy {
    /// ΔG = ΔH − TΔS, or ΔH when no entropy estimate is supplied.
    pub fn compute(components: EnergyComponents, temperature: f64, delta_s: Option<f64>) -> Self {
        let delta_h = components.delta_h();
        let delta_g = match delta_s {
            Some(s) => delta_h - temperature * s,
            None => delta_h,
        };
        Self {
            components,
            delta_h,
            temperature,
            delta_s,
            delta_g,
            entropy_omitted: delta_s.is_none(),
        }
    }

    pub fn summary(&self) -> String {
        let mut text = format!(
            "dH = {:.2} kcal/mol (vdW {:.2}, electrostatic {:.2}, polar solvation {:.2}, nonpolar {:.2}); ",
            self.delta_h,
            self.components.vdw,
            self.components.electrostatic,
            self.components.polar_solvation,
            self.components.nonpolar_sasa
        );
        match self.delta_s {
            Some(s) => text.push_str(&format!(
                "T = {} K, dS = {s} kcal/mol/K, dG = {:.2} kcal/mol",
                self.temperature, self.delta_g
            )),
            None => text.push_str(&format!(
                "dG = {:.2} kcal/mol (entropy term omitted)",
                self.delta_g
            )),
        }
        text
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MmpbsaError {
    #[error("results file has no Delta (Complex - Receptor - Ligand) section")]
    NoDeltaSection,
    #[error("results file lacks component {0}")]
    MissingComponent(&'static str),
    #[error("component sum {sum:.4} disagrees with reported total {total:.4} beyond {TOTAL_TOLERANCE} kcal/mol")]
    TotalMismatch { sum: f64, total: f64 },
}

/// Parsed delta block of a results file.
#[derive(Debug, Clone, PartialEq)]
pub struct MmpbsaResults {
    pub components: EnergyComponents,
    pub reported_total: f64,
}

fn normalize_label(label: &str) -> String {
    label
        .trim()
        .trim_start_matches('Δ')
        .trim_start_matches("DELTA ")
        .to_ascii_uppercase()
}

/// Parses the delta section of `FINAL_RESULTS_MMPBSA.dat` (PB or GB).
pub fn parse_results(text: &str) -> Result<MmpbsaResults, MmpbsaError> {
    let start = text
        .lines()
        .position(|l| {
            let l = l.trim_start();
            l.starts_with("Delta (Complex - Receptor - Ligand)")
                || l.starts_with("Differences (Complex - Receptor - Ligand)")
        })
        .ok_or(MmpbsaError::NoDeltaSection)?;
    let mut vdw = None;
    let mut eel = None;
    let mut polar = None;
    let mut nonpolar = None;
    let mut total = None;
    for line in text.lines().skip(start + 1) {
        let trimmed = line.trim();
        if trimmed.starts_with("----") || trimmed.is_empty() || trimmed.starts_with("Energy Component") {
            if total.is_some() {
                break;
            }
            continue;
        }
        let mut parts: Vec<&str> = trimmed.split_whitespace().collect();
        let value_idx = parts.iter().position(|p| p.parse::<f64>().is_ok());
        let Some(idx) = value_idx else { continue };
        let value: f64 = parts[idx].parse().unwrap_or(0.0);
        parts.truncate(idx);
        match normalize_label(&parts.join(" ")).as_str() {
            "VDWAALS" => vdw = Some(value),
            "EEL" => eel = Some(value),
            "EPB" | "EGB" => polar = Some(value),
            "ENPOLAR" | "ESURF" => nonpolar = Some(value),
            "TOTAL" => total = Some(value),
            _ => {}
        }
    }
    let components = EnergyComponents {
        vdw: vdw.ok_or(MmpbsaError::MissingComponent("VDWAALS"))?,
        electrostatic: eel.ok_or(MmpbsaError::MissingComponent("EEL"))?,
        polar_solvation: polar.ok_or(MmpbsaError::MissingComponent("EPB/EGB"))?,
        nonpolar_sasa: nonpolar.ok_or(MmpbsaError::MissingComponent("ENPOLAR/ESURF"))?,
    };
    let reported_total = total.ok_or(MmpbsaError::MissingComponent("TOTAL"))?;
    let sum = components.delta_h();
    if (sum - reported_total).abs() > TOTAL_TOLERANCE {
        return Err(MmpbsaError::TotalMismatch {
            sum,
            total: reported_total,
        });
    }
    Ok(MmpbsaResults {
        components,
        reported_total,
    })
}

/// Renders a results file in the 1.4.x layout.
pub fn render_results(components: &EnergyComponents, temperature: f64) -> String {
    let row = |name: &str, v: f64| format!("{name:<20}{v:>15.4}{:>22.4}{:>20.4}\n", 0.0, 0.0);
    let gas = components.vdw + components.electrostatic;
    let solv = components.polar_solvation + components.nonpolar_sasa;
    let mut out = format!(
        "| Run on mdagent mock backend\n|gmx_MMPBSA Version=1.4.3\n| Temperature = {temperature}\n\n\
         POISSON BOLTZMANN:\n\n\
         Differences (Complex - Receptor - Ligand):\n\
         Energy Component            Average              Std. Dev.   Std. Err. of Mean\n\
         -------------------------------------------------------------------------------\n"
    );
    out.push_str(&row("BOND", 0.0));
    out.push_str(&row("VDWAALS", components.vdw));
    out.push_str(&row("EEL", components.electrostatic));
    out.push_str(&row("EPB", components.polar_solvation));
    out.push_str(&row("ENPOLAR", components.nonpolar_sasa));
    out.push('\n');
    out.push_str(&row("DELTA G gas", gas));
    out.push_str(&row("DELTA G solv", solv));
    out.push('\n');
    out.push_str(&row("DELTA TOTAL", gas + solv));
    out.push_str("\n-------------------------------------------------------------------------------\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mock() -> EnergyComponents {
        EnergyComponents {
            vdw: -40.0,
            electrostatic: -15.0,
            polar_solvation: 12.0,
            nonpolar_sasa: -2.0,
        }
    }

    #[test]
    fn free_energy_and_sum() {
        assert_eq!(mock().delta_h(), -45.0);
        let e = BindingEnergy::compute(mock(), 300.0, Some(-0.05));
        assert!((e.delta_g - -30.0).abs() < 1e-9);
        let e = BindingEnergy::compute(mock(), 300.0, None);
        assert!(e.entropy_omitted);
        assert_eq!(e.delta_g, -45.0);
        assert!(e.summary().contains("entropy term omitted"));
    }

    #[test]
    fn results_roundtrip_and_cross_check() {
        let text = render_results(&mock(), 300.0);
        let parsed = parse_results(&text).unwrap();
        assert_eq!(parsed.components, mock());
        assert_eq!(parsed.reported_total, -45.0);
        let tampered = text.replace("-45.0000", "-44.5000");
        assert!(matches!(
            parse_results(&tampered),
            Err(MmpbsaError::TotalMismatch { .. })
        ));
        assert_eq!(parse_results("nothing"), Err(MmpbsaError::NoDeltaSection));
    }

    #[test]
    fn newer_delta_layout() {
        let text = "Delta (Complex - Receptor - Ligand):\n\
            Energy Component       Average     SD(Prop.)         SD   SEM(Prop.)        SEM\n\
            ---------------------------------------------------------------------------\n\
            ΔBOND                     0.00          0.00       0.00         0.00       0.00\n\
            ΔVDWAALS                -40.00          1.00       1.00         0.10       0.10\n\
            ΔEEL                    -15.00          1.00       1.00         0.10       0.10\n\
            ΔEGB                     12.00          1.00       1.00         0.10       0.10\n\
            ΔESURF                   -2.00          1.00       1.00         0.10       0.10\n\
            \n\
            ΔGGAS                   -55.00          1.00       1.00         0.10       0.10\n\
            ΔGSOLV                   10.00          1.00       1.00         0.10       0.10\n\
            \n\
            ΔTOTAL                  -45.00          1.00       1.00         0.10       0.10\n";
        let parsed = parse_results(text).unwrap();
        assert_eq!(parsed.components.polar_solvation, 12.0);
    }
}
