//! tLEaP input generation and ion bookkeeping.

use serde::{Deserialize, Serialize};

/// Force-field defaults applied to every system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForceFieldChoice {
    pub protein_ff: String,
    pub ligand_ff: String,
    pub charge_model: String,
    pub water_model: String,
    pub cation: String,
    pub anion: String,
}

impl Default for ForceFieldChoice {
    fn default() -> Self {
        Self {
            protein_ff: "ff14SB".to_string(),
            ligand_ff: "gaff2".to_string(),
            charge_model: "bcc".to_string(),
            water_model: "tip3p".to_string(),
            cation: "Na+".to_string(),
            anion: "Cl-".to_string(),
        }
    }
}

impl ForceFieldChoice {
    fn water_box(&self) -> String {
        format!("{}BOX", self.water_model.to_ascii_uppercase())
    }
}

/// Counter-ions that bring `net_charge` to zero: (cations, anions).
pub fn neutralizing_ions(net_charge: i64) -> (u64, u64) {
    if net_charge < 0 {
        (net_charge.unsigned_abs(), 0)
    } else {
        (0, net_charge as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeapInput {
    pub structure: String,
    /// (unit name, mol2 file, frcmod file) for a bound ligand.
    pub ligand: Option<(String, String, String)>,
    pub padding_angstrom: f64,
    pub net_charge: i64,
}

pub const PRMTOP: &str = "system.prmtop";
pub const INPCRD: &str = "system.inpcrd";
pub const SOLVATED_PDB: &str = "system_solvated.pdb";

pub fn render_script(ff: &ForceFieldChoice, input: &LeapInput) -> String {
    let mut s = format!(
        "source leaprc.protein.{}\nsource leaprc.{}\nsource leaprc.water.{}\n",
        ff.protein_ff, ff.ligand_ff, ff.water_model
    );
    if let Some((unit, mol2, frcmod)) = &input.ligand {
        s.push_str(&format!("loadamberparams {frcmod}\n{unit} = loadmol2 {mol2}\n"));
    }
    s.push_str(&format!("mol = loadpdb {}\n", input.structure));
    s.push_str(&format!(
        "solvatebox mol {} {:.1}\n",
        ff.water_box(),
        input.padding_angstrom
    ));
    let (cations, anions) = neutralizing_ions(input.net_charge);
    if cations > 0 {
        s.push_str(&format!("addions mol {} {cations}\n", ff.cation));
    }
    if anions > 0 {
        s.push_str(&format!("addions mol {} {anions}\n", ff.anion));
    }
    s.push_str(&format!(
        "saveamberparm mol {PRMTOP} {INPCRD}\nsavepdb mol {SOLVATED_PDB}\nquit\n"
    ));
    s
}

/// Facts a leap script commits to, read back from its text.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScriptFacts {
    pub structure: Option<String>,
    pub ligand_unit: Option<String>,
    pub mol2: Option<String>,
    pub frcmod: Option<String>,
    pub padding_angstrom: Option<f64>,
    pub cations: u64,
    pub anions: u64,
}

pub fn read_script(script: &str) -> ScriptFacts {
    let mut facts = ScriptFacts::default();
    for line in script.lines() {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["mol", "=", "loadpdb", file] => facts.structure = Some(file.to_string()),
            [unit, "=", "loadmol2", file] => {
                facts.ligand_unit = Some(unit.to_string());
                facts.mol2 = Some(file.to_string());
            }
            ["loadamberparams", file] => facts.frcmod = Some(file.to_string()),
            ["solvatebox", _, _, pad] => facts.padding_angstrom = pad.parse().ok(),
            ["addions", _, ion, n] => {
                let n: u64 = n.parse().unwrap_or(0);
                if ion.ends_with('+') {
                    facts.cations += n;
                } else {
                    facts.anions += n;
                }
            }
            _ => {}
        }
    }
    facts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neutralization_counts() {
        assert_eq!(neutralizing_ions(-8), (8, 0));
        assert_eq!(neutralizing_ions(3), (0, 3));
        assert_eq!(neutralizing_ions(0), (0, 0));
    }

    #[test]
    fn script_mentions_force_fields_and_roundtrips() {
        let input = LeapInput {
            structure: "complex.pdb".into(),
            ligand: Some(("JZ4".into(), "ligand.mol2".into(), "ligand.frcmod".into())),
            padding_angstrom: 10.0,
            net_charge: -8,
        };
        let script = render_script(&ForceFieldChoice::default(), &input);
        assert!(script.contains("source leaprc.protein.ff14SB\n"));
        assert!(script.contains("source leaprc.gaff2\n"));
        assert!(script.contains("solvatebox mol TIP3PBOX 10.0\n"));
        assert!(script.contains("addions mol Na+ 8\n"));
        assert!(!script.contains("Cl-"));
        let facts = read_script(&script);
        assert_eq!(facts.cations, 8);
        assert_eq!(facts.ligand_unit.as_deref(), Some("JZ4"));
        assert_eq!(facts.structure.as_deref(), Some("complex.pdb"));
    }
}
