//! Tripos mol2 files as written by antechamber.

use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq)]
pub struct Mol2Atom {
    pub name: String,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub atom_type: String,
    pub resname: String,
    pub charge: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mol2 {
    pub name: String,
    pub atoms: Vec<Mol2Atom>,
}

impl Mol2 {
    pub fn net_charge(&self) -> f64 {
        self.atoms.iter().map(|a| a.charge).sum()
    }

    pub fn atom_types(&self) -> BTreeSet<&str> {
        self.atoms.iter().map(|a| a.atom_type.as_str()).collect()
    }

    /// Residue name of the first atom; the leap unit name.
    pub fn resname(&self) -> Option<&str> {
        self.atoms.first().map(|a| a.resname.as_str())
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut section = "";
        let mut name = String::new();
        let mut atoms = Vec::new();
        let mut molecule_line = 0;
        for line in text.lines() {
            let trimmed = line.trim();
            if let Some(tag) = trimmed.strip_prefix("@<TRIPOS>") {
                section = match tag {
                    "MOLECULE" => "molecule",
                    "ATOM" => "atom",
                    _ => "other",
                };
                molecule_line = 0;
                continue;
            }
            if trimmed.is_empty() {
                continue;
            }
            match section {
                "molecule" => {
                    if molecule_line == 0 {
                        name = trimmed.to_string();
                    }
                    molecule_line += 1;
                }
                "atom" => {
                    let cols: Vec<&str> = trimmed.split_whitespace().collect();
                    if cols.len() < 9 {
                        return Err(format!("short mol2 atom line: {trimmed}"));
                    }
                    let num = |i: usize| -> Result<f64, String> {
                        cols[i]
                            .parse()
                            .map_err(|_| format!("bad number '{}' in mol2 atom line", cols[i]))
                    };
                    atoms.push(Mol2Atom {
                        name: cols[1].to_string(),
                        x: num(2)?,
                        y: num(3)?,
                        z: num(4)?,
                        atom_type: cols[5].to_string(),
                        resname: cols[7].to_string(),
                        charge: num(8)?,
                    });
                }
                _ => {}
            }
        }
        if atoms.is_empty() {
            return Err("mol2 file has no atoms".to_string());
        }
        Ok(Self { name, atoms })
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "@<TRIPOS>MOLECULE\n{}\n{:>5} {:>5} {:>5} {:>5} {:>5}\nSMALL\nbcc\n\n\n@<TRIPOS>ATOM\n",
            self.name,
            self.atoms.len(),
            0,
            1,
            0,
            0
        );
        for (i, a) in self.atoms.iter().enumerate() {
            out.push_str(&format!(
                "{:>7} {:<8} {:>10.4} {:>10.4} {:>10.4} {:<6} {:>4} {:<6} {:>10.6}\n",
                i + 1,
                a.name,
                a.x,
                a.y,
                a.z,
                a.atom_type,
                1,
                a.resname,
                a.charge
            ));
        }
        out.push_str(&format!(
            "@<TRIPOS>SUBSTRUCTURE\n     1 {:<6} 1 TEMP 0 **** **** 0 ROOT\n",
            self.atoms.first().map(|a| a.resname.as_str()).unwrap_or("LIG")
        ));
        out
    }
}
