//! Fixed-column PDB records: parsing, cleaning, capping, ligand extraction.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub hetatm: bool,
    pub serial: usize,
    pub name: String,
    pub altloc: char,
    pub resname: String,
    pub chain: char,
    pub resseq: i32,
    pub icode: char,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub occupancy: f64,
    pub bfactor: f64,
    pub element: String,
}

impl Atom {
    /// Residue identity: chain, sequence number, insertion code.
    pub fn residue_key(&self) -> (char, i32, char) {
        (self.chain, self.resseq, self.icode)
    }

    pub fn is_hydrogen(&self) -> bool {
        let el = self.element.trim();
        if !el.is_empty() {
            return el.eq_ignore_ascii_case("H");
        }
        self.name.trim_start_matches(|c: char| c.is_ascii_digit()).starts_with('H')
    }

    /// Element symbol, falling back to the atom name.
    pub fn element_symbol(&self) -> String {
        let el = self.element.trim();
        if !el.is_empty() {
            return el.to_string();
        }
        let letters: String = self
            .name
            .trim()
            .chars()
            .filter(|c| c.is_ascii_alphabetic())
            .take(1)
            .collect();
        letters.to_ascii_uppercase()
    }
}

fn field(line: &str, start: usize, end: usize) -> &str {
    let end = end.min(line.len());
    if start >= end {
        return "";
    }
    line.get(start..end).unwrap_or("")
}

fn char_at(line: &str, idx: usize) -> char {
    line.as_bytes().get(idx).map(|&b| b as char).unwrap_or(' ')
}

/// Parses one ATOM/HETATM line.
pub fn parse_atom_line(line: &str) -> Result<Atom, String> {
    let record = field(line, 0, 6).trim_end();
    let hetatm = match record {
        "ATOM" => false,
        "HETATM" => true,
        other => return Err(format!("not an atom record: '{other}'")),
    };
    let num = |start, end, what: &str| -> Result<f64, String> {
        field(line, start, end)
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("bad {what} in line: {line}"))
    };
    Ok(Atom {
        hetatm,
        serial: field(line, 6, 11).trim().parse().unwrap_or(0),
        name: field(line, 12, 16).to_string(),
        altloc: char_at(line, 16),
        resname: field(line, 17, 20).trim().to_string(),
        chain: char_at(line, 21),
        resseq: field(line, 22, 26)
            .trim()
            .parse()
            .map_err(|_| format!("bad residue number in line: {line}"))?,
        icode: char_at(line, 26),
        x: num(30, 38, "x")?,
        y: num(38, 46, "y")?,
        z: num(46, 54, "z")?,
        occupancy: field(line, 54, 60).trim().parse().unwrap_or(1.0),
        bfactor: field(line, 60, 66).trim().parse().unwrap_or(0.0),
        element: field(line, 76, 78).trim().to_string(),
    })
}

/// Parses all atom records; other records are ignored.
pub fn parse_pdb(text: &str) -> Result<Vec<Atom>, String> {
    text.lines()
        .filter(|l| l.starts_with("ATOM") || l.starts_with("HETATM"))
        .map(parse_atom_line)
        .collect()
}

/// Formats an atom in fixed-column layout. Four-character names start in
/// column 13; shorter names are already padded by the caller's convention.
pub fn format_atom(atom: &Atom) -> String {
    let record = if atom.hetatm { "HETATM" } else { "ATOM  " };
    let name = if atom.name.len() >= 4 {
        atom.name[..4].to_string()
    } else if atom.name.starts_with(' ') {
        format!("{:<4}", atom.name)
    } else {
        format!(" {:<3}", atom.name)
    };
    format!(
        "{record}{:>5} {name}{}{:>3} {}{:>4}{}   {:>8.3}{:>8.3}{:>8.3}{:>6.2}{:>6.2}          {:>2}",
        atom.serial % 100_000,
        atom.altloc,
        atom.resname,
        atom.chain,
        atom.resseq,
        atom.icode,
        atom.x,
        atom.y,
        atom.z,
        atom.occupancy,
        atom.bfactor,
        atom.element
    )
}

/// Writes atoms with TER between chains, renumbering serials from 1.
pub fn write_pdb(atoms: &[Atom], remark: &str) -> String {
    let mut out = String::new();
    if !remark.is_empty() {
        out.push_str(&format!("REMARK   1 {remark}\n"));
    }
    let mut prev_chain: Option<char> = None;
    for (i, atom) in atoms.iter().enumerate() {
        if let Some(c) = prev_chain {
            if c != atom.chain && !atom.hetatm {
                out.push_str("TER\n");
            }
        }
        let mut a = atom.clone();
        a.serial = i + 1;
        out.push_str(&format_atom(&a));
        out.push('\n');
        prev_chain = Some(atom.chain);
    }
    out.push_str("TER\nEND\n");
    out
}

pub const WATER_NAMES: [&str; 4] = ["HOH", "WAT", "TIP3", "SOL"];

/// Protein atoms only: waters, heteroatoms and alternate locations other
/// than blank/A are dropped.
pub fn clean_protein(atoms: &[Atom]) -> Vec<Atom> {
    atoms
        .iter()
        .filter(|a| !a.hetatm && !WATER_NAMES.contains(&a.resname.as_str()))
        .filter(|a| a.altloc == ' ' || a.altloc == 'A')
        .cloned()
        .map(|mut a| {
            a.altloc = ' ';
            a
        })
        .collect()
}

/// One residue instance of a ligand code.
#[derive(Debug, Clone, PartialEq)]
pub struct LigandInstance {
    /// File label: the code for the first instance, code+N for the N-th.
    pub label: String,
    pub code: String,
    pub atoms: Vec<Atom>,
}

/// Chain, sequence number, insertion code.
type ResidueKey = (char, i32, char);

/// Extracts every residue instance of `code` (altloc A kept).
pub fn extract_ligand(atoms: &[Atom], code: &str) -> Vec<LigandInstance> {
    let mut groups: BTreeMap<(usize, ResidueKey), Vec<Atom>> = BTreeMap::new();
    let mut order: Vec<ResidueKey> = Vec::new();
    for atom in atoms {
        if atom.resname != code || !(atom.altloc == ' ' || atom.altloc == 'A') {
            continue;
        }
        let key = atom.residue_key();
        let pos = match order.iter().position(|k| *k == key) {
            Some(p) => p,
            None => {
                order.push(key);
                order.len() - 1
            }
        };
        let mut a = atom.clone();
        a.altloc = ' ';
        a.hetatm = true;
        groups.entry((pos, key)).or_default().push(a);
    }
    groups
        .into_values()
        .enumerate()
        .map(|(i, atoms)| LigandInstance {
            label: if i == 0 {
                code.to_string()
            } else {
                format!("{code}{}", i + 1)
            },
            code: code.to_string(),
            atoms,
        })
        .collect()
}

/// Heteroatom residue codes present, excluding water, in first-seen order.
pub fn hetero_codes(atoms: &[Atom]) -> Vec<String> {
    let mut codes: Vec<String> = Vec::new();
    for a in atoms.iter().filter(|a| a.hetatm) {
        if !WATER_NAMES.contains(&a.resname.as_str()) && !codes.contains(&a.resname) {
            codes.push(a.resname.clone());
        }
    }
    codes
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainSummary {
    pub chain: char,
    pub residues: usize,
}

/// Chains in first-seen order with their residue counts (protein records).
pub fn chain_summary(atoms: &[Atom]) -> Vec<ChainSummary> {
    let mut out: Vec<ChainSummary> = Vec::new();
    let mut last: Option<(char, i32, char)> = None;
    for atom in atoms.iter().filter(|a| !a.hetatm) {
        let key = atom.residue_key();
        if last == Some(key) {
            continue;
        }
        last = Some(key);
        match out.iter_mut().find(|c| c.chain == atom.chain) {
            Some(c) => c.residues += 1,
            None => out.push(ChainSummary {
                chain: atom.chain,
                residues: 1,
            }),
        }
    }
    out
}

/// Formal charge from titratable residues at neutral pH.
pub fn residue_charge(resname: &str) -> i64 {
    match resname {
        "ARG" | "LYS" => 1,
        "ASP" | "GLU" => -1,
        _ => 0,
    }
}

pub fn protein_net_charge(atoms: &[Atom]) -> i64 {
    let mut last = None;
    let mut total = 0;
    for atom in atoms.iter().filter(|a| !a.hetatm) {
        let key = atom.residue_key();
        if last != Some(key) {
            total += residue_charge(&atom.resname);
            last = Some(key);
        }
    }
    total
}

fn cap_atom(template: &Atom, resname: &str, name: &str, resseq: i32, dx: f64) -> Atom {
    let element = name.trim().chars().next().map(String::from).unwrap_or_default();
    Atom {
        hetatm: false,
        serial: 0,
        name: format!(" {:<3}", name),
        altloc: ' ',
        resname: resname.to_string(),
        chain: template.chain,
        resseq,
        icode: ' ',
        x: template.x + dx,
        y: template.y,
        z: template.z,
        occupancy: 1.0,
        bfactor: 0.0,
        element,
    }
}

/// Adds an ACE cap before and an NME cap after every chain. Chains that
/// already carry caps are left alone.
pub fn cap_termini(atoms: &[Atom]) -> Vec<Atom> {
    let mut out = Vec::with_capacity(atoms.len() + 8);
    let mut i = 0;
    while i < atoms.len() {
        let chain = atoms[i].chain;
        let end = atoms[i..]
            .iter()
            .position(|a| a.chain != chain)
            .map(|p| i + p)
            .unwrap_or(atoms.len());
        let run = &atoms[i..end];
        let first = &run[0];
        let last = &run[run.len() - 1];
        if first.resname != "ACE" {
            let anchor = run.iter().find(|a| a.name.trim() == "N").unwrap_or(first);
            let seq = first.resseq - 1;
            out.push(cap_atom(anchor, "ACE", "CH3", seq, -2.4));
            out.push(cap_atom(anchor, "ACE", "C", seq, -1.3));
            out.push(cap_atom(anchor, "ACE", "O", seq, -1.1 + 0.0));
            if let Some(o) = out.last_mut() {
                o.y += 1.2;
            }
        }
        out.extend(run.iter().cloned());
        if last.resname != "NME" {
            let tail: Vec<&Atom> = run.iter().filter(|a| a.residue_key() == last.residue_key()).collect();
            let anchor = tail
                .iter()
                .find(|a| a.name.trim() == "C")
                .copied()
                .unwrap_or(last);
            let seq = last.resseq + 1;
            out.push(cap_atom(anchor, "NME", "N", seq, 1.3));
            out.push(cap_atom(anchor, "NME", "CH3", seq, 2.4));
        }
        i = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
ATOM      1  N   LYS A   1      -3.000   1.000   0.000  1.00 10.00           N
ATOM      2  CA  LYS A   1      -2.000   1.000   0.000  1.00 10.00           C
ATOM      3  C   LYS A   1      -1.000   1.000   0.000  1.00 10.00           C
ATOM      4  N  AASP A   2       0.000   1.000   0.000  0.50 10.00           N
ATOM      5  N  BASP A   2       0.100   1.000   0.000  0.50 10.00           N
ATOM      6  C   ASP A   2       1.000   1.000   0.000  1.00 10.00           C
HETATM    7  C1  JZ4 A 201       5.000   5.000   5.000  1.00 10.00           C
HETATM    8 CL1  JZ4 A 201       6.000   5.000   5.000  1.00 10.00          CL
HETATM    9  S   SO4 A 301       9.000   9.000   9.000  1.00 10.00           S
HETATM   10  O   HOH A 401       7.000   7.000   7.000  1.00 10.00           O
";

    #[test]
    fn parse_and_roundtrip() {
        let atoms = parse_pdb(SAMPLE).unwrap();
        assert_eq!(atoms.len(), 10);
        assert_eq!(atoms[7].name, "CL1 ");
        assert_eq!(atoms[7].element, "CL");
        let again = parse_pdb(&write_pdb(&atoms, "")).unwrap();
        assert_eq!(again.len(), atoms.len());
        for (a, b) in atoms.iter().zip(&again) {
            assert_eq!((a.name.as_str(), &a.resname, a.x), (b.name.as_str(), &b.resname, b.x));
        }
    }

    #[test]
    fn cleaning_keeps_altloc_a_and_drops_hetero() {
        let atoms = parse_pdb(SAMPLE).unwrap();
        let clean = clean_protein(&atoms);
        assert_eq!(clean.len(), 5);
        assert!(clean.iter().all(|a| !a.hetatm && a.altloc == ' '));
        assert_eq!(protein_net_charge(&clean), 0);
        assert_eq!(hetero_codes(&atoms), ["JZ4", "SO4"]);
    }

    #[test]
    fn caps_and_ligands() {
        let atoms = parse_pdb(SAMPLE).unwrap();
        let capped = cap_termini(&clean_protein(&atoms));
        assert_eq!(capped.first().unwrap().resname, "ACE");
        assert_eq!(capped.last().unwrap().resname, "NME");
        assert_eq!(chain_summary(&capped)[0].residues, 4);
        let ligs = extract_ligand(&atoms, "JZ4");
        assert_eq!(ligs.len(), 1);
        assert_eq!(ligs[0].atoms.len(), 2);
        assert!(extract_ligand(&atoms, "XXX").is_empty());
    }

    #[test]
    fn repeated_ligand_residues_get_numbered_labels() {
        let text = "\
HETATM    1  C1  ADN A 401       1.000   1.000   1.000  1.00 10.00           C
HETATM    2  C1  ADN A 402       3.000   1.000   1.000  1.00 10.00           C
";
        let ligs = extract_ligand(&parse_pdb(text).unwrap(), "ADN");
        let labels: Vec<&str> = ligs.iter().map(|l| l.label.as_str()).collect();
        assert_eq!(labels, ["ADN", "ADN2"]);
    }
}
