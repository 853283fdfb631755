//! Post-conversion topology work: per-chain position restraints and the
//! index groups used for temperature coupling.

use super::gro::GroFile;
use super::pdb::ChainSummary;

const WATER: [&str; 4] = ["WAT", "SOL", "HOH", "TIP3"];
const IONS: [&str; 6] = ["Na+", "Cl-", "NA", "CL", "SOD", "CLA"];

/// Force constant for heavy-atom restraints (kJ mol^-1 nm^-2).
pub const POSRE_FORCE: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomClass {
    Protein(char),
    Ligand,
    Water,
    Ion,
}

fn is_heavy(name: &str) -> bool {
    !name
        .trim_start_matches(|c: char| c.is_ascii_digit())
        .starts_with('H')
}

/// Classifies each atom; protein residues are assigned to chains in order
/// using the residue counts of the prepared structure.
pub fn classify(gro: &GroFile, chains: &[ChainSummary], ligand_codes: &[String]) -> Vec<AtomClass> {
    let mut out = Vec::with_capacity(gro.atoms.len());
    let mut chain_idx = 0;
    let mut used_in_chain = 0;
    let mut last_res: Option<(usize, &str)> = None;
    let mut current = chains.first().map(|c| c.chain).unwrap_or('A');
    for atom in &gro.atoms {
        let name = atom.resname.as_str();
        let class = if WATER.contains(&name) {
            AtomClass::Water
        } else if IONS.contains(&name) {
            AtomClass::Ion
        } else if ligand_codes.iter().any(|c| c == name) {
            AtomClass::Ligand
        } else {
            let key = (atom.resnr, name);
            if last_res != Some(key) {
                last_res = Some(key);
                if let Some(chain) = chains.get(chain_idx) {
                    if used_in_chain == chain.residues && chain_idx + 1 < chains.len() {
                        chain_idx += 1;
                        used_in_chain = 0;
                    }
                }
                used_in_chain += 1;
                current = chains.get(chain_idx).map(|c| c.chain).unwrap_or(current);
            }
            AtomClass::Protein(current)
        };
        out.push(class);
    }
    out
}

pub fn posre_file_name(chain: char) -> String {
    format!("posre_Protein_chain_{chain}.itp")
}

/// One restraint file per protein chain, covering its heavy atoms.
pub fn posre_files(gro: &GroFile, classes: &[AtomClass], chains: &[ChainSummary]) -> Vec<(String, String)> {
    chains
        .iter()
        .map(|chain| {
            let mut text = format!(
                "; position restraints for Protein_chain_{}\n[ position_restraints ]\n;  ai  funct  fcx    fcy    fcz\n",
                chain.chain
            );
            for (i, (atom, class)) in gro.atoms.iter().zip(classes).enumerate() {
                if *class == AtomClass::Protein(chain.chain) && is_heavy(&atom.name) {
                    text.push_str(&format!(
                        "{:>6}     1  {POSRE_FORCE}  {POSRE_FORCE}  {POSRE_FORCE}\n",
                        i + 1
                    ));
                }
            }
            (posre_file_name(chain.chain), text)
        })
        .collect()
}

/// Inserts POSRES-guarded includes before the `[ system ]` directive.
pub fn inject_posre_includes(top: &str, files: &[String]) -> String {
    let mut block = String::new();
    for f in files {
        block.push_str(&format!("#ifdef POSRES\n#include \"{f}\"\n#endif\n"));
    }
    block.push('\n');
    match top.find("[ system ]") {
        Some(pos) => format!("{}{}{}", &top[..pos], block, &top[pos..]),
        None => format!("{top}\n{block}"),
    }
}

/// Position-restraint files a topology includes.
pub fn posre_includes(top: &str) -> Vec<String> {
    top.lines()
        .filter_map(|l| l.trim().strip_prefix("#include"))
        .map(|rest| rest.trim().trim_matches('"').to_string())
        .filter(|f| f.starts_with("posre"))
        .collect()
}

fn render_group(name: &str, indices: &[usize]) -> String {
    let mut out = format!("[ {name} ]\n");
    for chunk in indices.chunks(15) {
        let line: Vec<String> = chunk.iter().map(|i| format!("{i:>4}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Index file with the groups the stage parameter files refer to.
pub fn index_groups(gro: &GroFile, classes: &[AtomClass], has_ligand: bool) -> String {
    let pick = |f: &dyn Fn(usize, &AtomClass) -> bool| -> Vec<usize> {
        classes
            .iter()
            .enumerate()
            .filter(|(i, c)| f(*i, c))
            .map(|(i, _)| i + 1)
            .collect()
    };
    let protein = |c: &AtomClass| matches!(c, AtomClass::Protein(_));
    let name_of = |i: usize| gro.atoms[i].name.as_str();
    let mut out = String::new();
    out.push_str(&render_group("System", &pick(&|_, _| true)));
    out.push_str(&render_group("Protein", &pick(&|_, c| protein(c))));
    out.push_str(&render_group("Protein-H", &pick(&|i, c| protein(c) && is_heavy(name_of(i)))));
    out.push_str(&render_group("C-alpha", &pick(&|i, c| protein(c) && name_of(i) == "CA")));
    out.push_str(&render_group(
        "Backbone",
        &pick(&|i, c| protein(c) && matches!(name_of(i), "N" | "CA" | "C")),
    ));
    if has_ligand {
        out.push_str(&render_group("Ligand", &pick(&|_, c| *c == AtomClass::Ligand)));
        out.push_str(&render_group(
            "Protein_Ligand",
            &pick(&|_, c| protein(c) || *c == AtomClass::Ligand),
        ));
    }
    out.push_str(&render_group(
        "Water_and_ions",
        &pick(&|_, c| matches!(c, AtomClass::Water | AtomClass::Ion)),
    ));
    out
}

/// Group names declared in an index file.
pub fn index_group_names(ndx: &str) -> Vec<String> {
    ndx.lines()
        .filter_map(|l| l.trim().strip_prefix('[')?.strip_suffix(']'))
        .map(|n| n.trim().to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::md::gro::GroAtom;

    fn atom(resnr: usize, resname: &str, name: &str) -> GroAtom {
        GroAtom { resnr, resname: resname.into(), name: name.into(), x: 0.0, y: 0.0, z: 0.0 }
    }

    fn system() -> GroFile {
        GroFile {
            title: "t".into(),
            atoms: vec![
                atom(1, "ALA", "N"),
                atom(1, "ALA", "H"),
                atom(1, "ALA", "CA"),
                atom(2, "GLY", "N"),
                atom(2, "GLY", "CA"),
                atom(3, "JZ4", "C1"),
                atom(4, "Na+", "Na+"),
                atom(5, "WAT", "O"),
                atom(5, "WAT", "H1"),
            ],
            box_nm: [3.0; 3],
        }
    }

    #[test]
    fn chains_split_by_residue_counts() {
        let chains = vec![
            ChainSummary { chain: 'A', residues: 1 },
            ChainSummary { chain: 'B', residues: 1 },
        ];
        let gro = system();
        let classes = classify(&gro, &chains, &["JZ4".to_string()]);
        assert_eq!(classes[0], AtomClass::Protein('A'));
        assert_eq!(classes[3], AtomClass::Protein('B'));
        assert_eq!(classes[5], AtomClass::Ligand);
        let files = posre_files(&gro, &classes, &chains);
        assert_eq!(files.len(), 2);
        assert_eq!(files[0].0, "posre_Protein_chain_A.itp");
        assert_eq!(files[0].1.lines().filter(|l| l.contains("  1000")).count(), 2);
        let ndx = index_groups(&gro, &classes, true);
        let names = index_group_names(&ndx);
        assert!(names.contains(&"Protein_Ligand".to_string()));
        assert!(names.contains(&"Water_and_ions".to_string()));
    }

    #[test]
    fn includes_roundtrip() {
        let top = "[ moleculetype ]\nsystem 3\n\n[ system ]\nx\n";
        let names = vec!["posre_Protein_chain_A.itp".to_string()];
        let out = inject_posre_includes(top, &names);
        assert!(out.find("#include").unwrap() < out.find("[ system ]").unwrap());
        assert_eq!(posre_includes(&out), names);
    }
}
