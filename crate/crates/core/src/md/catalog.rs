//! Synthetic stand-ins for the benchmark PDB entries used by the mock
//! backend. Geometry is fake; record layout, chain structure, ligands,
//! waters and stray heteroatoms are shaped like the real entries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::pdb::{write_pdb, Atom};
use crate::text::sha256_hex;

#[derive(Debug, Clone, Copy)]
pub struct LigandTemplate {
    pub code: &'static str,
    /// Heavy-atom elements in order; names are element + running index.
    pub elements: &'static [&'static str],
    pub copies: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub pdb_id: &'static str,
    pub title: &'static str,
    pub chains: &'static [(char, usize)],
    pub ligands: &'static [LigandTemplate],
    /// Heteroatom groups that are not ligands (removed by cleaning).
    pub other_hetero: &'static [&'static str],
    pub waters: usize,
}

const JZ4: &[&str] = &["C", "C", "C", "C", "C", "C", "C", "C", "C", "O"];
const BEN: &[&str] = &["C", "C", "C", "C", "C", "C", "C", "N", "N"];
const OX5: &[&str] = &[
    "C", "C", "C", "C", "C", "C", "N", "C", "C", "O", "C", "C", "C", "N", "C", "C", "C", "O", "C", "N",
];
const BNZ: &[&str] = &["C", "C", "C", "C", "C", "C"];
const G89: &[&str] = &["C", "C", "C", "N", "C", "C", "S", "C", "N", "C", "C", "O", "C", "C", "O", "N"];
const UNL: &[&str] = &[
    "C", "C", "C", "N", "C", "C", "N", "C", "C", "C", "O", "C", "C", "C", "C", "N", "C", "C", "O", "CL",
];
const ADN: &[&str] = &[
    "N", "C", "N", "C", "C", "C", "N", "N", "C", "N", "C", "O", "C", "O", "C", "O", "C", "C", "O",
];

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        pdb_id: "1AKI",
        title: "LYSOZYME (monomer)",
        chains: &[('A', 129)],
        ligands: &[],
        other_hetero: &[],
        waters: 40,
    },
    CatalogEntry {
        pdb_id: "1FDH",
        title: "HEMOGLOBIN (four chains)",
        chains: &[('A', 141), ('B', 146), ('C', 141), ('D', 146)],
        ligands: &[],
        other_hetero: &["HEM", "HEM", "HEM", "HEM"],
        waters: 60,
    },
    CatalogEntry {
        pdb_id: "1J37",
        title: "ANCE (two chains)",
        chains: &[('A', 96), ('B', 96)],
        ligands: &[],
        other_hetero: &["NAG"],
        waters: 30,
    },
    CatalogEntry {
        pdb_id: "2CBA",
        title: "CARBONIC ANHYDRASE II",
        chains: &[('A', 258)],
        ligands: &[],
        other_hetero: &["ZN"],
        waters: 50,
    },
    CatalogEntry {
        pdb_id: "2VVB",
        title: "ENDOGLUCANASE",
        chains: &[('A', 180)],
        ligands: &[],
        other_hetero: &["SO4", "GOL"],
        waters: 45,
    },
    CatalogEntry {
        pdb_id: "3HTB",
        title: "T4 LYSOZYME L99A/M102Q WITH 2-PROPYLPHENOL",
        chains: &[('A', 164)],
        ligands: &[LigandTemplate { code: "JZ4", elements: JZ4, copies: 1 }],
        other_hetero: &["PO4"],
        waters: 35,
    },
    CatalogEntry {
        pdb_id: "3PTB",
        title: "BETA-TRYPSIN WITH BENZAMIDINE",
        chains: &[('A', 223)],
        ligands: &[LigandTemplate { code: "BEN", elements: BEN, copies: 1 }],
        other_hetero: &["CA"],
        waters: 60,
    },
    CatalogEntry {
        pdb_id: "4GIH",
        title: "KINASE DOMAIN WITH INHIBITOR 0X5",
        chains: &[('A', 280)],
        ligands: &[LigandTemplate { code: "0X5", elements: OX5, copies: 1 }],
        other_hetero: &["EDO"],
        waters: 40,
    },
    CatalogEntry {
        pdb_id: "4W52",
        title: "T4 LYSOZYME L99A WITH BENZENE",
        chains: &[('A', 162)],
        ligands: &[LigandTemplate { code: "BNZ", elements: BNZ, copies: 1 }],
        other_hetero: &["HED"],
        waters: 40,
    },
    CatalogEntry {
        pdb_id: "5UEZ",
        title: "PROTEIN WITH FRAGMENT 89G",
        chains: &[('A', 170)],
        ligands: &[LigandTemplate { code: "89G", elements: G89, copies: 1 }],
        other_hetero: &[],
        waters: 30,
    },
    CatalogEntry {
        pdb_id: "6JJ3",
        title: "BRD4 BROMODOMAIN WITH CHLORINATED INHIBITOR",
        chains: &[('A', 127)],
        ligands: &[LigandTemplate { code: "UNL", elements: UNL, copies: 1 }],
        other_hetero: &["EDO"],
        waters: 35,
    },
    CatalogEntry {
        pdb_id: "5KB6",
        title: "ADENOSINE KINASE WITH TWO ADENOSINE MOLECULES",
        chains: &[('A', 345)],
        ligands: &[LigandTemplate { code: "ADN", elements: ADN, copies: 2 }],
        other_hetero: &["MG"],
        waters: 50,
    },
];

pub fn lookup(pdb_id: &str) -> Option<&'static CatalogEntry> {
    CATALOG.iter().find(|e| e.pdb_id.eq_ignore_ascii_case(pdb_id))
}

const AMINO_ACIDS: [&str; 20] = [
    "ALA", "ARG", "ASN", "ASP", "CYS", "GLN", "GLU", "GLY", "HIS", "ILE", "LEU", "LYS", "MET",
    "PHE", "PRO", "SER", "THR", "TRP", "TYR", "VAL",
];

fn rng_for(tag: &str) -> ChaCha8Rng {
    let digest = sha256_hex(tag.as_bytes());
    let mut seed = [0u8; 32];
    for (i, byte) in seed.iter_mut().enumerate() {
        *byte = u8::from_str_radix(&digest[2 * i..2 * i + 2], 16).unwrap_or(0);
    }
    ChaCha8Rng::from_seed(seed)
}

/// Deterministic RNG for a (scope, tag) pair.
pub fn seeded_rng(scope: &str, tag: &str) -> ChaCha8Rng {
    rng_for(&format!("{scope}/{tag}"))
}

fn het(name: &str, resname: &str, chain: char, resseq: i32, pos: (f64, f64, f64), element: &str) -> Atom {
    Atom {
        hetatm: true,
        serial: 0,
        name: if name.len() >= 4 || element.len() == 2 {
            format!("{name:<4}")
        } else {
            format!(" {name:<3}")
        },
        altloc: ' ',
        resname: resname.to_string(),
        chain,
        resseq,
        icode: ' ',
        x: pos.0,
        y: pos.1,
        z: pos.2,
        occupancy: 1.0,
        bfactor: 20.0,
        element: element.to_string(),
    }
}

/// Generates the PDB text of a catalog entry.
pub fn render_entry(entry: &CatalogEntry) -> String {
    let mut rng = seeded_rng("catalog", entry.pdb_id);
    let mut atoms = Vec::new();
    for (ci, &(chain, residues)) in entry.chains.iter().enumerate() {
        let offset = ci as f64 * 30.0;
        for r in 0..residues {
            let resname = AMINO_ACIDS[rng.random_range(0..AMINO_ACIDS.len())];
            let t = r as f64 * 1.745;
            let (cx, cy, cz) = (offset + 8.0 * t.cos(), 8.0 * t.sin(), 1.5 * r as f64 * 0.1);
            let backbone = [
                (" N  ", "N", -0.6, 0.0),
                (" CA ", "C", 0.0, 0.0),
                (" C  ", "C", 0.8, 0.3),
                (" O  ", "O", 1.2, 1.2),
            ];
            let altloc = if r == 5 { 'A' } else { ' ' };
            for (name, element, dx, dy) in backbone {
                atoms.push(Atom {
                    hetatm: false,
                    serial: 0,
                    name: name.to_string(),
                    altloc,
                    resname: resname.to_string(),
                    chain,
                    resseq: r as i32 + 1,
                    icode: ' ',
                    x: cx + dx,
                    y: cy + dy,
                    z: cz,
                    occupancy: if altloc == 'A' { 0.6 } else { 1.0 },
                    bfactor: 15.0,
                    element: element.to_string(),
                });
            }
            if altloc == 'A' {
                let mut b = atoms[atoms.len() - 3].clone();
                b.altloc = 'B';
                b.occupancy = 0.4;
                b.x += 0.2;
                atoms.push(b);
            }
            if resname != "GLY" {
                atoms.push(Atom {
                    hetatm: false,
                    serial: 0,
                    name: " CB ".to_string(),
                    altloc: ' ',
                    resname: resname.to_string(),
                    chain,
                    resseq: r as i32 + 1,
                    icode: ' ',
                    x: cx,
                    y: cy - 1.0,
                    z: cz + 1.2,
                    occupancy: 1.0,
                    bfactor: 18.0,
                    element: "C".to_string(),
                });
            }
        }
    }
    let first_chain = entry.chains.first().map(|c| c.0).unwrap_or('A');
    let mut resseq = 400;
    for lig in entry.ligands {
        for copy in 0..lig.copies {
            resseq += 1;
            let base = (2.0 + copy as f64 * 6.0, 1.0, 3.0);
            let mut counts = std::collections::HashMap::new();
            for (i, element) in lig.elements.iter().enumerate() {
                let n = counts.entry(*element).or_insert(0);
                *n += 1;
                let name = format!("{}{}", element, n);
                let angle = i as f64 * 0.9;
                let pos = (base.0 + 1.4 * angle.cos(), base.1 + 1.4 * angle.sin(), base.2 + 0.3 * i as f64);
                atoms.push(het(&name, lig.code, first_chain, resseq, pos, element));
            }
        }
    }
    for code in entry.other_hetero {
        resseq += 1;
        let pos = (rng.random_range(-15.0..15.0), rng.random_range(-15.0..15.0), rng.random_range(-15.0..15.0));
        let element = if code.len() <= 2 { code.to_string() } else { "C".to_string() };
        atoms.push(het(if code.len() <= 2 { code } else { "C1" }, code, first_chain, resseq, pos, &element));
    }
    for w in 0..entry.waters {
        let pos = (rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
        atoms.push(het("O", "HOH", first_chain, 500 + w as i32, pos, "O"));
    }
    let mut text = format!("HEADER    {:<40}\n", entry.title);
    text.push_str(&format!("TITLE     MOCK ENTRY {}\n", entry.pdb_id));
    text.push_str(&write_pdb(&atoms, "synthetic coordinates"));
    text
}
