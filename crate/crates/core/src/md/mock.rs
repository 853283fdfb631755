//! Deterministic emulation of the external programs. Output files carry
//! the headers and layout of the real ones so every parser downstream is
//! exercised; numbers come from an RNG seeded by the run id.

use std::collections::BTreeSet;

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;

use super::catalog::{lookup, render_entry, seeded_rng};
use super::gro::{GroAtom, GroFile};
use super::leap::{read_script, INPCRD, PRMTOP, SOLVATED_PDB};
use super::mdp::mdp_value;
use super::mmpbsa::{render_results, EnergyComponents};
use super::mol2::{Mol2, Mol2Atom};
use super::pdb::{parse_pdb, write_pdb, Atom, WATER_NAMES};
use super::topology::{index_group_names, posre_includes};
use super::xvg::Curve;
use super::{AnalysisKind, MdBackend, Stage, MMPBSA_RESULTS};
use crate::tools::{FailureKind, ToolContext, ToolFailure};

const KNOWN_RESIDUES: [&str; 27] = [
    "ALA", "ARG", "ASN", "ASP", "CYS", "GLN", "GLU", "GLY", "HIS", "ILE", "LEU", "LYS", "MET",
    "PHE", "PRO", "SER", "THR", "TRP", "TYR", "VAL", "HID", "HIE", "HIP", "CYX", "ACE", "NME", "NHE",
];

const WATER_SPACING: f64 = 6.0;
const WATER_EXCLUSION: f64 = 3.0;

/// Mock-suite component values (kcal/mol).
pub const MOCK_COMPONENTS: EnergyComponents = EnergyComponents {
    vdw: -40.0,
    electrostatic: -15.0,
    polar_solvation: 12.0,
    nonpolar_sasa: -2.0,
};

#[derive(Debug, Clone, Copy, Default)]
pub struct MockBackend;

impl MockBackend {
    pub fn new() -> Self {
        Self
    }
}

fn rng(ctx: &ToolContext<'_>, tag: &str) -> ChaCha8Rng {
    seeded_rng(ctx.sandbox.run_id(), tag)
}

fn exit_failure(program: &str, body: String) -> ToolFailure {
    ToolFailure::new(
        FailureKind::ProcessExit,
        format!("`{program}` exited with status 1\n{body}"),
    )
}

fn read_atoms(ctx: &ToolContext<'_>, file: &str) -> Result<Vec<Atom>, ToolFailure> {
    let text = ctx.sandbox.read_string(file)?;
    parse_pdb(&text).map_err(|e| ToolFailure::new(FailureKind::ProcessExit, format!("{file}: {e}")))
}

fn mol2_type(element: &str, index: usize) -> &'static str {
    match element {
        "C" if index.is_multiple_of(2) => "ca",
        "C" => "c3",
        "N" => "n",
        "O" => "oh",
        "S" => "ss",
        "CL" => "cl",
        "F" => "f",
        "BR" => "br",
        "P" => "p5",
        "H" => "hc",
        _ => "du",
    }
}

fn grompp_error(message: &str) -> String {
    format!(
        "-------------------------------------------------------\nProgram:     gmx grompp (mock)\n\nFatal error:\n{message}\n\nFor more information and tips for troubleshooting, please check the GROMACS\nwebsite\n-------------------------------------------------------\n"
    )
}

fn jitter(gro: &GroFile, rng: &mut ChaCha8Rng, amount: f64) -> GroFile {
    let mut out = gro.clone();
    for a in &mut out.atoms {
        a.x += rng.random_range(-amount..amount);
        a.y += rng.random_range(-amount..amount);
        a.z += rng.random_range(-amount..amount);
    }
    out
}

fn random_bytes(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    let mut buf = vec![0u8; n];
    rng.fill_bytes(&mut buf);
    buf
}

fn series(n: usize, t_end: f64, f: impl Fn(f64, usize) -> f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let t = t_end * i as f64 / (n.max(2) - 1) as f64;
            (t, f(t, i))
        })
        .collect()
}

fn noise(rng: &mut ChaCha8Rng, n: usize, amp: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-amp..amp)).collect()
}

impl MdBackend for MockBackend {
    fn label(&self) -> &'static str {
        "mock"
    }

    fn download_structure(&self, _ctx: &ToolContext<'_>, pdb_id: &str) -> Result<String, ToolFailure> {
        let entry = lookup(pdb_id).ok_or_else(|| {
            ToolFailure::new(
                FailureKind::Network,
                format!(
                    "HTTP 404 Not Found: https://files.rcsb.org/download/{}.pdb",
                    pdb_id.to_ascii_uppercase()
                ),
            )
        })?;
        Ok(render_entry(entry))
    }

    fn protonate(&self, ctx: &ToolContext<'_>, input: &str, output: &str, ph: f64) -> Result<(), ToolFailure> {
        let atoms = read_atoms(ctx, input)?;
        if atoms.is_empty() {
            return Err(exit_failure("obabel", format!("0 molecules converted\n{input}: no atoms")));
        }
        let mut out = Vec::with_capacity(atoms.len() * 2);
        let mut h = 0;
        for atom in &atoms {
            out.push(atom.clone());
            if matches!(atom.element_symbol().as_str(), "C" | "N" | "O") {
                h += 1;
                let mut hydrogen = atom.clone();
                hydrogen.name = format!(" H{:<2}", h);
                if hydrogen.name.len() > 4 {
                    hydrogen.name = format!("H{h:<3}");
                }
                hydrogen.element = "H".into();
                hydrogen.x += 1.0;
                out.push(hydrogen);
            }
        }
        ctx.sandbox
            .write(output, write_pdb(&out, &format!("protonated at pH {ph:.1}")))?;
        Ok(())
    }

    fn parameterize(
        &self,
        ctx: &ToolContext<'_>,
        input: &str,
        resname: &str,
        net_charge: i64,
    ) -> Result<(), ToolFailure> {
        let atoms = read_atoms(ctx, input)?;
        if atoms.is_empty() {
            return Err(exit_failure("antechamber", format!("Error: no atoms read from {input}")));
        }
        let mut rng = rng(ctx, &format!("parameterize/{resname}"));
        let mut charges: Vec<f64> = atoms.iter().map(|_| rng.random_range(-0.4..0.4)).collect();
        let sum: f64 = charges.iter().sum();
        let shift = (net_charge as f64 - sum) / charges.len() as f64;
        for c in &mut charges {
            *c += shift;
        }
        let mol = Mol2 {
            name: resname.to_string(),
            atoms: atoms
                .iter()
                .zip(&charges)
                .enumerate()
                .map(|(i, (a, q))| Mol2Atom {
                    name: a.name.trim().to_string(),
                    x: a.x,
                    y: a.y,
                    z: a.z,
                    atom_type: mol2_type(&a.element_symbol(), i).to_string(),
                    resname: resname.to_string(),
                    charge: *q,
                })
                .collect(),
        };
        ctx.sandbox.write("ligand.mol2", mol.render())?;
        let types: Vec<&str> = mol.atom_types().into_iter().collect();
        let mut frcmod = "Remark line goes here\nMASS\n\nBOND\n\nANGLE\n".to_string();
        if types.len() >= 2 {
            frcmod.push_str(&format!(
                "{}-{}-{}   63.000     110.630   same as c3-c3-c3, penalty score=  0.0\n",
                types[0], types[1], types[0]
            ));
        }
        frcmod.push_str("\nDIHE\n\nIMPROPER\n\nNONBON\n\n\n");
        ctx.sandbox.write("ligand.frcmod", frcmod)?;
        Ok(())
    }

    fn tleap(&self, ctx: &ToolContext<'_>, script: &str) -> Result<String, ToolFailure> {
        let facts = read_script(script);
        let mut log = String::from("-I: Adding /opt/amber/dat/leap/prep to search path.\nWelcome to LEaP!\n");
        let fatal = |log: String, msg: String| -> ToolFailure {
            exit_failure("tleap", format!("{log}FATAL:  {msg}\nExiting LEaP: Errors = 1; Warnings = 0; Notes = 0.\n"))
        };
        if let (Some(mol2), Some(frcmod)) = (&facts.mol2, &facts.frcmod) {
            for file in [frcmod, mol2] {
                if !ctx.sandbox.nonempty(file) {
                    return Err(fatal(log, format!("Could not open file {file}: not found")));
                }
                log.push_str(&format!("Loading parameters/mol2: ./{file}\n"));
            }
        }
        let structure = facts
            .structure
            .clone()
            .ok_or_else(|| fatal(log.clone(), "no loadpdb command in script".into()))?;
        if !ctx.sandbox.nonempty(&structure) {
            return Err(fatal(log, format!("Could not open file {structure}: not found")));
        }
        log.push_str(&format!("Loading PDB file: ./{structure}\n"));
        let atoms = read_atoms(ctx, &structure)?;
        let mut residues = BTreeSet::new();
        for a in &atoms {
            let known = KNOWN_RESIDUES.contains(&a.resname.as_str())
                || facts.ligand_unit.as_deref() == Some(a.resname.as_str());
            if !known {
                return Err(fatal(
                    log,
                    format!("Unknown residue: {}   number: {}   type: Nonterminal", a.resname, a.resseq),
                ));
            }
            residues.insert(a.residue_key());
        }
        log.push_str(&format!("  total atoms in file: {}\n", atoms.len()));

        let pad = facts.padding_angstrom.unwrap_or(10.0);
        let (mut lo, mut hi) = ([f64::MAX; 3], [f64::MIN; 3]);
        for a in &atoms {
            for (k, v) in [a.x, a.y, a.z].into_iter().enumerate() {
                lo[k] = lo[k].min(v - pad);
                hi[k] = hi[k].max(v + pad);
            }
        }
        let dims = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
        let chain = atoms.first().map(|a| a.chain).unwrap_or('A');
        let mut sites = Vec::new();
        let counts = dims.map(|d| (d / WATER_SPACING).floor() as usize);
        for i in 0..counts[0] {
            for j in 0..counts[1] {
                for k in 0..counts[2] {
                    let p = [
                        lo[0] + (i as f64 + 0.5) * WATER_SPACING,
                        lo[1] + (j as f64 + 0.5) * WATER_SPACING,
                        lo[2] + (k as f64 + 0.5) * WATER_SPACING,
                    ];
                    let clash = atoms.iter().any(|a| {
                        let d2 = (a.x - p[0]).powi(2) + (a.y - p[1]).powi(2) + (a.z - p[2]).powi(2);
                        d2 < WATER_EXCLUSION * WATER_EXCLUSION
                    });
                    if !clash {
                        sites.push(p);
                    }
                }
            }
        }
        let ions = (facts.cations + facts.anions) as usize;
        if sites.len() < ions {
            return Err(fatal(log, "no room to place counter ions".into()));
        }
        log.push_str(&format!(
            "  Solute vdw bounding box: {:.3} {:.3} {:.3}\n  Total bounding box for atom centers: {:.3} {:.3} {:.3}\n  Added {} residues.\n",
            dims[0] - 2.0 * pad,
            dims[1] - 2.0 * pad,
            dims[2] - 2.0 * pad,
            dims[0],
            dims[1],
            dims[2],
            sites.len() - ions
        ));
        let mut system = atoms.clone();
        let mut seq = 1000;
        let place = |name: &str, resname: &str, p: [f64; 3], seq: i32, element: &str| Atom {
            hetatm: false,
            serial: 0,
            name: format!("{name:<4}"),
            altloc: ' ',
            resname: resname.to_string(),
            chain,
            resseq: seq,
            icode: ' ',
            x: p[0],
            y: p[1],
            z: p[2],
            occupancy: 1.0,
            bfactor: 0.0,
            element: element.to_string(),
        };
        for (n, p) in sites.iter().take(ions).enumerate() {
            seq += 1;
            let (ion, el) = if (n as u64) < facts.cations { ("Na+", "NA") } else { ("Cl-", "CL") };
            system.push(place(ion, ion, *p, seq, el));
        }
        if facts.cations > 0 {
            log.push_str(&format!("Adding {} counter ions to \"mol\" using 1A grid\n", facts.cations));
        }
        if facts.anions > 0 {
            log.push_str(&format!("Adding {} counter ions to \"mol\" using 1A grid\n", facts.anions));
        }
        for p in sites.iter().skip(ions) {
            seq += 1;
            system.push(place("O", "WAT", *p, seq, "O"));
            system.push(place("H1", "WAT", [p[0] + 0.96, p[1], p[2]], seq, "H"));
            system.push(place("H2", "WAT", [p[0] - 0.24, p[1] + 0.93, p[2]], seq, "H"));
        }
        ctx.sandbox.write(SOLVATED_PDB, write_pdb(&system, "solvated by tleap (mock)"))?;
        ctx.sandbox.write(
            PRMTOP,
            format!(
                "%VERSION  VERSION_STAMP = V0001.000\n%FLAG TITLE\n%FORMAT(20a4)\ndefault_name\n%FLAG POINTERS\n%FORMAT(10I8)\n{:>8}\n",
                system.len()
            ),
        )?;
        let mut inpcrd = format!("default_name\n{:>6}\n", system.len());
        for a in &system {
            inpcrd.push_str(&format!("{:12.7}{:12.7}{:12.7}\n", a.x - lo[0], a.y - lo[1], a.z - lo[2]));
        }
        inpcrd.push_str(&format!(
            "{:12.7}{:12.7}{:12.7}  90.0000000  90.0000000  90.0000000\n",
            dims[0], dims[1], dims[2]
        ));
        ctx.sandbox.write(INPCRD, inpcrd)?;
        log.push_str(&format!(
            "Writing parm file: {PRMTOP}\nWriting crd file: {INPCRD}\nWriting pdb file: {SOLVATED_PDB}\n  {} residues, {} atoms\n\tQuit\n",
            residues.len() + ions + sites.len().saturating_sub(ions),
            system.len()
        ));
        Ok(log)
    }

    fn convert(&self, ctx: &ToolContext<'_>) -> Result<(), ToolFailure> {
        for file in [PRMTOP, INPCRD, SOLVATED_PDB] {
            if !ctx.sandbox.nonempty(file) {
                return Err(exit_failure("acpype", format!("ERROR: file {file} not found")));
            }
        }
        let atoms = read_atoms(ctx, SOLVATED_PDB)?;
        let inpcrd = ctx.sandbox.read_string(INPCRD)?;
        let box_line = inpcrd.lines().last().unwrap_or_default();
        let dims: Vec<f64> = box_line
            .split_whitespace()
            .take(3)
            .filter_map(|v| v.parse().ok())
            .collect();
        if dims.len() != 3 {
            return Err(exit_failure("acpype", "ERROR: no periodic box in inpcrd".into()));
        }
        let (mut lo, mut resnr, mut last) = ([f64::MAX; 3], 0, None);
        for a in &atoms {
            lo[0] = lo[0].min(a.x);
            lo[1] = lo[1].min(a.y);
            lo[2] = lo[2].min(a.z);
        }
        let mut gro_atoms = Vec::with_capacity(atoms.len());
        let mut top = String::from(
            "; topol.top converted by acpype (mock)\n[ defaults ]\n; nbfunc  comb-rule  gen-pairs  fudgeLJ  fudgeQQ\n1  2  yes  0.5  0.8333\n\n[ moleculetype ]\n; name  nrexcl\nsystem  3\n\n[ atoms ]\n;   nr  type  resi  res  atom  cgnr  charge  mass\n",
        );
        for (i, a) in atoms.iter().enumerate() {
            let key = a.residue_key();
            if last != Some(key) {
                resnr += 1;
                last = Some(key);
            }
            gro_atoms.push(GroAtom {
                resnr,
                resname: a.resname.clone(),
                name: a.name.trim().to_string(),
                x: (a.x - lo[0]) / 10.0,
                y: (a.y - lo[1]) / 10.0,
                z: (a.z - lo[2]) / 10.0,
            });
            top.push_str(&format!(
                "{:>6}  {:<4} {:>5}  {:<4} {:<4} {:>5}  {:>8.4}  {:>8.3}\n",
                i + 1,
                a.element_symbol(),
                resnr,
                a.resname,
                a.name.trim(),
                i + 1,
                0.0,
                12.011
            ));
        }
        top.push_str("\n[ system ]\n system\n\n[ molecules ]\n; Compound  nmols\n system  1\n");
        let gro = GroFile {
            title: "solvated system converted by acpype (mock)".into(),
            atoms: gro_atoms,
            box_nm: [dims[0] / 10.0, dims[1] / 10.0, dims[2] / 10.0],
        };
        ctx.sandbox.write("topol.top", top)?;
        ctx.sandbox.write("solv_ions.gro", gro.render())?;
        Ok(())
    }

    fn md_stage(&self, ctx: &ToolContext<'_>, stage: Stage) -> Result<String, ToolFailure> {
        let mdp = ctx.sandbox.read_string(&stage.mdp_file())?;
        let top = ctx.sandbox.read_string("topol.top")?;
        if mdp_value(&mdp, "define").is_some_and(|d| d.contains("-DPOSRES")) {
            for include in posre_includes(&top) {
                if !ctx.sandbox.nonempty(&include) {
                    return Err(exit_failure(
                        "gmx grompp",
                        grompp_error(&format!("Topology include file \"{include}\" not found")),
                    ));
                }
            }
        }
        if let Some(groups) = mdp_value(&mdp, "tc-grps") {
            let ndx = ctx.sandbox.read_string("index.ndx").unwrap_or_default();
            let names = index_group_names(&ndx);
            for g in groups.split_whitespace() {
                if !names.iter().any(|n| n == g) {
                    return Err(exit_failure(
                        "gmx grompp",
                        grompp_error(&format!("Group {g} referenced in the .mdp file was not found in the index file.")),
                    ));
                }
            }
        }
        let input = ctx.sandbox.read_string(stage.input_coordinates())?;
        let gro = GroFile::parse(&input)
            .map_err(|e| exit_failure("gmx grompp", grompp_error(&format!("{}: {e}", stage.input_coordinates()))))?;
        let nsteps: u64 = mdp_value(&mdp, "nsteps").and_then(|v| v.parse().ok()).unwrap_or(0);
        let dt: f64 = mdp_value(&mdp, "dt").and_then(|v| v.parse().ok()).unwrap_or(0.002);
        let ref_t: f64 = mdp_value(&mdp, "ref_t")
            .and_then(|v| v.split_whitespace().next())
            .and_then(|v| v.parse().ok())
            .unwrap_or(300.0);
        let ps = nsteps as f64 * dt;
        let mut rng = rng(ctx, stage.as_str());
        let stem = stage.deffnm();
        ctx.sandbox.write(format!("{stem}.tpr").as_str(), random_bytes(&mut rng, 512))?;
        ctx.sandbox.write(format!("{stem}.edr").as_str(), random_bytes(&mut rng, 512))?;
        let moved = jitter(&gro, &mut rng, 0.005);
        ctx.sandbox.write(format!("{stem}.gro").as_str(), moved.render())?;
        let mut log = format!(
            "                 :-) GROMACS - gmx mdrun (mock) (-:\n\nInput Parameters:\n   nsteps = {nsteps}\n   dt = {dt}\n   natoms = {}\n\n",
            gro.atoms.len()
        );
        match stage {
            Stage::Em => {
                let steps = rng.random_range(300..nsteps.clamp(301, 1500));
                let fmax = rng.random_range(600.0..990.0);
                let pots = noise(&mut rng, 50, 50.0);
                let curve = series(50, steps as f64, |t, i| -4.0e5 - 1.0e5 * (1.0 - (-t / 200.0).exp()) + pots[i]);
                ctx.sandbox.write(
                    "potential.xvg",
                    Curve::new("Potential", "Step", "(kJ/mol)", curve.clone()).render("gmx energy (mock)"),
                )?;
                log.push_str(&format!(
                    "Steepest Descents converged to Fmax < 1000 in {steps} steps\nPotential Energy  = {:.5e}\nMaximum force     = {fmax:.5e} on atom {}\n",
                    curve.last().map(|p| p.1).unwrap_or(0.0),
                    rng.random_range(1..gro.atoms.len().max(2))
                ));
            }
            Stage::Nvt | Stage::Npt | Stage::Prod => {
                ctx.sandbox.write(format!("{stem}.cpt").as_str(), random_bytes(&mut rng, 1024))?;
                let n = 51;
                let t_noise = noise(&mut rng, n, 3.0);
                let temperature = series(n, ps, |_, i| ref_t + t_noise[i]);
                if stage == Stage::Nvt {
                    ctx.sandbox.write(
                        "temperature.xvg",
                        Curve::new("Temperature", "Time (ps)", "(K)", temperature).render("gmx energy (mock)"),
                    )?;
                }
                if stage == Stage::Npt {
                    let p_noise = noise(&mut rng, n, 80.0);
                    let d_noise = noise(&mut rng, n, 2.0);
                    ctx.sandbox.write(
                        "pressure.xvg",
                        Curve::new("Pressure", "Time (ps)", "(bar)", series(n, ps, |_, i| 1.0 + p_noise[i]))
                            .render("gmx energy (mock)"),
                    )?;
                    ctx.sandbox.write(
                        "density.xvg",
                        Curve::new("Density", "Time (ps)", "(kg/m^3)", series(n, ps, |_, i| 1012.0 + d_noise[i]))
                            .render("gmx energy (mock)"),
                    )?;
                }
                if stage == Stage::Prod {
                    ctx.sandbox.write("md.xtc", random_bytes(&mut rng, 4096))?;
                }
                log.push_str(&format!(
                    "Started mdrun\n   Step           Time\n {nsteps:>10} {ps:>14.5}\n\nFinished mdrun: {ps:.1} ps simulated\n"
                ));
            }
        }
        ctx.sandbox.write(format!("{stem}.log").as_str(), log.as_bytes())?;
        Ok(log)
    }

    fn analysis(&self, ctx: &ToolContext<'_>, kind: AnalysisKind) -> Result<(), ToolFailure> {
        if !ctx.sandbox.nonempty("md.xtc") {
            return Err(exit_failure("gmx", "Fatal error:\nFile md.xtc not found".into()));
        }
        let mdp = ctx.sandbox.read_string(&Stage::Prod.mdp_file()).unwrap_or_default();
        let nsteps: f64 = mdp_value(&mdp, "nsteps").and_then(|v| v.parse().ok()).unwrap_or(500000.0);
        let dt: f64 = mdp_value(&mdp, "dt").and_then(|v| v.parse().ok()).unwrap_or(0.002);
        let ns = nsteps * dt / 1000.0;
        let mut rng = rng(ctx, kind.as_str());
        let rows = 500;
        let curve = match kind {
            AnalysisKind::Rmsd => {
                let tau = ns * 0.05;
                let e = noise(&mut rng, rows, 0.005);
                Curve::new(
                    "RMSD",
                    "Time (ns)",
                    "RMSD (nm)",
                    series(rows, ns, |t, i| 0.15 * (1.0 - (-t / tau).exp()) + e[i].abs()),
                )
            }
            AnalysisKind::Gyrate => {
                let e = noise(&mut rng, rows, 0.004);
                Curve::new("Radius of gyration", "Time (ns)", "Rg (nm)", series(rows, ns, |_, i| 1.4 + e[i]))
            }
            AnalysisKind::Hbond => {
                let e: Vec<i64> = (0..rows).map(|_| rng.random_range(-8..=8)).collect();
                Curve::new(
                    "Hydrogen Bonds",
                    "Time (ns)",
                    "Number",
                    series(rows, ns, |_, i| (180 + e[i]) as f64),
                )
            }
            AnalysisKind::Rmsf => {
                let gro = GroFile::parse(&ctx.sandbox.read_string("md.gro").unwrap_or_default()).ok();
                let residues: BTreeSet<usize> = gro
                    .iter()
                    .flat_map(|g| g.atoms.iter())
                    .filter(|a| {
                        KNOWN_RESIDUES.contains(&a.resname.as_str()) && !WATER_NAMES.contains(&a.resname.as_str())
                    })
                    .map(|a| a.resnr)
                    .collect();
                let points = residues
                    .into_iter()
                    .map(|r| (r as f64, rng.random_range(0.04..0.3)))
                    .collect();
                Curve::new("RMS fluctuation", "Residue", "(nm)", points)
            }
        };
        ctx.sandbox.write(kind.output().as_str(), curve.render("gmx (mock)"))?;
        Ok(())
    }

    fn mmpbsa(&self, ctx: &ToolContext<'_>, temperature: f64) -> Result<(), ToolFailure> {
        for file in ["md.xtc", "md.tpr", "index.ndx", "topol.top"] {
            if !ctx.sandbox.nonempty(file) {
                return Err(exit_failure("gmx_MMPBSA", format!("ERROR: {file} not found")));
            }
        }
        ctx.sandbox.write(MMPBSA_RESULTS, render_results(&MOCK_COMPONENTS, temperature))?;
        Ok(())
    }
}
