//! The twelve workflow tools and their registration.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use serde_json::json;

use super::fault::{FaultBundle, FaultyHandler};
use super::gro::GroFile;
use super::leap::{render_script, ForceFieldChoice, LeapInput, INPCRD, PRMTOP, SOLVATED_PDB};
use super::mmpbsa::{parse_results, BindingEnergy};
use super::mol2::Mol2;
use super::pdb::{
    cap_termini, chain_summary, clean_protein, extract_ligand, hetero_codes, parse_pdb, protein_net_charge,
    write_pdb, Atom,
};
use super::real::mdp_temperature;
use super::topology::{classify, index_groups, inject_posre_includes, posre_files};
use super::xvg::Curve;
use super::{AnalysisKind, MdBackend, Stage, ANALYSIS_KINDS, MMPBSA_RESULTS};
use crate::retrieval::{Literature, WebSearch};
use crate::sandbox::file_tool_handler;
use crate::tools::{
    Arguments, FailureKind, RegistryError, ToolContext, ToolFailure, ToolHandler, ToolRegistry, ToolResult,
    ToolSpec, ToolSuccess, DEFAULT_TOOL_TIMEOUT,
};

/// Registration order; also the order of the schemas shown to the model.
pub const TOOL_NAMES: [&str; 12] = [
    "fetch_pdb",
    "prepare_structures",
    "protonate_ligand",
    "parameterize_ligand",
    "merge_complex",
    "build_system",
    "run_md_stage",
    "run_analysis",
    "run_mmpbsa",
    "search_papers",
    "web_search",
    "file_tool",
];

const EMBEDDED: [&str; 12] = [
    include_str!("../../tools/fetch_pdb.json"),
    include_str!("../../tools/prepare_structures.json"),
    include_str!("../../tools/protonate_ligand.json"),
    include_str!("../../tools/parameterize_ligand.json"),
    include_str!("../../tools/merge_complex.json"),
    include_str!("../../tools/build_system.json"),
    include_str!("../../tools/run_md_stage.json"),
    include_str!("../../tools/run_analysis.json"),
    include_str!("../../tools/run_mmpbsa.json"),
    include_str!("../../tools/search_papers.json"),
    include_str!("../../tools/web_search.json"),
    include_str!("../../tools/file_tool.json"),
];

/// The schema documents shipped with the crate, in registration order.
pub fn embedded_specs() -> Vec<ToolSpec> {
    EMBEDDED
        .iter()
        .map(|text| ToolSpec::from_json(text).expect("embedded tool schema is valid"))
        .collect()
}

pub struct ToolsetOptions {
    pub backend: Arc<dyn MdBackend>,
    pub forcefield: ForceFieldChoice,
    pub padding_angstrom: f64,
    pub timeout: Duration,
    /// Load schemas from this directory instead of the embedded copies.
    pub spec_dir: Option<PathBuf>,
    pub literature: Option<Arc<Literature>>,
    /// `None` disables web search.
    pub web: Option<Arc<dyn WebSearch>>,
    pub faults: Option<FaultBundle>,
}

impl ToolsetOptions {
    pub fn new(backend: Arc<dyn MdBackend>) -> Self {
        Self {
            backend,
            forcefield: ForceFieldChoice::default(),
            padding_angstrom: 10.0,
            timeout: DEFAULT_TOOL_TIMEOUT,
            spec_dir: None,
            literature: None,
            web: None,
            faults: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ToolsetError {
    #[error("tool schemas: {0}")]
    Specs(String),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

struct Shared {
    backend: Arc<dyn MdBackend>,
    forcefield: ForceFieldChoice,
    padding: f64,
    literature: Option<Arc<Literature>>,
    web: Option<Arc<dyn WebSearch>>,
}

type Handler = fn(&Shared, &Arguments, &ToolContext<'_>) -> ToolResult;

const HANDLERS: [Handler; 11] = [
    fetch_pdb,
    prepare_structures,
    protonate_ligand,
    parameterize_ligand,
    merge_complex,
    build_system,
    run_md_stage,
    run_analysis,
    run_mmpbsa,
    search_papers,
    web_search,
];

/// Builds the registry of all twelve tools, wrapping faulted tools when a
/// fault bundle is given.
pub fn build_registry(options: ToolsetOptions) -> Result<ToolRegistry, ToolsetError> {
    let specs = match &options.spec_dir {
        Some(dir) => ToolSpec::load_dir(dir).map_err(ToolsetError::Specs)?,
        None => embedded_specs(),
    };
    let shared = Arc::new(Shared {
        backend: options.backend.clone(),
        forcefield: options.forcefield.clone(),
        padding: options.padding_angstrom,
        literature: options.literature.clone(),
        web: options.web.clone(),
    });
    let mut registry = ToolRegistry::new();
    for (i, name) in TOOL_NAMES.iter().enumerate() {
        let spec = specs
            .iter()
            .find(|s| s.name == *name)
            .cloned()
            .ok_or_else(|| RegistryError::MissingSpec(name.to_string()))?;
        let mut handler: Arc<dyn ToolHandler> = match HANDLERS.get(i) {
            Some(&f) => {
                let shared = shared.clone();
                Arc::new(move |args: &Arguments, ctx: &ToolContext<'_>| f(&shared, args, ctx))
            }
            None => file_tool_handler(),
        };
        if let Some(bundle) = &options.faults {
            let fixtures: Vec<_> = bundle.fixtures_for(name).cloned().collect();
            if !fixtures.is_empty() {
                handler = Arc::new(FaultyHandler::new(handler, fixtures));
            }
        }
        registry.register_with_timeout(spec, handler, options.timeout)?;
    }
    Ok(registry)
}

fn require(ctx: &ToolContext<'_>, files: &[&str], action: &str) -> Result<(), ToolFailure> {
    let missing: Vec<&str> = files.iter().copied().filter(|f| !ctx.sandbox.nonempty(f)).collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(ToolFailure::precondition(format!(
            "cannot {action}: missing or empty {}",
            missing.join(", ")
        )))
    }
}

fn load_atoms(ctx: &ToolContext<'_>, file: &str) -> Result<Vec<Atom>, ToolFailure> {
    let text = ctx.sandbox.read_string(file)?;
    parse_pdb(&text).map_err(|e| ToolFailure::new(FailureKind::Io, format!("{file}: {e}")))
}

fn fetch_pdb(shared: &Shared, args: &Arguments, ctx: &ToolContext<'_>) -> ToolResult {
    let id = args.str("pdb_id")?.trim().to_ascii_uppercase();
    if id.len() != 4 || !id.chars().all(|c| c.is_ascii_alphanumeric()) {
        return Err(ToolFailure::new(
            FailureKind::InvalidArguments,
            format!("'{id}' is not a four-character PDB identifier"),
        ));
    }
    let text = shared.backend.download_structure(ctx, &id)?;
    let atoms = parse_pdb(&text)
        .map_err(|e| ToolFailure::new(FailureKind::Network, format!("downloaded {id} is not a PDB file: {e}")))?;
    if atoms.is_empty() {
        return Err(ToolFailure::new(FailureKind::Network, format!("downloaded {id} has no atoms")));
    }
    let file = format!("{id}.pdb");
    ctx.sandbox.write(&file, &text)?;
    let chains = chain_summary(&atoms);
    let chain_text: Vec<String> = chains.iter().map(|c| format!("{}: {} residues", c.chain, c.residues)).collect();
    let het = hetero_codes(&atoms);
    Ok(ToolSuccess::new(format!(
        "fetched {file}: {} atoms, {} chain(s) ({}), {} residues total; heteroatom groups: {}",
        atoms.len(),
        chains.len(),
        chain_text.join(", "),
        chains.iter().map(|c| c.residues).sum::<usize>(),
        if het.is_empty() { "none".to_string() } else { het.join(", ") }
    ))
    .with_artifacts([file]))
}

fn prepare_structures(_: &Shared, args: &Arguments, ctx: &ToolContext<'_>) -> ToolResult {
    let file = args.str("pdb_file")?;
    let atoms = load_atoms(ctx, file)?;
    let requested = args.str_list("ligands");
    let mut artifacts = Vec::new();
    let mut notes = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    for code in &requested {
        if labels.contains(code) {
            continue;
        }
        let instances = extract_ligand(&atoms, code);
        if instances.is_empty() {
            let present = hetero_codes(&atoms);
            return Err(ToolFailure::precondition(format!(
                "ligand code '{code}' not found in {file} (heteroatom groups present: {})",
                if present.is_empty() { "none".to_string() } else { present.join(", ") }
            )));
        }
        for inst in instances {
            let out = format!("{}.pdb", inst.label);
            ctx.sandbox.write(&out, write_pdb(&inst.atoms, &format!("ligand {} from {file}", inst.code)))?;
            notes.push(format!("{} ({} atoms)", out, inst.atoms.len()));
            labels.push(inst.label);
            artifacts.push(out);
        }
    }
    let protein = clean_protein(&atoms);
    if protein.is_empty() {
        return Err(ToolFailure::precondition(format!("{file} contains no protein atoms")));
    }
    let capped = cap_termini(&protein);
    ctx.sandbox.write("protein_clean.pdb", write_pdb(&capped, &format!("cleaned and capped from {file}")))?;
    artifacts.insert(0, "protein_clean.pdb".to_string());
    let removed = atoms.len() - protein.len();
    let chains = chain_summary(&protein);
    let mut summary = format!(
        "protein_clean.pdb: {} chain(s), {} protein atoms, ACE/NME caps added, {removed} water/heteroatom/altloc records removed",
        chains.len(),
        protein.len()
    );
    if !notes.is_empty() {
        summary.push_str(&format!("; extracted ligands: {}", notes.join(", ")));
    }
    Ok(ToolSuccess::new(summary).with_artifacts(artifacts))
}

fn protonate_ligand(shared: &Shared, args: &Arguments, ctx: &ToolContext<'_>) -> ToolResult {
    let labels = args.str_list("ligands");
    if labels.is_empty() {
        return Err(ToolFailure::new(FailureKind::InvalidArguments, "no ligands given"));
    }
    let ph = args.opt_f64("ph").unwrap_or(7.0);
    let mut artifacts = Vec::new();
    let mut notes = Vec::new();
    for label in &labels {
        let input = format!("{label}.pdb");
        require(ctx, &[&input], &format!("protonate {label}"))?;
        let output = format!("{label}_h.pdb");
        shared.backend.protonate(ctx, &input, &output, ph)?;
        let atoms = load_atoms(ctx, &output)?;
        let h = atoms.iter().filter(|a| a.is_hydrogen()).count();
        notes.push(format!("{output} ({} atoms, {h} hydrogens)", atoms.len()));
        artifacts.push(output);
    }
    Ok(ToolSuccess::new(format!("protonated at pH {ph:.1}: {}", notes.join(", "))).with_artifacts(artifacts))
}

fn parameterize_ligand(shared: &Shared, args: &Arguments, ctx: &ToolContext<'_>) -> ToolResult {
    let label = args.str("ligand")?;
    let input = format!("{label}_h.pdb");
    require(ctx, &[&input], &format!("parameterize {label}"))?;
    let atoms = load_atoms(ctx, &input)?;
    let resname = atoms.first().map(|a| a.resname.clone()).unwrap_or_else(|| label.to_string());
    let charge = args.opt_i64("net_charge").unwrap_or(0);
    shared.backend.parameterize(ctx, &input, &resname, charge)?;
    require(ctx, &["ligand.mol2", "ligand.frcmod"], "use ligand parameters")?;
    let mol = Mol2::parse(&ctx.sandbox.read_string("ligand.mol2")?)
        .map_err(|e| ToolFailure::new(FailureKind::ProcessExit, format!("ligand.mol2: {e}")))?;
    Ok(ToolSuccess::new(format!(
        "ligand {resname} parameterized ({} / {}): {} atoms, net charge {:.3}, {} atom types",
        shared.forcefield.ligand_ff,
        shared.forcefield.charge_model,
        mol.atoms.len(),
        mol.net_charge(),
        mol.atom_types().len()
    ))
    .with_artifacts(["ligand.mol2", "ligand.frcmod"]))
}

fn merge_complex(_: &Shared, args: &Arguments, ctx: &ToolContext<'_>) -> ToolResult {
    let label = args.str("ligand")?;
    let ligand_file = format!("{label}_h.pdb");
    require(ctx, &["protein_clean.pdb", &ligand_file], "merge the complex")?;
    let mut atoms = load_atoms(ctx, "protein_clean.pdb")?;
    let protein_atoms = atoms.len();
    let ligand = load_atoms(ctx, &ligand_file)?;
    atoms.extend(ligand.iter().cloned().map(|mut a| {
        a.hetatm = true;
        a
    }));
    ctx.sandbox.write("complex.pdb", write_pdb(&atoms, &format!("protein_clean.pdb + {ligand_file}")))?;
    Ok(ToolSuccess::new(format!(
        "complex.pdb written: {protein_atoms} protein atoms + {} ligand atoms",
        ligand.len()
    ))
    .with_artifacts(["complex.pdb"]))
}

fn build_system(shared: &Shared, args: &Arguments, ctx: &ToolContext<'_>) -> ToolResult {
    let ligand = args.opt_str("ligand").filter(|l| !l.trim().is_empty());
    let structure = if ligand.is_some() { "complex.pdb" } else { "protein_clean.pdb" };
    let mut needed = vec![structure];
    if ligand.is_some() {
        needed.extend(["ligand.mol2", "ligand.frcmod"]);
    }
    require(ctx, &needed, "build the system")?;
    let atoms = load_atoms(ctx, structure)?;
    let protein: Vec<Atom> = atoms.iter().filter(|a| !a.hetatm).cloned().collect();
    let mut net_charge = protein_net_charge(&protein);
    let mut ligand_codes = Vec::new();
    let leap_ligand = match ligand {
        Some(_) => {
            let mol = Mol2::parse(&ctx.sandbox.read_string("ligand.mol2")?)
                .map_err(|e| ToolFailure::precondition(format!("ligand.mol2: {e}")))?;
            net_charge += mol.net_charge().round() as i64;
            let unit = mol.resname().unwrap_or("LIG").to_string();
            ligand_codes.push(unit.clone());
            Some((unit, "ligand.mol2".to_string(), "ligand.frcmod".to_string()))
        }
        None => None,
    };
    let padding = args.opt_f64("padding").unwrap_or(shared.padding);
    let input = LeapInput {
        structure: structure.to_string(),
        ligand: leap_ligand,
        padding_angstrom: padding,
        net_charge,
    };
    let script = render_script(&shared.forcefield, &input);
    ctx.sandbox.write("leap.in", &script)?;
    let log = shared.backend.tleap(ctx, &script)?;
    ctx.sandbox.write("leap.log", &log)?;
    if log.contains("FATAL") {
        return Err(ToolFailure::new(FailureKind::ProcessExit, format!("tleap reported a fatal error\n{log}")));
    }
    require(ctx, &[PRMTOP, INPCRD], "convert the system")?;
    shared.backend.convert(ctx)?;
    require(ctx, &["topol.top", "solv_ions.gro"], "finish the build")?;

    let gro = GroFile::parse(&ctx.sandbox.read_string("solv_ions.gro")?)
        .map_err(|e| ToolFailure::new(FailureKind::ProcessExit, format!("solv_ions.gro: {e}")))?;
    let chains = chain_summary(&protein);
    let classes = classify(&gro, &chains, &ligand_codes);
    let posre = posre_files(&gro, &classes, &chains);
    let mut artifacts: Vec<String> = vec![
        "leap.in".into(),
        "leap.log".into(),
        PRMTOP.into(),
        INPCRD.into(),
        "topol.top".into(),
        "solv_ions.gro".into(),
        "index.ndx".into(),
    ];
    if ctx.sandbox.exists(SOLVATED_PDB) {
        artifacts.insert(4, SOLVATED_PDB.into());
    }
    for (name, text) in &posre {
        ctx.sandbox.write(name, text)?;
        artifacts.push(name.clone());
    }
    let names: Vec<String> = posre.iter().map(|(n, _)| n.clone()).collect();
    let top = ctx.sandbox.read_string("topol.top")?;
    ctx.sandbox.write("topol.top", inject_posre_includes(&top, &names))?;
    ctx.sandbox.write("index.ndx", index_groups(&gro, &classes, ligand.is_some()))?;
    let (cations, anions) = super::leap::neutralizing_ions(net_charge);
    let waters = gro.atoms.iter().filter(|a| matches!(a.resname.as_str(), "WAT" | "SOL" | "HOH")).count() / 3;
    Ok(ToolSuccess::new(format!(
        "system built with {} + {}{} in {} ({padding:.1} A padding): {} atoms, {waters} waters; solute net charge {net_charge}, added {cations} {} and {anions} {}; box {:.3} x {:.3} x {:.3} nm; position restraints: {}",
        shared.forcefield.protein_ff,
        shared.forcefield.water_model,
        if ligand.is_some() { format!(" + {}", shared.forcefield.ligand_ff) } else { String::new() },
        structure,
        gro.atoms.len(),
        shared.forcefield.cation,
        shared.forcefield.anion,
        gro.box_nm[0],
        gro.box_nm[1],
        gro.box_nm[2],
        names.join(", ")
    ))
    .with_artifacts(artifacts))
}

fn stage_summary(stage: Stage, log: &str) -> String {
    match stage {
        Stage::Em => log
            .lines()
            .find(|l| l.contains("converged to Fmax"))
            .map(|l| format!("energy minimization: {}", l.trim()))
            .unwrap_or_else(|| "energy minimization finished (no convergence line in log)".to_string()),
        Stage::Prod => "production complete".to_string(),
        other => format!("{} complete", other.title()),
    }
}

fn run_md_stage(shared: &Shared, args: &Arguments, ctx: &ToolContext<'_>) -> ToolResult {
    let stage: Stage = args
        .str("stage")?
        .parse()
        .map_err(|e: String| ToolFailure::new(FailureKind::InvalidArguments, e))?;
    let precursors = stage.precursors();
    let refs: Vec<&str> = precursors.iter().map(String::as_str).collect();
    require(ctx, &refs, &format!("run {stage}"))?;
    let log = shared.backend.md_stage(ctx, stage)?;
    let outputs = stage.outputs();
    let refs: Vec<&str> = outputs.iter().map(String::as_str).collect();
    require(ctx, &refs, &format!("accept {stage} results"))?;
    let mut artifacts = outputs.clone();
    for extra in ["potential.xvg", &format!("{}.tpr", stage.deffnm()), &format!("{}.edr", stage.deffnm())] {
        if ctx.sandbox.exists(extra) && !artifacts.iter().any(|a| a == extra) {
            artifacts.push(extra.to_string());
        }
    }
    if stage == Stage::Prod && ctx.sandbox.exists("md.cpt") {
        artifacts.push("md.cpt".into());
    }
    Ok(ToolSuccess::new(stage_summary(stage, &log)).with_artifacts(artifacts))
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len().max(1) as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn run_analysis(shared: &Shared, args: &Arguments, ctx: &ToolContext<'_>) -> ToolResult {
    if !ctx.sandbox.nonempty("md.xtc") {
        return Err(ToolFailure::precondition("md.xtc not found"));
    }
    let requested = args.str_list("kinds");
    let kinds: Vec<AnalysisKind> = if requested.is_empty() {
        ANALYSIS_KINDS.to_vec()
    } else {
        requested
            .iter()
            .map(|k| k.parse().map_err(|e: String| ToolFailure::new(FailureKind::InvalidArguments, e)))
            .collect::<Result<_, _>>()?
    };
    let mut lines = Vec::new();
    let mut artifacts = Vec::new();
    for kind in kinds {
        shared.backend.analysis(ctx, kind)?;
        let out = kind.output();
        let curve = Curve::parse(&ctx.sandbox.read_string(&out)?)
            .map_err(|e| ToolFailure::new(FailureKind::ProcessExit, format!("{out}: {e}")))?;
        if curve.points.is_empty() {
            return Err(ToolFailure::new(FailureKind::ProcessExit, format!("{out} has no data rows")));
        }
        let (mean, sd) = mean_sd(&curve.ys());
        lines.push(format!("{out}: {} rows, mean {mean:.4} {} (sd {sd:.4})", curve.points.len(), kind.unit()));
        artifacts.push(out);
    }
    Ok(ToolSuccess::new(format!("analysis complete; {}", lines.join("; "))).with_artifacts(artifacts))
}

fn run_mmpbsa(shared: &Shared, args: &Arguments, ctx: &ToolContext<'_>) -> ToolResult {
    if !ctx.sandbox.nonempty("ligand.mol2") {
        return Err(ToolFailure::precondition("MM/PBSA requires a ligand"));
    }
    if !ctx.sandbox.nonempty("md.xtc") {
        return Err(ToolFailure::precondition("MM/PBSA requires a completed production run (md.xtc not found)"));
    }
    let temperature = args.opt_f64("temperature").unwrap_or_else(|| {
        ctx.sandbox
            .read_string(&Stage::Prod.mdp_file())
            .ok()
            .and_then(|m| mdp_temperature(&m))
            .unwrap_or(300.0)
    });
    shared.backend.mmpbsa(ctx, temperature)?;
    let text = ctx.sandbox.read_string(MMPBSA_RESULTS)?;
    let results = parse_results(&text).map_err(|e| ToolFailure::new(FailureKind::ProcessExit, e.to_string()))?;
    let energy = BindingEnergy::compute(results.components, temperature, args.opt_f64("delta_s"));
    let doc = serde_json::to_string_pretty(&json!({
        "binding_energy": energy,
        "reported_total": results.reported_total,
    }))
    .unwrap_or_default();
    ctx.sandbox.write("binding_energy.json", doc)?;
    Ok(ToolSuccess::new(energy.summary()).with_artifacts([MMPBSA_RESULTS, "binding_energy.json"]))
}

fn search_papers(shared: &Shared, args: &Arguments, _ctx: &ToolContext<'_>) -> ToolResult {
    let question = args.str("question")?;
    let lit = shared
        .literature
        .as_ref()
        .ok_or_else(|| ToolFailure::precondition("no literature corpus configured"))?;
    let answer = lit
        .answer(question)
        .map_err(|e| ToolFailure::new(FailureKind::Network, e.to_string()))?;
    Ok(ToolSuccess::new(answer.render()))
}

fn web_search(shared: &Shared, args: &Arguments, _ctx: &ToolContext<'_>) -> ToolResult {
    let query = args.str("query")?;
    let web = shared
        .web
        .as_ref()
        .ok_or_else(|| ToolFailure::precondition("web search disabled"))?;
    let snippets = web
        .search(query)
        .map_err(|e| ToolFailure::new(FailureKind::Network, e))?;
    if snippets.is_empty() {
        return Ok(ToolSuccess::new(format!("no results for '{query}'")));
    }
    let lines: Vec<String> = snippets
        .iter()
        .enumerate()
        .map(|(i, s)| format!("[{}] {} <{}>\n{}", i + 1, s.title, s.url, s.excerpt))
        .collect();
    Ok(ToolSuccess::new(format!("{} results:\n{}", snippets.len(), lines.join("\n"))))
}
