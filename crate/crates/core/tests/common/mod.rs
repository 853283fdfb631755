#![allow(dead_code)]

pub mod confine;
pub mod history;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::Value;

use mdagent_core::bench::{run_one, BenchOptions, BenchPolicy, RunResult, Suite, FIXTURE_DIR};
use mdagent_core::gateway::ScriptedPolicy;
use mdagent_core::md::MockBackend;

pub fn fixtures() -> PathBuf {
    PathBuf::from(FIXTURE_DIR)
}

pub fn scripted(name: &str) -> ScriptedPolicy {
    ScriptedPolicy::load(&fixtures().join(format!("policies/{name}.json"))).unwrap()
}

pub fn policy(name: &str) -> BenchPolicy {
    BenchPolicy::scripted(scripted(name))
}

pub fn suite() -> Suite {
    Suite::load(&fixtures().join("paper12.suite.json")).unwrap()
}

pub fn mock_options(workdir: &Path) -> BenchOptions {
    BenchOptions::new(workdir, Arc::new(MockBackend::new()))
}

/// Runs one suite system under a bundled policy in `workdir`.
pub fn bench_run(workdir: &Path, system: &str, policy_name: &str, rep: usize) -> RunResult {
    let suite = suite();
    run_one(&suite, suite.system(system).unwrap(), &policy(policy_name), rep, &mock_options(workdir))
}

/// Raw trace lines as JSON values, without going through the crate types.
pub fn raw_trace(run_dir: &Path) -> Vec<Value> {
    std::fs::read_to_string(run_dir.join("trace.log"))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

pub fn count_kind(trace: &[Value], kind: &str) -> usize {
    trace.iter().filter(|r| r["kind"] == kind).count()
}

pub fn transcript(run_dir: &Path) -> Vec<Value> {
    serde_json::from_str(&std::fs::read_to_string(run_dir.join("transcript.json")).unwrap()).unwrap()
}

/// Writes the step names, tools and files of the canonical workflow out
/// by hand so the oracle shares nothing with the crate tables.
pub fn oracle_step_files(structure: &str, ligands: &[&str]) -> Vec<(&'static str, Vec<String>)> {
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let mut steps = vec![("fetch", vec![structure.to_string()]), ("prep", s(&["protein_clean.pdb"]))];
    if !ligands.is_empty() {
        steps.push(("protonate", ligands.iter().map(|l| format!("{l}_h.pdb")).collect()));
        steps.push(("param_ligand", s(&["ligand.mol2", "ligand.frcmod"])));
        steps.push(("merge", s(&["complex.pdb"])));
    }
    steps.extend([
        ("build", s(&["topol.top", "solv_ions.gro"])),
        ("em", s(&["em.gro"])),
        ("nvt", s(&["nvt.gro"])),
        ("npt", s(&["npt.gro"])),
        ("prod", s(&["md.xtc"])),
        ("analysis", s(&["rmsd.xvg", "rmsf.xvg", "gyrate.xvg", "hbond.xvg", "analysis.txt"])),
    ]);
    steps
}

pub struct OracleMetrics {
    pub steps: Vec<(&'static str, bool)>,
    pub accuracy: f64,
    pub efficiency: f64,
    pub tool_calls: usize,
    pub completed: bool,
}

/// Brute-force re-derivation of a run's metrics from its directory.
pub fn oracle_metrics(run_dir: &Path, structure: &str, ligands: &[&str]) -> OracleMetrics {
    let steps: Vec<(&'static str, bool)> = oracle_step_files(structure, ligands)
        .into_iter()
        .map(|(name, files)| {
            let ok = files.iter().all(|f| {
                let p = run_dir.join(f);
                p.is_file() && std::fs::read(&p).map(|b| !b.is_empty()).unwrap_or(false)
            });
            (name, ok)
        })
        .collect();
    let passed = steps.iter().filter(|s| s.1).count();
    let tool_calls = count_kind(&raw_trace(run_dir), "tool_call");
    let minimum = if ligands.is_empty() { 8 } else { 11 };
    OracleMetrics {
        accuracy: passed as f64 / steps.len() as f64,
        efficiency: tool_calls as f64 / minimum as f64,
        completed: passed == steps.len(),
        tool_calls,
        steps,
    }
}

/// Structure file name and ligand labels for a suite entry, derived from
/// the suite document itself.
pub fn oracle_inputs(system_id: &str) -> (String, Vec<String>) {
    let doc: Value =
        serde_json::from_str(&std::fs::read_to_string(fixtures().join("paper12.suite.json")).unwrap()).unwrap();
    let entry = doc["systems"].as_array().unwrap().iter().find(|s| s["system_id"] == system_id).unwrap();
    let pdb = entry["pdb_id"].as_str().unwrap().to_uppercase();
    let ligands = entry["ligands"].as_array().map(|a| a.iter().map(|l| l.as_str().unwrap().to_string()).collect()).unwrap_or_default();
    (format!("{pdb}.pdb"), ligands)
}

/// Executes a suite system through the full run pipeline, returning the
/// exit report alongside the run directory.
pub fn run_system(
    workdir: &Path,
    system_id: &str,
    backend: &dyn mdagent_core::gateway::ChatBackend,
) -> mdagent_core::run::RunOutput {
    use mdagent_core::agent::WorkerOptions;
    use mdagent_core::md::{build_registry, ToolsetOptions};
    use mdagent_core::run::{execute_run, Agents};
    let suite = suite();
    let system = suite.system(system_id).unwrap();
    let mut toolset = ToolsetOptions::new(Arc::new(MockBackend::new()));
    toolset.faults = suite.fault_bundle(system).unwrap();
    let registry = build_registry(toolset).unwrap();
    let agents = Agents { worker: backend, registry: &registry, options: WorkerOptions::default(), planner: None, literature_lookup: false };
    execute_run(workdir, system_id, &system.request(), &agents).unwrap()
}

pub fn scripted_backend(name: &str) -> mdagent_core::gateway::ScriptedBackend {
    mdagent_core::gateway::ScriptedBackend::new(scripted(name))
}

/// Text of every message whose role is in `roles`.
pub fn messages_with_role<'a>(transcript: &'a [Value], roles: &[&str]) -> Vec<&'a str> {
    transcript
        .iter()
        .filter(|m| roles.iter().any(|r| m["role"] == *r))
        .map(|m| m["content"].as_str().unwrap_or(""))
        .collect()
}

/// Fifty questions built from words of the corpus documents and a few
/// generic phrasings.
pub fn corpus_questions() -> Vec<String> {
    let mut out = Vec::new();
    for dir_entry in std::fs::read_dir(fixtures().join("corpus")).unwrap() {
        let text = std::fs::read_to_string(dir_entry.unwrap().path()).unwrap();
        let words: Vec<&str> = text.split_whitespace().filter(|w| w.len() > 4).collect();
        for i in 0..8 {
            let a = words[(i * 7) % words.len()];
            let b = words[(i * 13 + 3) % words.len()];
            out.push(format!("What does the study report about {a} and {b}?"));
        }
    }
    out.extend(
        [
            "What temperature was used for the 3PTB simulation?",
            "Which force field was used for the ligand?",
            "How long was the production run?",
            "What water model was used?",
            "What thermostat controls temperature?",
            "How was the system neutralized?",
            "What time step was used?",
            "Which ions were added?",
            "What is the box padding?",
            "Does the ligand stay bound?",
        ]
        .map(String::from),
    );
    assert_eq!(out.len(), 50);
    out
}
