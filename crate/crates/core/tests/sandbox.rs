mod common;

use std::sync::Arc;

use proptest::prelude::*;
use serde_json::json;

use mdagent_core::gateway::ToolCallRequest;
use mdagent_core::md::{build_registry, MockBackend, ToolsetOptions};
use mdagent_core::run::init_sandbox;
use mdagent_core::agent::{PdbSource, Plan};
use mdagent_core::sandbox::{Actor, Sandbox};

use common::confine::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn hostile_paths_have_no_outside_effects(path in hostile_path()) {
        check_confinement(&path).map_err(TestCaseError::fail)?;
    }
}

#[test]
fn resolve_examples() {
    let a = arena();
    let root = a.sandbox.root();
    assert_eq!(a.sandbox.resolve("em.gro").unwrap(), root.join("em.gro"));
    assert!(a.sandbox.resolve("../../etc/passwd").unwrap_err().is_escape());
    assert!(a.sandbox.resolve("link/victim.txt").unwrap_err().is_escape());
    a.sandbox.write("sub/dir/topol.top", "x").unwrap();
    assert!(root.join("sub/dir/topol.top").is_file());
}

#[test]
fn file_tool_examples() {
    let a = arena();
    let run = |args: serde_json::Value| {
        a.registry.dispatch(&ToolCallRequest::new("x", "file_tool", args), &a.sandbox, Actor::Worker).unwrap()
    };
    let out = run(json!({"action": "edit", "path": "complex.pdb", "find_text": " CL1 ", "replace_text": " Cl1 "}));
    assert!(out.is_success() && out.summary.contains("1 replacement"), "{}", out.summary);
    let out = run(json!({"action": "read", "path": "missing.txt"}));
    assert!(!out.is_success() && out.summary.contains("file not found"), "{}", out.summary);
    let out = run(json!({"action": "write", "path": "trace.log", "content": ""}));
    assert!(!out.is_success());
}

#[test]
fn fresh_sandbox_lists_structure_and_mdp_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let pdb = dir.path().join("input.pdb");
    std::fs::write(&pdb, "ATOM      1  N   ALA A   1       0.000   0.000   0.000  1.00  0.00           N\nEND\n").unwrap();
    let sb = Sandbox::create(&dir.path().join("runs"), "r").unwrap();
    let mut plan = Plan::new(PdbSource::Local(pdb), sb.root(), vec![], 300.0, 1000.0).unwrap();
    init_sandbox(&sb, &mut plan).unwrap();
    let registry = build_registry(ToolsetOptions::new(Arc::new(MockBackend::new()))).unwrap();
    let out = registry
        .dispatch(&ToolCallRequest::new("l", "file_tool", json!({"action": "list"})), &sb, Actor::Worker)
        .unwrap();
    for f in ["input.pdb", "mdp/em.mdp", "mdp/nvt.mdp", "mdp/npt.mdp", "mdp/prod.mdp"] {
        assert!(out.summary.contains(f), "{f} not in {}", out.summary);
    }
}

#[test]
fn run_directories_never_collide() {
    let dir = tempfile::tempdir().unwrap();
    let _a = Sandbox::create(dir.path(), "same").unwrap();
    assert!(Sandbox::create(dir.path(), "same").is_err());
    assert!(Sandbox::create(dir.path(), "../escape").is_err());
}
