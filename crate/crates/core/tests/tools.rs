use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use proptest::prelude::*;
use serde_json::json;

use mdagent_core::gateway::ToolCallRequest;
use mdagent_core::md::process::{self, ProcessSpec};
use mdagent_core::md::{build_registry, MockBackend, ToolsetOptions, TOOL_NAMES};
use mdagent_core::sandbox::{Actor, Sandbox};
use mdagent_core::tools::{
    Arguments, FailureKind, OutcomeStatus, RegistryError, ToolContext, ToolFailure, ToolRegistry, ToolResult,
    ToolSpec, ToolSuccess, DEFAULT_ERROR_CAP,
};

const ECHO_SPEC: &str = r#"{
    "name": "echo",
    "description": "Echo a message.",
    "parameters": {
        "message": {"type": "string", "description": "Text to echo.", "required": true},
        "times": {"type": "integer"}
    }
}"#;

fn echo_spec() -> ToolSpec {
    ToolSpec::from_json(ECHO_SPEC).unwrap()
}

fn sandbox() -> (tempfile::TempDir, Sandbox) {
    let dir = tempfile::tempdir().unwrap();
    let sb = Sandbox::create(dir.path(), "run").unwrap();
    (dir, sb)
}

fn echo(args: &Arguments, _: &ToolContext<'_>) -> ToolResult {
    Ok(ToolSuccess::new(args.str("message")?.to_string()))
}

#[test]
fn single_tool_registers_and_dispatches() {
    let mut reg = ToolRegistry::new();
    reg.register(echo_spec(), Arc::new(echo)).unwrap();
    assert_eq!(reg.names(), vec!["echo"]);
    let (_d, sb) = sandbox();
    let out = reg.dispatch(&ToolCallRequest::new("c1", "echo", json!({"message": "hi"})), &sb, Actor::Worker).unwrap();
    assert_eq!(out.status, OutcomeStatus::Success);
    assert_eq!(out.summary, "hi");
}

#[test]
fn duplicate_registration_is_rejected() {
    let mut reg = ToolRegistry::new();
    reg.register(echo_spec(), Arc::new(echo)).unwrap();
    let err = reg.register(echo_spec(), Arc::new(echo)).unwrap_err();
    assert_eq!(err, RegistryError::Duplicate("echo".into()));
    assert_eq!(reg.len(), 1);
}

#[test]
fn workflow_registry_has_all_tools_in_order() {
    let reg = build_registry(ToolsetOptions::new(Arc::new(MockBackend::new()))).unwrap();
    assert_eq!(reg.len(), 12);
    assert_eq!(reg.names(), TOOL_NAMES.to_vec());
    let mut names = reg.names();
    names.sort();
    names.dedup();
    assert_eq!(names.len(), 12);
    for expected in [
        "fetch_pdb",
        "prepare_structures",
        "protonate_ligand",
        "parameterize_ligand",
        "merge_complex",
        "build_system",
        "run_md_stage",
        "run_analysis",
        "run_mmpbsa",
        "file_tool",
    ] {
        assert!(reg.spec(expected).is_some(), "missing {expected}");
    }
}

#[test]
fn rendered_specs_are_byte_stable() {
    let a = build_registry(ToolsetOptions::new(Arc::new(MockBackend::new()))).unwrap();
    let b = build_registry(ToolsetOptions::new(Arc::new(MockBackend::new()))).unwrap();
    assert_eq!(a.render_specs_json(), a.render_specs_json());
    assert_eq!(a.render_specs_json(), b.render_specs_json());
    let wire = a.render_specs();
    assert_eq!(wire.len(), 12);
    assert_eq!(wire[0]["type"], "function");
}

#[test]
fn schema_gate_runs_before_handler() {
    let counter = Arc::new(AtomicUsize::new(0));
    let seen = counter.clone();
    let mut reg = ToolRegistry::new();
    reg.register(
        echo_spec(),
        Arc::new(move |_: &Arguments, _: &ToolContext<'_>| -> ToolResult {
            seen.fetch_add(1, Ordering::SeqCst);
            Ok(ToolSuccess::new("ran"))
        }),
    )
    .unwrap();
    let (_d, sb) = sandbox();
    let bad = [
        ToolCallRequest::new("a", "echo", json!({})),
        ToolCallRequest::new("b", "echo", json!({"message": 5})),
        ToolCallRequest::new("c", "echo", json!({"message": "x", "extra": 1})),
        ToolCallRequest::new("d", "echo", json!({"message": "x", "times": "two"})),
        ToolCallRequest { call_id: "e".into(), tool_name: "echo".into(), arguments: "{not json".into() },
        ToolCallRequest::new("f", "nope", json!({"message": "x"})),
    ];
    for call in &bad {
        let out = reg.dispatch(call, &sb, Actor::Worker).unwrap();
        assert_eq!(out.status, OutcomeStatus::Failure, "{:?}", call);
        assert!(matches!(out.failure_kind, Some(FailureKind::InvalidArguments | FailureKind::UnknownTool)));
    }
    assert_eq!(counter.load(Ordering::SeqCst), 0);
    let out = reg.dispatch(&ToolCallRequest::new("g", "echo", json!({"message": "x"})), &sb, Actor::Worker).unwrap();
    assert!(out.is_success());
    assert_eq!(counter.load(Ordering::SeqCst), 1);
}

#[test]
fn missing_argument_names_the_parameter() {
    let mut reg = ToolRegistry::new();
    reg.register(echo_spec(), Arc::new(echo)).unwrap();
    let (_d, sb) = sandbox();
    let out = reg.dispatch(&ToolCallRequest::new("a", "echo", json!({})), &sb, Actor::Worker).unwrap();
    assert!(out.summary.contains("message"), "{}", out.summary);
}

#[test]
fn long_errors_keep_their_tail() {
    let mut reg = ToolRegistry::new();
    let body = format!("{}FATAL: final line", "x".repeat(DEFAULT_ERROR_CAP * 2));
    reg.register(
        echo_spec(),
        Arc::new(move |_: &Arguments, _: &ToolContext<'_>| -> ToolResult {
            Err(ToolFailure::new(FailureKind::ProcessExit, body.clone()))
        }),
    )
    .unwrap();
    let (_d, sb) = sandbox();
    let out = reg.dispatch(&ToolCallRequest::new("a", "echo", json!({"message": "x"})), &sb, Actor::Worker).unwrap();
    assert!(out.summary.len() <= DEFAULT_ERROR_CAP + 64);
    assert!(out.summary.ends_with("FATAL: final line"));
}

#[derive(Debug, Clone)]
enum Breakage {
    Err(String),
    Panic(String),
    Process(String),
}

fn breakage() -> impl Strategy<Value = Breakage> {
    let msg = "[a-zA-Z0-9 _.:-]{1,40}".prop_map(|s| format!("E{s}"));
    prop_oneof![
        msg.clone().prop_map(Breakage::Err),
        msg.clone().prop_map(Breakage::Panic),
        "[a-zA-Z0-9_]{1,20}".prop_map(|s| Breakage::Process(format!("E{s}"))),
    ]
}

fn broken_handler(b: Breakage) -> impl Fn(&Arguments, &ToolContext<'_>) -> ToolResult + Send + Sync {
    move |_, ctx| match &b {
        Breakage::Err(m) => Err(ToolFailure::new(FailureKind::Precondition, m.clone())),
        Breakage::Panic(m) => panic!("{m}"),
        Breakage::Process(m) => {
            let script = format!("echo {m} >&2; exit 3");
            process::run(&ProcessSpec::new("sh", &["-c", &script]), ctx.sandbox.root(), Duration::from_secs(10))?;
            Ok(ToolSuccess::new("unreachable"))
        }
    }
}

fn message(b: &Breakage) -> &str {
    match b {
        Breakage::Err(m) | Breakage::Panic(m) | Breakage::Process(m) => m,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn every_handler_failure_is_captured(b in breakage()) {
        std::panic::set_hook(Box::new(|_| {}));
        let mut reg = ToolRegistry::new();
        reg.register(echo_spec(), Arc::new(broken_handler(b.clone()))).unwrap();
        let (_d, sb) = sandbox();
        let out = reg.dispatch(&ToolCallRequest::new("c", "echo", json!({"message": "x"})), &sb, Actor::Worker).unwrap();
        prop_assert_eq!(out.status, OutcomeStatus::Failure);
        prop_assert!(out.summary.contains(message(&b)), "{:?} -> {}", b, out.summary);
        let expected = match b {
            Breakage::Err(_) => FailureKind::Precondition,
            Breakage::Panic(_) => FailureKind::HandlerFault,
            Breakage::Process(_) => FailureKind::ProcessExit,
        };
        prop_assert_eq!(out.failure_kind, Some(expected));
        let trace = std::fs::read_to_string(sb.root().join("trace.log")).unwrap();
        prop_assert_eq!(trace.lines().count(), 2);
        prop_assert!(trace.contains("\"tool_outcome\""));
    }
}
