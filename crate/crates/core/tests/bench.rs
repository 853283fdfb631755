mod common;

use std::collections::HashSet;
use std::path::Path;

use mdagent_core::bench::{evaluate_run, run_benchmark, BenchReport, EvalError, RunResult, StepResult, Suite};
use mdagent_core::steps::StepName;

use common::*;

const TWO_SYSTEMS: &str = r#"{
  "suite_id": "pair",
  "systems": [
    {"system_id": "1AKI", "pdb_id": "1AKI", "ligands": [], "category": "protein"},
    {"system_id": "3HTB_JZ4", "pdb_id": "3HTB", "ligands": ["JZ4"], "category": "protein_ligand"}
  ]
}"#;

fn fake_run(dir: &Path, files: &[&str]) {
    std::fs::create_dir_all(dir).unwrap();
    for f in files {
        std::fs::write(dir.join(f), "x").unwrap();
    }
    std::fs::write(dir.join("trace.log"), "").unwrap();
    let report = serde_json::json!({
        "run_id": "fake", "run_dir": dir, "system": "X", "stop_reason": "all_steps_done",
        "completed_steps": [], "failed_steps": [], "remaining_steps": [], "suggestions": [],
        "stability": {}, "analysis_summary": null, "offer_mmpbsa": false,
        "iterations_used": 0, "tool_calls": 0, "elapsed_secs": 0.0
    });
    std::fs::write(dir.join("exit_report.json"), report.to_string()).unwrap();
}

const ALL_LIGAND_FILES: [&str; 18] = [
    "3HTB.pdb", "protein_clean.pdb", "JZ4_h.pdb", "ligand.mol2", "ligand.frcmod", "complex.pdb", "topol.top",
    "solv_ions.gro", "em.gro", "nvt.gro", "npt.gro", "md.xtc", "rmsd.xvg", "rmsf.xvg", "gyrate.xvg", "hbond.xvg",
    "analysis.txt", "extra.txt",
];

#[test]
fn all_protein_files_give_full_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("r");
    fake_run(
        &run,
        &["1AKI.pdb", "protein_clean.pdb", "topol.top", "solv_ions.gro", "em.gro", "nvt.gro", "npt.gro", "md.xtc",
          "rmsd.xvg", "rmsf.xvg", "gyrate.xvg", "hbond.xvg", "analysis.txt"],
    );
    let suite = suite();
    let r = evaluate_run(&run, suite.system("1AKI").unwrap(), "p", 0).unwrap();
    assert_eq!(r.step_success.len(), 8);
    assert_eq!(r.accuracy(), 1.0);
    assert!(r.completed);
}

#[test]
fn missing_prod_and_analysis_is_nine_of_eleven() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("r");
    let files: Vec<&str> = ALL_LIGAND_FILES
        .iter()
        .copied()
        .filter(|f| !matches!(*f, "md.xtc" | "rmsd.xvg" | "analysis.txt"))
        .collect();
    fake_run(&run, &files);
    let suite = suite();
    let r = evaluate_run(&run, suite.system("3HTB_JZ4").unwrap(), "p", 0).unwrap();
    assert_eq!(r.step_success.iter().filter(|s| s.success).count(), 9);
    assert!((r.accuracy() - 9.0 / 11.0).abs() < 1e-12);
    assert_eq!(format!("{:.3}", r.accuracy()), "0.818");
    assert!(!r.completed);
}

#[test]
fn empty_file_fails_its_step() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("r");
    fake_run(&run, &ALL_LIGAND_FILES);
    std::fs::write(run.join("em.gro"), "").unwrap();
    let suite = suite();
    let r = evaluate_run(&run, suite.system("3HTB_JZ4").unwrap(), "p", 0).unwrap();
    let em = r.step_success.iter().find(|s| s.step == StepName::Em).unwrap();
    assert!(!em.success);
    assert!(!r.completed);
}

#[test]
fn missing_trace_is_a_distinct_error() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("r");
    fake_run(&run, &ALL_LIGAND_FILES);
    std::fs::remove_file(run.join("trace.log")).unwrap();
    let suite = suite();
    let err = evaluate_run(&run, suite.system("3HTB_JZ4").unwrap(), "p", 0).unwrap_err();
    assert!(matches!(err, EvalError::MissingTrace(_)));
    std::fs::write(run.join("trace.log"), "").unwrap();
    std::fs::remove_file(run.join("exit_report.json")).unwrap();
    let err = evaluate_run(&run, suite.system("3HTB_JZ4").unwrap(), "p", 0).unwrap_err();
    assert!(matches!(err, EvalError::MissingExitReport(_)));
}

#[test]
fn happy_policy_on_two_systems_three_reps() {
    let dir = tempfile::tempdir().unwrap();
    let suite = Suite::from_json(TWO_SYSTEMS, &fixtures()).unwrap();
    let report = run_benchmark(&suite, &[policy("happy")], &mock_options(dir.path()));
    assert_eq!(report.runs.len(), 6);
    for id in ["1AKI", "3HTB_JZ4"] {
        let row = report.row(id, "happy").unwrap();
        assert_eq!(row.repetitions, 3);
        assert_eq!(row.accuracy, 1.0);
        assert_eq!(row.efficiency, Some(1.0));
        assert_eq!(row.completed, 3);
    }
    let csv = report.to_csv();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().starts_with("1AKI,protein,happy,3,1.000,1.000,3,8.00,8"));
}

#[test]
fn recovery_policy_on_atom_name_fault() {
    let dir = tempfile::tempdir().unwrap();
    let r = bench_run(dir.path(), "BRD4_UNL", "recovery", 0);
    assert_eq!(r.accuracy(), 1.0);
    assert_eq!(r.tool_calls, 13);
    assert_eq!(r.min_tool_calls, 11);
    assert_eq!(r.efficiency(), 13.0 / 11.0);
}

#[test]
fn two_ligand_system_never_completes() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["happy", "recovery", "looping"] {
        let r = bench_run(dir.path(), "5KB6_ADN", name, 0);
        assert!(!r.completed, "{name}");
        let downstream = [StepName::Build, StepName::Em, StepName::Nvt, StepName::Npt, StepName::Prod, StepName::Analysis];
        for s in &r.step_success {
            if downstream.contains(&s.step) {
                assert!(!s.success, "{name}: {} should fail", s.step);
            }
        }
    }
}

#[test]
fn harness_metrics_match_oracle_on_full_suite() {
    let dir = tempfile::tempdir().unwrap();
    let suite = suite();
    let policies = [policy("happy"), policy("recovery")];
    let mut options = mock_options(dir.path());
    options.parallelism = 8;
    let report = run_benchmark(&suite, &policies, &options);
    assert_eq!(report.runs.len(), 12 * 2 * 3);
    let mut mismatches = Vec::new();
    for run in &report.runs {
        let (structure, ligands) = oracle_inputs(&run.system_id);
        let ligands: Vec<&str> = ligands.iter().map(String::as_str).collect();
        let o = oracle_metrics(&dir.path().join(&run.run_id), &structure, &ligands);
        let steps: Vec<(String, bool)> = run.step_success.iter().map(|s| (s.step.to_string(), s.success)).collect();
        let oracle_steps: Vec<(String, bool)> = o.steps.iter().map(|(n, b)| (n.to_string(), *b)).collect();
        if run.accuracy() != o.accuracy
            || run.efficiency() != o.efficiency
            || run.completed != o.completed
            || steps != oracle_steps
        {
            mismatches.push(run.run_id.clone());
        }
    }
    assert!(mismatches.is_empty(), "{mismatches:?}");
    for row in &report.rows {
        let reps: Vec<&RunResult> =
            report.runs.iter().filter(|r| r.system_id == row.system_id && r.policy_id == row.policy_id).collect();
        let acc = reps.iter().map(|r| r.accuracy()).sum::<f64>() / reps.len() as f64;
        assert!((row.accuracy - acc).abs() < 1e-12);
    }
}

#[test]
fn csv_rows_and_byte_identical_regeneration() {
    let dir = tempfile::tempdir().unwrap();
    let suite = Suite::from_json(TWO_SYSTEMS, &fixtures()).unwrap();
    let mut options = mock_options(dir.path());
    options.repetitions = 1;
    let report = run_benchmark(&suite, &[policy("happy")], &options);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let (csv_a, json_a) = report.emit(&out_a).unwrap();
    let reloaded = BenchReport::from_json(&std::fs::read_to_string(&json_a).unwrap()).unwrap();
    let (csv_b, json_b) = reloaded.emit(&out_b).unwrap();
    assert_eq!(std::fs::read(csv_a).unwrap(), std::fs::read(csv_b).unwrap());
    assert_eq!(std::fs::read(json_a).unwrap(), std::fs::read(json_b).unwrap());
    assert_eq!(report.to_csv().lines().count(), 3);
}

#[test]
fn stepwise_document_matches_failed_run() {
    let dir = tempfile::tempdir().unwrap();
    let suite = suite().only(&["5KB6_ADN".to_string()]).unwrap();
    let mut options = mock_options(dir.path());
    options.repetitions = 1;
    let report = run_benchmark(&suite, &[policy("happy")], &options);
    let doc: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    let run = &report.runs[0];
    let listed = doc["runs"][0]["step_success"].as_array().unwrap();
    assert_eq!(listed.len(), run.step_success.len());
    for (v, s) in listed.iter().zip(&run.step_success) {
        assert_eq!(v["step"], s.step.as_str());
        assert_eq!(v["success"], s.success);
    }
    let restored: Vec<StepResult> = serde_json::from_value(doc["runs"][0]["step_success"].clone()).unwrap();
    assert_eq!(restored, run.step_success);
}

#[test]
fn hundred_parallel_runs_do_not_collide() {
    let dir = tempfile::tempdir().unwrap();
    let suite = Suite::from_json(TWO_SYSTEMS, &fixtures()).unwrap();
    let mut options = mock_options(dir.path());
    options.repetitions = 50;
    options.parallelism = 16;
    let report = run_benchmark(&suite, &[policy("happy")], &options);
    assert_eq!(report.runs.len(), 100);
    let ids: HashSet<&str> = report.runs.iter().map(|r| r.run_id.as_str()).collect();
    assert_eq!(ids.len(), 100);
    assert!(report.runs.iter().all(|r| r.completed && r.error.is_none()), "{:?}", report.runs.iter().find(|r| !r.completed));
    for run in &report.runs {
        let trace = raw_trace(&dir.path().join(&run.run_id));
        let seqs: Vec<u64> = trace.iter().map(|r| r["seq"].as_u64().unwrap()).collect();
        assert_eq!(seqs, (0..seqs.len() as u64).collect::<Vec<_>>());
    }
}

#[test]
fn replayed_run_is_identical_apart_from_timing() {
    let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let a = bench_run(da.path(), "3HTB_JZ4", "happy", 0);
    let b = bench_run(db.path(), "3HTB_JZ4", "happy", 0);
    assert_eq!(a.step_success, b.step_success);
    assert_eq!(a.tool_calls, b.tool_calls);
    let strip = |v: Vec<serde_json::Value>| -> Vec<serde_json::Value> {
        v.into_iter()
            .map(|mut r| {
                r.as_object_mut().unwrap().remove("timestamp");
                if let Some(p) = r["payload"].as_object_mut() {
                    p.remove("duration_secs");
                    p.remove("elapsed_secs");
                }
                r
            })
            .collect()
    };
    let (ra, rb) = (da.path().join(&a.run_id), db.path().join(&b.run_id));
    let norm = |v: Vec<serde_json::Value>, root: &Path| {
        serde_json::to_string(&v).unwrap().replace(root.to_str().unwrap(), "<root>")
    };
    assert_eq!(norm(strip(raw_trace(&ra)), da.path()), norm(strip(raw_trace(&rb)), db.path()));
    assert_eq!(norm(transcript(&ra), da.path()), norm(transcript(&rb), db.path()));
    for f in ["md.xtc", "rmsd.xvg", "topol.top", "analysis.txt"] {
        assert_eq!(std::fs::read(ra.join(f)).unwrap(), std::fs::read(rb.join(f)).unwrap(), "{f}");
    }
}
