//! Runs system x policy x repetition grids, optionally in parallel.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use super::evaluate::{evaluate_run, RunResult};
use super::report::BenchReport;
use super::systems::{BenchmarkSystem, Suite};
use crate::agent::WorkerOptions;
use crate::gateway::{ChatBackend, ScriptedBackend, ScriptedPolicy};
use crate::md::{build_registry, MdBackend, ToolsetOptions};
use crate::run::{execute_run, Agents};

/// Where a policy's model turns come from.
#[derive(Clone)]
pub enum PolicySource {
    /// A fresh scripted backend per run, so repetitions are independent.
    Scripted(ScriptedPolicy),
    Live(Arc<dyn ChatBackend>),
}

#[derive(Clone)]
pub struct BenchPolicy {
    pub policy_id: String,
    pub source: PolicySource,
}

impl BenchPolicy {
    pub fn scripted(policy: ScriptedPolicy) -> Self {
        Self { policy_id: policy.policy_id.clone(), source: PolicySource::Scripted(policy) }
    }

    fn backend(&self) -> Arc<dyn ChatBackend> {
        match &self.source {
            PolicySource::Scripted(p) => Arc::new(ScriptedBackend::new(p.clone())),
            PolicySource::Live(b) => b.clone(),
        }
    }
}

#[derive(Clone)]
pub struct BenchOptions {
    pub repetitions: usize,
    /// Concurrent runs; 1 runs sequentially.
    pub parallelism: usize,
    pub workdir: PathBuf,
    pub md_backend: Arc<dyn MdBackend>,
    pub worker: WorkerOptions,
}

impl BenchOptions {
    pub fn new(workdir: &Path, md_backend: Arc<dyn MdBackend>) -> Self {
        Self {
            repetitions: 3,
            parallelism: 1,
            workdir: workdir.to_path_buf(),
            md_backend,
            worker: WorkerOptions::default(),
        }
    }
}

pub fn run_id(system: &BenchmarkSystem, policy_id: &str, repetition: usize) -> String {
    format!("{}-{}-r{}", system.system_id, policy_id, repetition)
}

/// Executes and evaluates one run. Failures become results.
pub fn run_one(
    suite: &Suite,
    system: &BenchmarkSystem,
    policy: &BenchPolicy,
    repetition: usize,
    options: &BenchOptions,
) -> RunResult {
    let id = run_id(system, &policy.policy_id, repetition);
    let fail = |e: String| RunResult::failed(system, &policy.policy_id, repetition, &id, e);
    let faults = match suite.fault_bundle(system) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    let mut toolset = ToolsetOptions::new(options.md_backend.clone());
    toolset.faults = faults;
    let registry = match build_registry(toolset) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    let backend = policy.backend();
    let agents = Agents {
        worker: backend.as_ref(),
        registry: &registry,
        options: options.worker.clone(),
        planner: None,
        literature_lookup: false,
    };
    match execute_run(&options.workdir, &id, &system.request(), &agents) {
        Ok(out) => match evaluate_run(&out.run_dir, system, &policy.policy_id, repetition) {
            Ok(mut result) => {
                result.error = out.gateway_error.map(|e| e.to_string());
                result
            }
            Err(e) => fail(e.to_string()),
        },
        Err(e) => fail(e.to_string()),
    }
}

/// Runs every (system, policy, repetition) in a fresh sandbox and
/// aggregates the results.
pub fn run_benchmark(suite: &Suite, policies: &[BenchPolicy], options: &BenchOptions) -> BenchReport {
    let mut jobs = Vec::new();
    for system in &suite.systems {
        for policy in policies {
            for rep in 0..options.repetitions {
                jobs.push((system, policy, rep));
            }
        }
    }
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(jobs.len()));
    let threads = options.parallelism.clamp(1, jobs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(system, policy, rep)) = jobs.get(i) else {
                    break;
                };
                let result = run_one(suite, system, policy, rep, options);
                results.lock().unwrap_or_else(|e| e.into_inner()).push((i, result));
            });
        }
    });
    let mut results = results.into_inner().unwrap_or_else(|e| e.into_inner());
    results.sort_by_key(|(i, _)| *i);
    let policy_ids: Vec<String> = policies.iter().map(|p| p.policy_id.clone()).collect();
    BenchReport::aggregate(suite, &policy_ids, results.into_iter().map(|(_, r)| r).collect())
}
