//! The bounded invoke, validate, reflect loop.

use std::collections::BTreeMap;
use std::time::Instant;

use serde_json::{json, Map, Value};

use super::analyzer::{analyze, Prose};
use super::conversation::{Conversation, SummaryOutcome, Summarizer, SUMMARY_THRESHOLD};
use super::plan::{Plan, PlanError, StepStatus};
use super::prompts::{initial_user_message, reinforcement, worker_system_prompt};
use super::report::{suggestions, ExitReport, FailedStep, Stability, StopReason};
use crate::gateway::{ChatBackend, GatewayError, Message};
use crate::sandbox::{Actor, Sandbox, SandboxError, TraceError, TraceKind};
use crate::steps::{step_for_tool, StepName};
use crate::tools::ToolRegistry;
use crate::MAX_ITERATIONS;

#[derive(Clone)]
pub struct WorkerOptions {
    pub max_iterations: usize,
    pub summary_threshold: usize,
    pub summarizer: Summarizer,
    pub prose: Prose,
}

impl Default for WorkerOptions {
    fn default() -> Self {
        Self {
            max_iterations: MAX_ITERATIONS,
            summary_threshold: SUMMARY_THRESHOLD,
            summarizer: Summarizer::Digest,
            prose: Prose::Template,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum WorkerError {
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Sandbox(#[from] SandboxError),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

#[derive(Debug)]
pub struct WorkerOutcome {
    pub report: ExitReport,
    pub plan: Plan,
    /// The gateway error that ended the run, if any.
    pub gateway_error: Option<GatewayError>,
}

pub struct Worker<'a> {
    backend: &'a dyn ChatBackend,
    registry: &'a ToolRegistry,
    options: WorkerOptions,
}

fn plan_payload(plan: &Plan, iteration: usize) -> Value {
    let statuses: Map<String, Value> = plan
        .steps
        .iter()
        .map(|s| (s.name.to_string(), serde_json::to_value(s.status).unwrap_or(Value::Null)))
        .collect();
    json!({
        "iteration": iteration,
        "steps": statuses,
        "next_step": plan.next_step().map(|s| s.as_str()),
    })
}

/// Records the plan as the planner produced it.
pub fn trace_initial_plan(sandbox: &Sandbox, plan: &Plan) -> Result<(), TraceError> {
    sandbox.append_trace(Actor::Planner, TraceKind::PlanUpdate, plan_payload(plan, 0))?;
    Ok(())
}

fn step_label(tool: &str, step: StepName) -> String {
    if tool == "run_md_stage" {
        format!("{tool} {step}")
    } else {
        tool.to_string()
    }
}

impl<'a> Worker<'a> {
    pub fn new(backend: &'a dyn ChatBackend, registry: &'a ToolRegistry, options: WorkerOptions) -> Self {
        Self { backend, registry, options }
    }

    pub fn execute(&self, mut plan: Plan, sandbox: &Sandbox, request: &str) -> Result<WorkerOutcome, WorkerError> {
        let started = Instant::now();
        let specs = self.registry.specs();
        let files = plan.step_files();
        let mut conversation = Conversation::with_threshold(
            worker_system_prompt(&plan),
            initial_user_message(&plan, request),
            self.options.summary_threshold,
        );
        let mut iterations = 0;
        let mut tool_calls = 0;
        let mut last_errors: BTreeMap<StepName, FailedStep> = BTreeMap::new();
        let mut analysis_summary = None;
        let mut gateway_error = None;

        let stop = loop {
            if plan.all_done() {
                break StopReason::AllStepsDone;
            }
            if iterations >= self.options.max_iterations {
                break StopReason::IterationCap;
            }
            if conversation.needs_summary() {
                let payload = match conversation.summarize(&self.options.summarizer) {
                    SummaryOutcome::Compacted { before, after } => json!({"status": "compacted", "before": before, "after": after}),
                    SummaryOutcome::Skipped(reason) => json!({"status": "skipped", "reason": reason}),
                };
                sandbox.append_trace(Actor::Worker, TraceKind::SummaryEvent, payload)?;
            }
            iterations += 1;
            let reply = match self.backend.complete(conversation.messages(), &specs) {
                Ok(reply) => reply,
                Err(e) => {
                    sandbox.append_trace(
                        Actor::Worker,
                        TraceKind::ModelTurn,
                        json!({"iteration": iterations, "error": e.to_string()}),
                    )?;
                    gateway_error = Some(e);
                    break StopReason::GatewayFailure;
                }
            };
            sandbox.append_trace(
                Actor::Worker,
                TraceKind::ModelTurn,
                json!({
                    "iteration": iterations,
                    "content": reply.content,
                    "tool_calls": reply.tool_calls.iter().map(|c| c.tool_name.as_str()).collect::<Vec<_>>(),
                    "citations": reply.citations.len(),
                }),
            )?;
            let calls = reply.tool_calls.clone();
            conversation.push(reply);
            if calls.is_empty() {
                break StopReason::TextOnlyTurn;
            }

            let mut failed_now = Vec::new();
            for call in &calls {
                tool_calls += 1;
                let args = call.parse_arguments().unwrap_or_default();
                let step = step_for_tool(&call.tool_name, &args)
                    .filter(|s| plan.status(*s).is_some_and(|st| st != StepStatus::Done));
                if let Some(s) = step {
                    plan.set_status(s, StepStatus::InProgress)?;
                }
                let outcome = self.registry.dispatch(call, sandbox, Actor::Worker)?;
                let mut text = outcome.to_model_text();
                let Some(s) = step else {
                    conversation.push(Message::tool(&call.call_id, text));
                    continue;
                };
                let mut error = (!outcome.is_success()).then(|| outcome.summary.clone());
                if error.is_none() && s == StepName::Analysis {
                    match analyze(sandbox, &self.options.prose) {
                        Ok(report) => {
                            text.push_str(&format!("\nanalysis.txt written: {}", report.headline()));
                            analysis_summary = Some(report.headline());
                        }
                        Err(e) => {
                            text.push_str(&format!("\nanalysis incomplete: {e}"));
                            error = Some(e.to_string());
                        }
                    }
                }
                if error.is_none() {
                    let missing: Vec<String> =
                        files.expected(s).into_iter().filter(|f| !sandbox.nonempty(f)).collect();
                    if !missing.is_empty() {
                        let msg = format!("step {s} did not produce: {}", missing.join(", "));
                        text.push_str(&format!("\n{msg}"));
                        error = Some(msg);
                    }
                }
                conversation.push(Message::tool(&call.call_id, text));
                match error {
                    None => {
                        plan.set_status(s, StepStatus::Done)?;
                        last_errors.remove(&s);
                    }
                    Some(e) => {
                        plan.set_status(s, StepStatus::Failed)?;
                        failed_now.push(step_label(&call.tool_name, s));
                        last_errors.insert(s, FailedStep::new(s, &call.tool_name, &e));
                    }
                }
            }
            conversation.push(Message::user(reinforcement(&plan, &failed_now)));
            sandbox.append_trace(Actor::Worker, TraceKind::PlanUpdate, plan_payload(&plan, iterations))?;
        };

        let failed_steps: Vec<FailedStep> =
            plan.failed().into_iter().filter_map(|s| last_errors.get(&s).cloned()).collect();
        let report = ExitReport {
            run_id: sandbox.run_id().to_string(),
            run_dir: sandbox.root().to_path_buf(),
            system: plan.pdb_source.label(),
            stop_reason: stop,
            completed_steps: plan.completed(),
            suggestions: suggestions(&failed_steps, stop, iterations),
            failed_steps,
            remaining_steps: plan.remaining(),
            stability: Stability::from_sandbox(sandbox),
            analysis_summary,
            offer_mmpbsa: plan.status(StepName::Prod) == Some(StepStatus::Done) && plan.has_ligand(),
            iterations_used: iterations,
            tool_calls,
            elapsed_secs: started.elapsed().as_secs_f64(),
            gateway_error: gateway_error.as_ref().map(|e: &GatewayError| e.to_string()),
        };
        sandbox.write(super::PLAN_FILE, plan.to_json())?;
        sandbox.write(
            super::TRANSCRIPT_FILE,
            serde_json::to_string_pretty(conversation.transcript()).unwrap_or_default(),
        )?;
        report.write(sandbox)?;
        sandbox.append_trace(
            Actor::Worker,
            TraceKind::Exit,
            json!({
                "stop_reason": stop,
                "iterations": iterations,
                "tool_calls": tool_calls,
                "completed": plan.completed(),
                "failed": plan.failed(),
                "summaries": conversation.summaries(),
            }),
        )?;
        Ok(WorkerOutcome { report, plan, gateway_error })
    }
}
