//! Prompt templates and the per-turn plan reinforcement message.

use super::plan::Plan;
use crate::gateway::{NEXT_STEP_PREFIX, PLAN_VARS_MARKER};
use crate::steps::StepName;

pub const PLANNER_PROMPT: &str = include_str!("../../prompts/planner.txt");
pub const WORKER_PROMPT: &str = include_str!("../../prompts/worker.txt");
pub const ANALYZER_PROMPT: &str = include_str!("../../prompts/analyzer.txt");

pub fn worker_system_prompt(plan: &Plan) -> String {
    let pdb_path = plan.run_dir.join(plan.structure_file());
    let body = WORKER_PROMPT
        .replace("{pdb_path}", &pdb_path.display().to_string())
        .replace("{sandbox_dir}", &plan.run_dir.display().to_string());
    let vars = serde_json::to_string_pretty(&plan.variables()).unwrap_or_default();
    format!(
        "{}\n\n{}\n{PLAN_VARS_MARKER}\n```json\n{vars}\n```\n",
        body.trim_end(),
        plan.render_text().trim_end()
    )
}

fn next_line(plan: &Plan) -> String {
    format!("{NEXT_STEP_PREFIX}{}", plan.next_step().map(StepName::as_str).unwrap_or("none"))
}

pub fn initial_user_message(plan: &Plan, request: &str) -> String {
    let request = request.trim();
    let mut out = String::new();
    if !request.is_empty() {
        out.push_str(request);
        out.push_str("\n\n");
    }
    out.push_str(&format!(
        "Execute the plan one step at a time using the tools. Structure file: {}.\n{}",
        plan.structure_file(),
        next_line(plan)
    ));
    out
}

fn names(steps: &[StepName]) -> String {
    if steps.is_empty() {
        "none".to_string()
    } else {
        steps.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
    }
}

/// Restates progress after a tool turn. `failed_labels` name the steps whose
/// call failed in this turn.
pub fn reinforcement(plan: &Plan, failed_labels: &[String]) -> String {
    let mut out = format!("Completed: {}. Remaining: {}.", names(&plan.completed()), names(&plan.remaining()));
    for label in failed_labels {
        out.push_str(&format!("\nstep '{label}' FAILED; see error above"));
    }
    out.push('\n');
    out.push_str(&next_line(plan));
    out
}
