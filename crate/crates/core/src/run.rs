//! One end-to-end run: sandbox, plan, inputs, worker, exit report.

use std::path::{Path, PathBuf};

use crate::agent::{
    request_source, ExitReport, PdbSource, Plan, PlanError, PlanRequest, Planner, PlannerError, StepStatus, Worker,
    WorkerError, WorkerOptions, PLAN_FILE,
};
use crate::gateway::{ChatBackend, GatewayError};
use crate::md::mdp::MdpError;
use crate::md::{MdpParams, STAGES};
use crate::sandbox::{Sandbox, SandboxError};
use crate::steps::StepName;
use crate::tools::ToolRegistry;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Sandbox(#[from] SandboxError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Worker(#[from] WorkerError),
    #[error(transparent)]
    Mdp(#[from] MdpError),
    #[error("cannot read structure {path}: {source}")]
    Structure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    /// Errors caused by the request itself rather than by the run.
    pub fn is_bad_request(&self) -> bool {
        matches!(
            self,
            RunError::Planner(PlannerError::NoStructure(_) | PlannerError::MissingFile(_) | PlannerError::Plan(_))
                | RunError::Plan(_)
        )
    }
}

/// Writes the stage parameter files for the plan into `mdp/`.
pub fn write_mdp_inputs(sandbox: &Sandbox, plan: &Plan) -> Result<Vec<String>, RunError> {
    let mut written = Vec::new();
    for stage in STAGES {
        let text = MdpParams::for_stage(stage, plan.temperature, plan.production_ps, plan.has_ligand()).render()?;
        sandbox.write(&stage.mdp_file(), text)?;
        written.push(stage.mdp_file());
    }
    Ok(written)
}

/// Seeds the run directory. A local structure is copied in and its fetch
/// step counts as done.
pub fn init_sandbox(sandbox: &Sandbox, plan: &mut Plan) -> Result<(), RunError> {
    write_mdp_inputs(sandbox, plan)?;
    if let PdbSource::Local(path) = &plan.pdb_source {
        let bytes = std::fs::read(path).map_err(|source| RunError::Structure { path: path.clone(), source })?;
        sandbox.write(&plan.structure_file(), bytes)?;
        plan.set_status(StepName::Fetch, StepStatus::InProgress)?;
        plan.set_status(StepName::Fetch, StepStatus::Done)?;
    }
    sandbox.write(PLAN_FILE, plan.to_json())?;
    Ok(())
}

/// What drives a run.
pub struct Agents<'a> {
    pub worker: &'a dyn ChatBackend,
    pub registry: &'a ToolRegistry,
    pub options: WorkerOptions,
    /// Model consulted by the planner for fields the request omits.
    pub planner: Option<&'a dyn ChatBackend>,
    /// Look up a missing temperature with `search_papers`.
    pub literature_lookup: bool,
}

#[derive(Debug)]
pub struct RunOutput {
    pub run_dir: PathBuf,
    pub report: ExitReport,
    pub plan: Plan,
    pub gateway_error: Option<GatewayError>,
}

impl RunOutput {
    pub fn script_exhausted(&self) -> bool {
        matches!(self.gateway_error, Some(GatewayError::ScriptExhausted { .. }))
    }
}

pub fn execute_run(workdir: &Path, run_id: &str, request: &PlanRequest, agents: &Agents<'_>) -> Result<RunOutput, RunError> {
    if let Some(Err(e)) = request_source(request) {
        return Err(e.into());
    }
    let sandbox = Sandbox::create(workdir, run_id)?;
    let planner = Planner { backend: agents.planner, registry: agents.literature_lookup.then_some(agents.registry) };
    let mut plan = planner.make_plan(request, &sandbox)?;
    init_sandbox(&sandbox, &mut plan)?;
    let worker = Worker::new(agents.worker, agents.registry, agents.options.clone());
    let outcome = worker.execute(plan, &sandbox, &request.describe())?;
    Ok(RunOutput {
        run_dir: sandbox.root().to_path_buf(),
        report: outcome.report,
        plan: outcome.plan,
        gateway_error: outcome.gateway_error,
    })
}
