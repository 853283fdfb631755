//! `mdagent` command line: single runs, benchmark grids, report
//! regeneration and the post-run MM/PBSA step.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};

use mdagent_core::agent::{ExitReport, PlanRequest, Prose, Summarizer, WorkerOptions};
use mdagent_core::bench::{run_benchmark, BenchOptions, BenchPolicy, BenchReport, PolicySource, Suite, FIXTURE_DIR};
use mdagent_core::config::Config;
use mdagent_core::gateway::{ChatBackend, HttpBackend, ScriptedBackend, ScriptedPolicy, ToolCallRequest};
use mdagent_core::md::{build_registry, FaultBundle, MdBackend, MockBackend, RealBackend, ToolsetOptions};
use mdagent_core::retrieval::{CorpusIndex, GatewayWebSearch, Literature, Synthesizer, WebSearch};
use mdagent_core::run::{execute_run, Agents};
use mdagent_core::sandbox::{Actor, Sandbox};

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_SCRIPT_EXHAUSTED: u8 = 3;

#[derive(Parser)]
#[command(name = "mdagent", version, about = "Agentic molecular-dynamics workflows")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    Mock,
    Real,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one agentic run.
    Run(RunArgs),
    /// Run a benchmark suite against one or more policies.
    Bench(BenchArgs),
    /// Print a run's exit report or regenerate benchmark report files.
    Report(ReportArgs),
    /// Estimate the binding free energy of a finished protein-ligand run.
    Mmpbsa(MmpbsaArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Four-character PDB identifier or a local .pdb file.
    #[arg(long)]
    pdb: Option<String>,
    /// Ligand residue code; repeat for several ligands.
    #[arg(long = "ligand")]
    ligands: Vec<String>,
    /// Simulation temperature in K.
    #[arg(long)]
    temp: Option<f64>,
    /// Production length in ps.
    #[arg(long)]
    duration: Option<f64>,
    /// Free-text request, parsed for any field not given as a flag.
    #[arg(long)]
    request: Option<String>,
    #[arg(long, value_enum, default_value = "mock")]
    backend: BackendKind,
    /// Override the configured model id.
    #[arg(long)]
    model: Option<String>,
    /// Scripted policy file (or built-in name such as `happy`) instead of a live model.
    #[arg(long)]
    policy: Option<String>,
    #[arg(long)]
    workdir: Option<PathBuf>,
    #[arg(long)]
    run_id: Option<String>,
    /// Directory of markdown/text documents for `search_papers`.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Fault bundle to inject into the tools.
    #[arg(long)]
    faults: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BenchArgs {
    /// Suite file (or built-in name such as `paper12`).
    #[arg(long)]
    suite: String,
    /// Policy file or built-in name; repeat to compare policies.
    #[arg(long = "policy", required = true)]
    policies: Vec<String>,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long)]
    workdir: Option<PathBuf>,
    /// Concurrent runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Restrict to these system ids (comma separated).
    #[arg(long, value_delimiter = ',')]
    systems: Vec<String>,
    /// Directory for bench.csv and bench_steps.json; defaults to the workdir.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "mock")]
    backend: BackendKind,
}

#[derive(clap::Args)]
struct ReportArgs {
    /// Run directory whose exit report should be printed.
    #[arg(long, conflicts_with = "bench", required_unless_present = "bench")]
    run: Option<PathBuf>,
    /// bench_steps.json to regenerate the CSV and JSON from.
    #[arg(long, requires = "out")]
    bench: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct MmpbsaArgs {
    #[arg(long)]
    run: PathBuf,
    /// Temperature in K; defaults to the production temperature.
    #[arg(long)]
    temp: Option<f64>,
    /// -TΔS entropy term in kcal/mol, when an estimate is available.
    #[arg(long)]
    delta_s: Option<f64>,
    #[arg(long, value_enum, default_value = "mock")]
    backend: BackendKind,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn failed(message: impl Into<String>) -> Self {
        Self { code: EXIT_FAILED, message: message.into() }
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = load_config(cli.config.as_deref()).and_then(|config| match cli.command {
        Command::Run(args) => cmd_run(&config, args),
        Command::Bench(args) => cmd_bench(&config, args),
        Command::Report(args) => cmd_report(args),
        Command::Mmpbsa(args) => cmd_mmpbsa(&config, args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    let config = match path {
        Some(p) => Config::load(p).map_err(|e| Failure::usage(e.to_string()))?,
        None => Config::default(),
    };
    config.validate().map_err(Failure::usage)?;
    Ok(config)
}

/// Resolves a fixture argument: an existing path, the path with `.json`
/// appended, or a file shipped under the crate fixtures.
fn resolve_fixture(arg: &str, subdir: &str, suffix: &str) -> Result<PathBuf, Failure> {
    let direct = PathBuf::from(arg);
    let stem = arg.strip_suffix(".json").unwrap_or(arg);
    let stem = stem.strip_suffix(".fixture").unwrap_or(stem);
    let candidates = [
        direct.clone(),
        PathBuf::from(format!("{arg}.json")),
        Path::new(FIXTURE_DIR).join(subdir).join(format!("{stem}.json")),
        Path::new(FIXTURE_DIR).join(subdir).join(format!("{stem}{suffix}.json")),
    ];
    candidates
        .into_iter()
        .find(|p| p.is_file())
        .ok_or_else(|| Failure::usage(format!("no such file: {}", direct.display())))
}

fn load_policy(arg: &str) -> Result<ScriptedPolicy, Failure> {
    let path = resolve_fixture(arg, "policies", "")?;
    ScriptedPolicy::load(&path).map_err(Failure::usage)
}

fn md_backend(config: &Config, kind: BackendKind) -> Result<Arc<dyn MdBackend>, Failure> {
    match kind {
        BackendKind::Mock => Ok(Arc::new(MockBackend::new())),
        BackendKind::Real => RealBackend::new(config.executables.clone())
            .map(|b| Arc::new(b) as Arc<dyn MdBackend>)
            .map_err(|e| Failure::usage(format!("real backend preflight failed: {e}"))),
    }
}

fn live_backend(config: &Config, model: Option<&str>) -> Result<Arc<HttpBackend>, Failure> {
    let mut model_config = config.model.clone();
    if let Some(id) = model {
        model_config.model_id = id.to_string();
    }
    HttpBackend::from_env(model_config).map(Arc::new).map_err(|e| Failure::usage(e.to_string()))
}

fn toolset(config: &Config, backend: Arc<dyn MdBackend>) -> ToolsetOptions {
    let mut options = ToolsetOptions::new(backend);
    options.forcefield = config.forcefield.clone();
    options.padding_angstrom = config.run.padding_angstrom;
    options.timeout = std::time::Duration::from_secs(config.run.tool_timeout_secs);
    options
}

fn worker_options(config: &Config) -> WorkerOptions {
    WorkerOptions {
        max_iterations: config.run.max_iterations,
        summary_threshold: config.run.summary_threshold,
        ..WorkerOptions::default()
    }
}

fn cmd_run(config: &Config, args: RunArgs) -> CliResult {
    let mut request = PlanRequest::from_text(args.request.clone().unwrap_or_default());
    request.pdb = args.pdb.clone();
    request.ligands = args.ligands.clone();
    request.temperature = args.temp;
    request.duration_ps = args.duration;
    if request.pdb.is_none() && request.text.trim().is_empty() {
        return Err(Failure::usage("give --pdb or --request"));
    }

    let md = md_backend(config, args.backend)?;
    let mut tools = toolset(config, md);
    let mut options = worker_options(config);

    let (worker, live): (Arc<dyn ChatBackend>, Option<Arc<HttpBackend>>) = match &args.policy {
        Some(p) => (Arc::new(ScriptedBackend::new(load_policy(p)?)), None),
        None => {
            let http = live_backend(config, args.model.as_deref())?;
            (http.clone(), Some(http))
        }
    };
    if let Some(http) = &live {
        options.summarizer = Summarizer::Model(http.clone());
        options.prose = Prose::Model(http.clone());
        if config.model.web_search_enabled {
            tools.web = Some(Arc::new(GatewayWebSearch::new(http.clone())) as Arc<dyn WebSearch>);
        }
    }
    let corpus = args.corpus.clone().or_else(|| config.retrieval.corpus_dir.clone());
    if let Some(dir) = &corpus {
        let index = CorpusIndex::from_dir(dir).map_err(|e| Failure::usage(format!("corpus {}: {e}", dir.display())))?;
        let synthesizer = match &live {
            Some(http) => Synthesizer::Model(http.clone()),
            None => Synthesizer::Extractive,
        };
        let mut literature = Literature::new(index, synthesizer);
        literature.k = config.retrieval.k;
        tools.literature = Some(Arc::new(literature));
    }
    if let Some(path) = &args.faults {
        tools.faults = Some(FaultBundle::load(path).map_err(Failure::usage)?);
    }
    let registry = build_registry(tools).map_err(|e| Failure::usage(e.to_string()))?;

    let workdir = args.workdir.clone().unwrap_or_else(|| config.run.workdir.clone());
    let run_id = args.run_id.clone().unwrap_or_else(default_run_id);
    let agents = Agents {
        worker: worker.as_ref(),
        registry: &registry,
        options,
        planner: live.as_ref().map(|h| h.as_ref() as &dyn ChatBackend),
        literature_lookup: corpus.is_some(),
    };
    info!("run {run_id} in {}", workdir.display());
    let out = execute_run(&workdir, &run_id, &request, &agents).map_err(|e| {
        if e.is_bad_request() {
            Failure::usage(e.to_string())
        } else {
            Failure::failed(e.to_string())
        }
    })?;

    let report_path = out.run_dir.join(mdagent_core::agent::EXIT_REPORT_MD);
    println!("{}", out.report.render_markdown());
    println!("Exit report: {}", report_path.display());
    if out.script_exhausted() {
        return Err(Failure {
            code: EXIT_SCRIPT_EXHAUSTED,
            message: out.gateway_error.map(|e| e.to_string()).unwrap_or_default(),
        });
    }
    if !out.report.succeeded() {
        return Err(Failure::failed(format!("run did not complete; see {}", report_path.display())));
    }
    Ok(())
}

fn default_run_id() -> String {
    format!("run-{}-{}", std::process::id(), std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or_default())
}

fn cmd_bench(config: &Config, args: BenchArgs) -> CliResult {
    let suite_path = resolve_fixture(&args.suite, "", ".suite")?;
    let mut suite = Suite::load(&suite_path).map_err(Failure::usage)?;
    if !args.systems.is_empty() {
        suite = suite.only(&args.systems).map_err(Failure::usage)?;
    }
    let mut policies = Vec::new();
    for p in &args.policies {
        let policy = load_policy(p)?;
        policies.push(BenchPolicy { policy_id: policy.policy_id.clone(), source: PolicySource::Scripted(policy) });
    }
    let workdir = args.workdir.clone().unwrap_or_else(|| config.run.workdir.clone());
    let mut options = BenchOptions::new(&workdir, md_backend(config, args.backend)?);
    options.repetitions = args.reps;
    options.parallelism = args.jobs;
    options.worker = worker_options(config);

    let report = run_benchmark(&suite, &policies, &options);
    for r in report.runs.iter().filter_map(|r| r.error.as_ref().map(|e| (r, e))) {
        warn!("{}: {}", r.0.run_id, r.1);
    }
    let out = args.out.clone().unwrap_or(workdir);
    let (csv, json) = report.emit(&out).map_err(|e| Failure::failed(e.to_string()))?;
    print!("{}", report.to_csv());
    println!("Wrote {} and {}", csv.display(), json.display());
    Ok(())
}

fn cmd_report(args: ReportArgs) -> CliResult {
    if let Some(dir) = &args.run {
        let sandbox = Sandbox::open(dir).map_err(|e| Failure::usage(e.to_string()))?;
        let report = ExitReport::load(&sandbox).map_err(Failure::usage)?;
        print!("{}", report.render_markdown());
        return Ok(());
    }
    let (Some(path), Some(out)) = (&args.bench, &args.out) else {
        return Err(Failure::usage("give --run DIR or --bench FILE --out DIR"));
    };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let report = BenchReport::from_json(&text).map_err(Failure::usage)?;
    let (csv, json) = report.emit(out).map_err(|e| Failure::failed(e.to_string()))?;
    println!("Wrote {} and {}", csv.display(), json.display());
    Ok(())
}

fn cmd_mmpbsa(config: &Config, args: MmpbsaArgs) -> CliResult {
    let sandbox = Sandbox::open(&args.run).map_err(|e| Failure::usage(e.to_string()))?;
    let report = ExitReport::load(&sandbox).map_err(Failure::usage)?;
    if !report.offer_mmpbsa {
        return Err(Failure::usage(format!(
            "run {} has no completed protein-ligand production; MM/PBSA is not available",
            report.run_id
        )));
    }
    let registry = build_registry(toolset(config, md_backend(config, args.backend)?))
        .map_err(|e| Failure::usage(e.to_string()))?;
    let mut arguments = serde_json::Map::new();
    if let Some(t) = args.temp {
        arguments.insert("temperature".into(), t.into());
    }
    if let Some(s) = args.delta_s {
        arguments.insert("delta_s".into(), s.into());
    }
    let call = ToolCallRequest::new("mmpbsa-1", "run_mmpbsa", serde_json::Value::Object(arguments));
    let outcome = registry
        .dispatch(&call, &sandbox, Actor::Harness)
        .map_err(|e| Failure::failed(e.to_string()))?;
    println!("{}", outcome.to_model_text());
    if outcome.is_success() {
        Ok(())
    } else {
        Err(Failure::failed("MM/PBSA failed"))
    }
}
