//! Turns a request into a validated plan.

use std::path::PathBuf;
use std::sync::LazyLock;

use regex::Regex;
use serde_json::{json, Value};

use super::plan::{PdbSource, Plan, PlanError, DEFAULT_PRODUCTION_PS, DEFAULT_TEMPERATURE_K};
use super::prompts::PLANNER_PROMPT;
use crate::gateway::{ChatBackend, Message, ToolCallRequest};
use crate::sandbox::{Actor, Sandbox, TraceError, TraceKind};
use crate::tools::ToolRegistry;

static PDB_ID: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b([0-9][A-Za-z0-9]{3})\b").expect("valid regex"));
static UNIT_TOKEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)^\d+(k|ns|ps|fs)$").expect("valid regex"));
static PDB_PATH: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)(\S+\.pdb)\b").expect("valid regex"));
static LIGANDS: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\bligands?\s+([A-Z0-9]{1,4}(?:\s*(?:,|and)\s*[A-Z0-9]{1,4})*)\b").expect("valid regex")
});
static TEMPERATURE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(\d+(?:\.\d+)?)\s*K\b").expect("valid regex"));
static DURATION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)(\d+(?:\.\d+)?)\s*(ns|ps)\b").expect("valid regex"));
static JSON_OBJECT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?s)\{.*\}").expect("valid regex"));

/// Plausible simulation temperatures accepted from literature answers.
const TEMPERATURE_RANGE: std::ops::RangeInclusive<f64> = 200.0..=500.0;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlanRequest {
    pub text: String,
    /// PDB identifier or path to a local structure; overrides the text.
    pub pdb: Option<String>,
    pub ligands: Vec<String>,
    pub temperature: Option<f64>,
    pub duration_ps: Option<f64>,
}

impl PlanRequest {
    pub fn from_text(text: impl Into<String>) -> Self {
        Self { text: text.into(), ..Default::default() }
    }

    /// Request text for prompts; synthesized from the fields when empty.
    pub fn describe(&self) -> String {
        if !self.text.trim().is_empty() {
            return self.text.clone();
        }
        let mut out = format!("simulate {}", self.pdb.as_deref().unwrap_or("?"));
        if !self.ligands.is_empty() {
            out.push_str(&format!(" with ligand {}", self.ligands.join(", ")));
        }
        if let Some(t) = self.temperature {
            out.push_str(&format!(" at {t} K"));
        }
        if let Some(d) = self.duration_ps {
            out.push_str(&format!(" for {d} ps"));
        }
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PlannerError {
    #[error("no PDB identifier or structure file in request '{0}'")]
    NoStructure(String),
    #[error("structure file {0} does not exist")]
    MissingFile(PathBuf),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// Fields read from the request text.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedRequest {
    pub pdb: Option<String>,
    pub ligands: Vec<String>,
    pub temperature: Option<f64>,
    pub duration_ps: Option<f64>,
}

pub fn parse_request(text: &str) -> ParsedRequest {
    let pdb = PDB_PATH.captures(text).map(|c| c[1].to_string()).or_else(|| {
        PDB_ID
            .captures_iter(text)
            .map(|c| c[1].to_string())
            .find(|t| t.chars().any(|c| c.is_ascii_alphabetic()) && !UNIT_TOKEN.is_match(t))
            .map(|t| t.to_ascii_uppercase())
    });
    let ligands = LIGANDS
        .captures(text)
        .map(|c| {
            c[1].split(|ch: char| ch == ',' || ch.is_whitespace())
                .filter(|t| !t.is_empty() && !t.eq_ignore_ascii_case("and"))
                .map(|t| t.to_ascii_uppercase())
                .collect()
        })
        .unwrap_or_default();
    let temperature = TEMPERATURE.captures(text).and_then(|c| c[1].parse().ok());
    let duration_ps = DURATION.captures(text).and_then(|c| {
        let v: f64 = c[1].parse().ok()?;
        Some(if c[2].eq_ignore_ascii_case("ns") { v * 1000.0 } else { v })
    });
    ParsedRequest { pdb, ligands, temperature, duration_ps }
}

/// First plausible temperature in Kelvin mentioned in a text.
pub fn temperature_in(text: &str) -> Option<f64> {
    TEMPERATURE
        .captures_iter(text)
        .filter_map(|c| c[1].parse::<f64>().ok())
        .find(|t| TEMPERATURE_RANGE.contains(t))
}

pub fn source_for(pdb: &str) -> Result<PdbSource, PlannerError> {
    if pdb.to_ascii_lowercase().ends_with(".pdb") || pdb.contains('/') {
        let path = PathBuf::from(pdb);
        if !path.is_file() {
            return Err(PlannerError::MissingFile(path));
        }
        return Ok(PdbSource::Local(path.canonicalize().unwrap_or(path)));
    }
    Ok(PdbSource::Fetch(pdb.to_ascii_uppercase()))
}

/// The structure source named by a request, without consulting any model.
pub fn request_source(request: &PlanRequest) -> Option<Result<PdbSource, PlannerError>> {
    let pdb = request.pdb.clone().or_else(|| parse_request(&request.text).pdb)?;
    Some(source_for(&pdb))
}

#[derive(Default)]
pub struct Planner<'a> {
    /// Optional model used to fill fields the request parser could not.
    pub backend: Option<&'a dyn ChatBackend>,
    /// When set, a missing temperature is looked up with `search_papers`.
    pub registry: Option<&'a ToolRegistry>,
}

impl<'a> Planner<'a> {
    pub fn new() -> Self {
        Self::default()
    }

    fn ask_model(&self, sandbox: &Sandbox, request: &str) -> Result<Option<Value>, TraceError> {
        let Some(backend) = self.backend else {
            return Ok(None);
        };
        let question = format!(
            "{request}\n\nReply with one JSON object with the keys pdb_id, ligands (list of residue codes), temperature_k and duration_ps. Use null for anything the request does not state."
        );
        let history = [Message::system(PLANNER_PROMPT.trim()), Message::user(question)];
        match backend.complete(&history, &[]) {
            Ok(reply) => {
                sandbox.append_trace(Actor::Planner, TraceKind::ModelTurn, json!({"content": reply.content}))?;
                Ok(JSON_OBJECT
                    .find(&reply.content)
                    .and_then(|m| serde_json::from_str::<Value>(m.as_str()).ok())
                    .filter(Value::is_object))
            }
            Err(e) => {
                sandbox.append_trace(Actor::Planner, TraceKind::ModelTurn, json!({"error": e.to_string()}))?;
                log::warn!("planner model unavailable, using the parsed request only: {e}");
                Ok(None)
            }
        }
    }

    fn literature_temperature(&self, sandbox: &Sandbox, label: &str) -> Result<Option<f64>, TraceError> {
        let Some(registry) = self.registry.filter(|r| r.spec("search_papers").is_some()) else {
            return Ok(None);
        };
        let question = format!("What is the molecular dynamics simulation temperature for the {label} protein?");
        let call = ToolCallRequest::new("plan_temperature", "search_papers", json!({"question": question}));
        let outcome = registry.dispatch(&call, sandbox, Actor::Planner)?;
        Ok(outcome.is_success().then(|| temperature_in(&outcome.summary)).flatten())
    }

    /// Builds the plan for a run whose sandbox already exists.
    pub fn make_plan(&self, request: &PlanRequest, sandbox: &Sandbox) -> Result<Plan, PlannerError> {
        let parsed = parse_request(&request.text);
        let mut pdb = request.pdb.clone().or(parsed.pdb);
        let mut ligands = if request.ligands.is_empty() { parsed.ligands } else { request.ligands.clone() };
        let mut temperature = request.temperature.or(parsed.temperature);
        let mut duration = request.duration_ps.or(parsed.duration_ps);

        if pdb.is_none() || temperature.is_none() || duration.is_none() {
            if let Some(fields) = self.ask_model(sandbox, &request.describe())? {
                let text = |k: &str| fields.get(k).and_then(Value::as_str).map(str::to_string);
                let num = |k: &str| fields.get(k).and_then(Value::as_f64).filter(|v| *v > 0.0);
                pdb = pdb.or_else(|| text("pdb_id"));
                if ligands.is_empty() {
                    ligands = fields
                        .get("ligands")
                        .and_then(Value::as_array)
                        .map(|a| a.iter().filter_map(Value::as_str).map(|s| s.to_ascii_uppercase()).collect())
                        .unwrap_or_default();
                }
                temperature = temperature.or_else(|| num("temperature_k"));
                duration = duration.or_else(|| num("duration_ps"));
            }
        }

        let pdb = pdb.ok_or_else(|| PlannerError::NoStructure(request.describe()))?;
        let source = source_for(&pdb)?;
        if temperature.is_none() {
            temperature = self.literature_temperature(sandbox, &source.label())?;
        }
        let plan = Plan::new(
            source,
            sandbox.root(),
            ligands,
            temperature.unwrap_or(DEFAULT_TEMPERATURE_K),
            duration.unwrap_or(DEFAULT_PRODUCTION_PS),
        )?;
        super::worker::trace_initial_plan(sandbox, &plan)?;
        Ok(plan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        let p = parse_request("simulate 3HTB with ligand JZ4 for 1 ns");
        assert_eq!(p.pdb.as_deref(), Some("3HTB"));
        assert_eq!(p.ligands, ["JZ4"]);
        assert_eq!(p.duration_ps, Some(1000.0));
        assert_eq!(p.temperature, None);

        let p = parse_request("simulate 1AKI");
        assert_eq!(p.pdb.as_deref(), Some("1AKI"));
        assert!(p.ligands.is_empty());

        let p = parse_request("run 5KB6 with ligands ADN and ADN2 at 310 K for 500 ps");
        assert_eq!(p.ligands, ["ADN", "ADN2"]);
        assert_eq!(p.temperature, Some(310.0));
        assert_eq!(p.duration_ps, Some(500.0));

        let p = parse_request("simulate 300K 10ns 2CBA");
        assert_eq!(p.pdb.as_deref(), Some("2CBA"));
        assert_eq!(parse_request("simulate inputs/my.pdb").pdb.as_deref(), Some("inputs/my.pdb"));
    }

    #[test]
    fn temperature_from_answer() {
        let answer = "The temperature for the 3PTB protein is explicitly stated as 298.15 K. Heated from 10 K to 298.15 K.";
        assert_eq!(temperature_in(answer), Some(298.15));
        assert_eq!(temperature_in("heated from 10 K"), None);
    }

    #[test]
    fn plans_from_text() {
        let dir = tempfile::tempdir().unwrap();
        let sb = Sandbox::create(dir.path(), "r").unwrap();
        let plan = Planner::new().make_plan(&PlanRequest::from_text("simulate 3HTB with ligand JZ4 for 1 ns"), &sb).unwrap();
        assert_eq!(plan.steps.len(), 11);
        assert_eq!(plan.production_ps, 1000.0);
        assert_eq!(plan.temperature, DEFAULT_TEMPERATURE_K);
        let sb2 = Sandbox::create(dir.path(), "r2").unwrap();
        let plan = Planner::new().make_plan(&PlanRequest::from_text("simulate 1AKI"), &sb2).unwrap();
        assert_eq!(plan.steps.len(), 8);
        assert_eq!(plan.production_ps, DEFAULT_PRODUCTION_PS);
    }

    #[test]
    fn unresolvable_source_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let sb = Sandbox::create(dir.path(), "r").unwrap();
        let planner = Planner::new();
        assert!(matches!(
            planner.make_plan(&PlanRequest::from_text("simulate something"), &sb),
            Err(PlannerError::NoStructure(_))
        ));
        let req = PlanRequest { pdb: Some("nonexistent.pdb".into()), ..Default::default() };
        assert!(matches!(planner.make_plan(&req, &sb), Err(PlannerError::MissingFile(_))));
    }
}
