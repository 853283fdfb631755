//! Runtime-loaded tool schemas, strict argument validation, and dispatch
//! that turns every result into a uniform [`ToolOutcome`].

mod schema;

pub use schema::{ParamDef, ParamSchema, ParamType, ToolSpec};

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::gateway::ToolCallRequest;
use crate::sandbox::{Actor, Sandbox, TraceError, TraceKind};
use crate::text::{cap_tail, short_digest};

/// Default byte cap for failure text routed back to the agent.
pub const DEFAULT_ERROR_CAP: usize = 16 * 1024;
/// Default wall-clock limit for external processes.
pub const DEFAULT_TOOL_TIMEOUT: Duration = Duration::from_secs(600);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeStatus {
    Success,
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    UnknownTool,
    InvalidArguments,
    HandlerFault,
    Timeout,
    ProcessExit,
    Precondition,
    Sandbox,
    Io,
    Network,
    Injected,
}

impl FailureKind {
    pub fn label(self) -> &'static str {
        match self {
            FailureKind::UnknownTool => "unknown tool",
            FailureKind::InvalidArguments => "invalid arguments",
            FailureKind::HandlerFault => "handler fault",
            FailureKind::Timeout => "timeout",
            FailureKind::ProcessExit => "external process failed",
            FailureKind::Precondition => "precondition failed",
            FailureKind::Sandbox => "sandbox violation",
            FailureKind::Io => "i/o error",
            FailureKind::Network => "network error",
            FailureKind::Injected => "tool error",
        }
    }
}

/// The uniform envelope returned for every dispatch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolOutcome {
    pub status: OutcomeStatus,
    /// Success: result summary. Failure: the complete captured error text.
    pub summary: String,
    /// Paths relative to the sandbox root.
    pub artifacts: Vec<String>,
    pub duration_secs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_kind: Option<FailureKind>,
}

impl ToolOutcome {
    pub fn is_success(&self) -> bool {
        self.status == OutcomeStatus::Success
    }

    /// Text placed in the tool-role message the model sees.
    pub fn to_model_text(&self) -> String {
        match self.status {
            OutcomeStatus::Success => {
                let mut text = format!("SUCCESS: {}", self.summary);
                if !self.artifacts.is_empty() {
                    text.push_str(&format!("\nArtifacts: {}", self.artifacts.join(", ")));
                }
                text
            }
            OutcomeStatus::Failure => {
                let label = self.failure_kind.map(FailureKind::label).unwrap_or("error");
                format!("FAILURE ({label}):\n{}", self.summary)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ToolSuccess {
    pub summary: String,
    pub artifacts: Vec<String>,
}

impl ToolSuccess {
    pub fn new(summary: impl Into<String>) -> Self {
        Self {
            summary: summary.into(),
            artifacts: Vec::new(),
        }
    }

    pub fn with_artifacts<I, S>(mut self, artifacts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.artifacts.extend(artifacts.into_iter().map(Into::into));
        self
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{}: {message}", kind.label())]
pub struct ToolFailure {
    pub kind: FailureKind,
    pub message: String,
}

impl ToolFailure {
    pub fn new(kind: FailureKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        Self::new(FailureKind::Precondition, message)
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new(FailureKind::Io, message)
    }
}

pub type ToolResult = Result<ToolSuccess, ToolFailure>;

/// Validated arguments with typed accessors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Arguments(pub Map<String, Value>);

impl Arguments {
    pub fn raw(&self) -> &Map<String, Value> {
        &self.0
    }

    pub fn str(&self, name: &str) -> Result<&str, ToolFailure> {
        self.opt_str(name).ok_or_else(|| {
            ToolFailure::new(
                FailureKind::InvalidArguments,
                format!("missing required parameter '{name}'"),
            )
        })
    }

    pub fn opt_str(&self, name: &str) -> Option<&str> {
        self.0.get(name).and_then(Value::as_str)
    }

    pub fn opt_f64(&self, name: &str) -> Option<f64> {
        self.0.get(name).and_then(Value::as_f64)
    }

    pub fn opt_i64(&self, name: &str) -> Option<i64> {
        self.0.get(name).and_then(Value::as_i64)
    }

    pub fn opt_bool(&self, name: &str) -> Option<bool> {
        self.0.get(name).and_then(Value::as_bool)
    }

    pub fn str_list(&self, name: &str) -> Vec<String> {
        self.0
            .get(name)
            .and_then(Value::as_array)
            .map(|items| {
                items
                    .iter()
                    .filter_map(Value::as_str)
                    .map(str::to_string)
                    .collect()
            })
            .unwrap_or_default()
    }
}

/// Per-dispatch context handed to handlers.
pub struct ToolContext<'a> {
    pub sandbox: &'a Sandbox,
    pub timeout: Duration,
    pub tool_name: &'a str,
}

pub trait ToolHandler: Send + Sync {
    fn invoke(&self, args: &Arguments, ctx: &ToolContext<'_>) -> ToolResult;
}

impl<F> ToolHandler for F
where
    F: Fn(&Arguments, &ToolContext<'_>) -> ToolResult + Send + Sync,
{
    fn invoke(&self, args: &Arguments, ctx: &ToolContext<'_>) -> ToolResult {
        self(args, ctx)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("tool '{0}' is already registered")]
    Duplicate(String),
    #[error("no schema named '{0}'")]
    MissingSpec(String),
}

struct Entry {
    spec: ToolSpec,
    handler: Arc<dyn ToolHandler>,
    timeout: Duration,
}

/// Registration-ordered set of tools. Immutable once built.
pub struct ToolRegistry {
    entries: Vec<Entry>,
    by_name: HashMap<String, usize>,
    error_cap: usize,
}

impl Default for ToolRegistry {
    fn default() -> Self {
        Self::new()
    }
}

impl ToolRegistry {
    pub fn new() -> Self {
        Self {
            entries: Vec::new(),
            by_name: HashMap::new(),
            error_cap: DEFAULT_ERROR_CAP,
        }
    }

    pub fn with_error_cap(mut self, cap: usize) -> Self {
        self.error_cap = cap;
        self
    }

    pub fn register(
        &mut self,
        spec: ToolSpec,
        handler: Arc<dyn ToolHandler>,
    ) -> Result<(), RegistryError> {
        self.register_with_timeout(spec, handler, DEFAULT_TOOL_TIMEOUT)
    }

    pub fn register_with_timeout(
        &mut self,
        spec: ToolSpec,
        handler: Arc<dyn ToolHandler>,
        timeout: Duration,
    ) -> Result<(), RegistryError> {
        if self.by_name.contains_key(&spec.name) {
            return Err(RegistryError::Duplicate(spec.name));
        }
        self.by_name.insert(spec.name.clone(), self.entries.len());
        self.entries.push(Entry {
            spec,
            handler,
            timeout,
        });
        Ok(())
    }

    pub fn set_timeout(&mut self, name: &str, timeout: Duration) -> Result<(), RegistryError> {
        let idx = *self
            .by_name
            .get(name)
            .ok_or_else(|| RegistryError::MissingSpec(name.to_string()))?;
        self.entries[idx].timeout = timeout;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.spec.name.as_str()).collect()
    }

    pub fn specs(&self) -> Vec<ToolSpec> {
        self.entries.iter().map(|e| e.spec.clone()).collect()
    }

    pub fn spec(&self, name: &str) -> Option<&ToolSpec> {
        self.by_name.get(name).map(|&i| &self.entries[i].spec)
    }

    /// Wire documents in registration order.
    pub fn render_specs(&self) -> Vec<Value> {
        self.entries.iter().map(|e| e.spec.to_wire()).collect()
    }

    /// Byte-stable serialization of [`render_specs`](Self::render_specs).
    pub fn render_specs_json(&self) -> String {
        serde_json::to_string_pretty(&self.render_specs()).unwrap_or_default()
    }

    /// Runs one tool call. Every tool-side error becomes a failure outcome;
    /// only an audit-trail write failure is returned as `Err`.
    pub fn dispatch(
        &self,
        call: &ToolCallRequest,
        sandbox: &Sandbox,
        actor: Actor,
    ) -> Result<ToolOutcome, TraceError> {
        sandbox.append_trace(
            actor,
            TraceKind::ToolCall,
            json!({
                "tool": call.tool_name,
                "call_id": call.call_id,
                "args_digest": short_digest(call.arguments.as_bytes()),
                "args": call.arguments,
            }),
        )?;
        let started = Instant::now();
        let result = self.run(call, sandbox);
        let duration_secs = started.elapsed().as_secs_f64();
        let outcome = match result {
            Ok(success) => ToolOutcome {
                status: OutcomeStatus::Success,
                summary: success.summary,
                artifacts: success.artifacts,
                duration_secs,
                failure_kind: None,
            },
            Err(failure) => ToolOutcome {
                status: OutcomeStatus::Failure,
                summary: cap_tail(&failure.message, self.error_cap),
                artifacts: Vec::new(),
                duration_secs,
                failure_kind: Some(failure.kind),
            },
        };
        sandbox.append_trace(
            actor,
            TraceKind::ToolOutcome,
            json!({
                "tool": call.tool_name,
                "call_id": call.call_id,
                "status": outcome.status,
                "failure_kind": outcome.failure_kind,
                "excerpt": outcome.summary,
                "artifacts": outcome.artifacts,
                "duration_secs": outcome.duration_secs,
            }),
        )?;
        Ok(outcome)
    }

    fn run(&self, call: &ToolCallRequest, sandbox: &Sandbox) -> ToolResult {
        let entry = self
            .by_name
            .get(&call.tool_name)
            .map(|&i| &self.entries[i])
            .ok_or_else(|| {
                ToolFailure::new(
                    FailureKind::UnknownTool,
                    format!(
                        "unknown tool '{}' (available: {})",
                        call.tool_name,
                        self.names().join(", ")
                    ),
                )
            })?;
        let args = call
            .parse_arguments()
            .map_err(|e| ToolFailure::new(FailureKind::InvalidArguments, e))?;
        entry
            .spec
            .parameters
            .validate(&args)
            .map_err(|e| ToolFailure::new(FailureKind::InvalidArguments, e))?;
        let args = Arguments(args);
        let ctx = ToolContext {
            sandbox,
            timeout: entry.timeout,
            tool_name: &entry.spec.name,
        };
        let handler = entry.handler.clone();
        let mut success = catch_unwind(AssertUnwindSafe(|| handler.invoke(&args, &ctx)))
            .map_err(|payload| {
                let text = payload
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "non-string panic payload".to_string());
                ToolFailure::new(
                    FailureKind::HandlerFault,
                    format!("tool '{}' crashed: {text}", call.tool_name),
                )
            })??;
        for path in &mut success.artifacts {
            let resolved = sandbox.resolve(path).map_err(|e| {
                ToolFailure::new(FailureKind::Sandbox, format!("artifact {path}: {e}"))
            })?;
            *path = sandbox.relative(&resolved).unwrap_or(path.clone());
        }
        Ok(success)
    }
}
