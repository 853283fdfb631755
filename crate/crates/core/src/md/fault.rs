//! Declarative fault injection: wraps a tool handler and fails (or
//! strips artifacts from) matching dispatches until a clearing condition
//! is observed in the sandbox.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::tools::{Arguments, FailureKind, ToolContext, ToolFailure, ToolHandler, ToolResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClearsOn {
    /// Cleared once any sandbox edit inserted text containing the pattern.
    FileEditMatching(String),
    Never,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FaultEffect {
    /// The dispatch fails with `error_text`.
    #[default]
    Fail,
    /// The healthy handler runs, then the named files are removed and
    /// dropped from the artifact list.
    OmitArtifacts(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultFixture {
    pub target_tool: String,
    /// Only dispatches whose arguments contain these key/value pairs match.
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub match_args: Map<String, Value>,
    /// Fail the first N matching dispatches; absent means every one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trigger_count: Option<usize>,
    #[serde(default)]
    pub error_text: String,
    pub clears_on: ClearsOn,
    #[serde(default)]
    pub effect: FaultEffect,
}

impl FaultFixture {
    fn matches(&self, args: &Arguments) -> bool {
        self.match_args
            .iter()
            .all(|(k, v)| args.raw().get(k) == Some(v))
    }

    fn cleared(&self, ctx: &ToolContext<'_>) -> bool {
        match &self.clears_on {
            ClearsOn::Never => false,
            ClearsOn::FileEditMatching(pattern) => ctx
                .sandbox
                .edits()
                .iter()
                .any(|e| e.inserted.contains(pattern.as_str())),
        }
    }
}

/// A named set of fixtures reproducing one failure scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultBundle {
    pub bundle_id: String,
    #[serde(default)]
    pub description: String,
    /// Text that must reach the model verbatim when the fault fires.
    pub sentinel: String,
    pub fixtures: Vec<FaultFixture>,
}

impl FaultBundle {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read fault bundle {}: {e}", path.display()))?;
        Self::from_json(&text).map_err(|e| format!("invalid fault bundle {}: {e}", path.display()))
    }

    pub fn fixtures_for<'a>(&'a self, tool: &'a str) -> impl Iterator<Item = &'a FaultFixture> + 'a {
        self.fixtures.iter().filter(move |f| f.target_tool == tool)
    }
}

/// Handler decorator applying the fixtures aimed at one tool. Trigger
/// counters are kept per run id, so one wrapped registry can serve many
/// runs.
pub struct FaultyHandler {
    inner: Arc<dyn ToolHandler>,
    fixtures: Vec<FaultFixture>,
    counters: Mutex<HashMap<(String, usize), usize>>,
}

impl FaultyHandler {
    pub fn new(inner: Arc<dyn ToolHandler>, fixtures: Vec<FaultFixture>) -> Self {
        Self {
            inner,
            fixtures,
            counters: Mutex::new(HashMap::new()),
        }
    }

    /// The first fixture that fires for this dispatch, advancing counters.
    fn firing(&self, args: &Arguments, ctx: &ToolContext<'_>) -> Option<&FaultFixture> {
        let mut counters = self.counters.lock().unwrap_or_else(|e| e.into_inner());
        for (idx, fixture) in self.fixtures.iter().enumerate() {
            if !fixture.matches(args) || fixture.cleared(ctx) {
                continue;
            }
            let seen = counters
                .entry((ctx.sandbox.run_id().to_string(), idx))
                .or_insert(0);
            *seen += 1;
            if fixture.trigger_count.is_none_or(|n| *seen <= n) {
                return Some(fixture);
            }
        }
        None
    }
}

impl ToolHandler for FaultyHandler {
    fn invoke(&self, args: &Arguments, ctx: &ToolContext<'_>) -> ToolResult {
        let Some(fixture) = self.firing(args, ctx) else {
            return self.inner.invoke(args, ctx);
        };
        match &fixture.effect {
            FaultEffect::Fail => Err(ToolFailure::new(FailureKind::Injected, fixture.error_text.clone())),
            FaultEffect::OmitArtifacts(files) => {
                let mut success = self.inner.invoke(args, ctx)?;
                for file in files {
                    if ctx.sandbox.exists(file) {
                        ctx.sandbox.remove(file)?;
                    }
                }
                success.artifacts.retain(|a| !files.contains(a));
                Ok(success)
            }
        }
    }
}
