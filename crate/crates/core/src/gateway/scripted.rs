use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{ChatBackend, GatewayError, Message, Role, ToolCallRequest, UrlCitation};
use crate::tools::ToolSpec;

/// Marker the worker uses to embed machine-readable plan variables in its
/// system prompt.
pub const PLAN_VARS_MARKER: &str = "Plan variables:";
/// Line prefix of the plan reinforcement message naming the next step.
pub const NEXT_STEP_PREFIX: &str = "Next step: ";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Matcher {
    /// Matches the n-th completion served by this policy instance.
    TurnIndex(usize),
    /// Matches when the latest tool outcome is a failure containing the text.
    LastErrorContains(String),
    /// Matches when the plan's next step has this canonical name.
    PlanStep(String),
    Always,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedCall {
    pub name: String,
    /// Argument document; string values may contain `{{var}}` placeholders
    /// filled from the plan variables.
    #[serde(default)]
    pub arguments: Value,
    /// Verbatim argument text, used instead of `arguments` to model
    /// malformed provider output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_arguments: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScriptedResponse {
    #[serde(default)]
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_call: Option<ScriptedCall>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tool_calls: Vec<ScriptedCall>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub citations: Vec<UrlCitation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptRule {
    pub when: Matcher,
    pub respond: ScriptedResponse,
}

/// Ordered (matcher, response) rules. The first matching rule answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedPolicy {
    pub policy_id: String,
    #[serde(default)]
    pub description: String,
    pub rules: Vec<ScriptRule>,
}

impl ScriptedPolicy {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read policy {}: {e}", path.display()))?;
        Self::from_json(&text).map_err(|e| format!("invalid policy {}: {e}", path.display()))
    }
}

/// What a scripted policy may look at: only model-visible history.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScriptView {
    pub position: usize,
    pub last_error: Option<String>,
    pub next_step: Option<String>,
    pub vars: Map<String, Value>,
}

impl ScriptView {
    pub fn from_history(position: usize, history: &[Message]) -> Self {
        let vars = history
            .iter()
            .find(|m| m.role == Role::System)
            .and_then(|m| extract_plan_vars(&m.content))
            .unwrap_or_default();

        let next_step = history.iter().rev().find_map(|m| {
            if m.role == Role::Tool {
                return None;
            }
            m.content
                .lines()
                .rev()
                .find_map(|line| line.strip_prefix(NEXT_STEP_PREFIX))
                .map(|s| s.trim().trim_end_matches('.').to_string())
        });
        let next_step = next_step.filter(|s| !s.is_empty() && s != "none");

        let last_assistant = history.iter().rposition(|m| m.role == Role::Assistant);
        let last_error = last_assistant.and_then(|idx| {
            history[idx + 1..]
                .iter()
                .rfind(|m| m.role == Role::Tool)
                .filter(|m| m.content.starts_with("FAILURE"))
                .map(|m| m.content.clone())
        });

        Self {
            position,
            last_error,
            next_step,
            vars,
        }
    }

    fn matches(&self, matcher: &Matcher) -> bool {
        match matcher {
            Matcher::TurnIndex(n) => self.position == *n,
            Matcher::LastErrorContains(needle) => self
                .last_error
                .as_deref()
                .is_some_and(|e| e.contains(needle.as_str())),
            Matcher::PlanStep(step) => self.next_step.as_deref() == Some(step.as_str()),
            Matcher::Always => true,
        }
    }
}

fn extract_plan_vars(system: &str) -> Option<Map<String, Value>> {
    let after = &system[system.find(PLAN_VARS_MARKER)? + PLAN_VARS_MARKER.len()..];
    let start = after.find("```json")? + "```json".len();
    let end = after[start..].find("```")? + start;
    match serde_json::from_str(&after[start..end]) {
        Ok(Value::Object(map)) => Some(map),
        _ => None,
    }
}

fn fill_templates(value: &Value, vars: &Map<String, Value>) -> Value {
    match value {
        Value::String(s) => {
            let trimmed = s.trim();
            if let Some(name) = trimmed
                .strip_prefix("{{")
                .and_then(|r| r.strip_suffix("}}"))
                .filter(|n| !n.contains("{{"))
            {
                if let Some(v) = vars.get(name.trim()) {
                    return v.clone();
                }
            }
            let mut out = s.clone();
            for (key, v) in vars {
                let placeholder = format!("{{{{{key}}}}}");
                if out.contains(&placeholder) {
                    let text = match v {
                        Value::String(t) => t.clone(),
                        other => other.to_string(),
                    };
                    out = out.replace(&placeholder, &text);
                }
            }
            Value::String(out)
        }
        Value::Array(items) => Value::Array(items.iter().map(|v| fill_templates(v, vars)).collect()),
        Value::Object(map) => Value::Object(
            map.iter()
                .map(|(k, v)| (k.clone(), fill_templates(v, vars)))
                .collect(),
        ),
        other => other.clone(),
    }
}

/// Pure scripted completion: a function of (policy, position, history) only.
pub fn scripted_complete(
    policy: &ScriptedPolicy,
    position: usize,
    history: &[Message],
) -> Result<Message, GatewayError> {
    let view = ScriptView::from_history(position, history);
    let rule = policy
        .rules
        .iter()
        .find(|r| view.matches(&r.when))
        .ok_or_else(|| GatewayError::ScriptExhausted {
            policy: policy.policy_id.clone(),
            position,
        })?;
    let response = &rule.respond;
    let calls = response
        .tool_call
        .iter()
        .chain(response.tool_calls.iter())
        .enumerate()
        .map(|(k, call)| {
            let arguments = match &call.raw_arguments {
                Some(raw) => raw.clone(),
                None => {
                    let args = if call.arguments.is_null() {
                        Value::Object(Map::new())
                    } else {
                        fill_templates(&call.arguments, &view.vars)
                    };
                    args.to_string()
                }
            };
            ToolCallRequest {
                call_id: format!("call_{position:03}_{k}"),
                tool_name: call.name.clone(),
                arguments,
            }
        })
        .collect();
    let mut message = Message::assistant_with_calls(
        fill_templates(&Value::String(response.text.clone()), &view.vars)
            .as_str()
            .unwrap_or_default()
            .to_string(),
        calls,
    );
    message.citations = response.citations.clone();
    Ok(message)
}

/// Deterministic backend replaying a [`ScriptedPolicy`]. Its position
/// advances by one per completion.
pub struct ScriptedBackend {
    policy: ScriptedPolicy,
    position: Mutex<usize>,
}

impl ScriptedBackend {
    pub fn new(policy: ScriptedPolicy) -> Self {
        Self {
            policy,
            position: Mutex::new(0),
        }
    }

    pub fn position(&self) -> usize {
        *self.position.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn policy(&self) -> &ScriptedPolicy {
        &self.policy
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, history: &[Message], _tools: &[ToolSpec]) -> Result<Message, GatewayError> {
        let mut position = self.position.lock().unwrap_or_else(|e| e.into_inner());
        let message = scripted_complete(&self.policy, *position, history)?;
        *position += 1;
        Ok(message)
    }

    fn describe(&self) -> String {
        format!("scripted:{}", self.policy.policy_id)
    }
}
