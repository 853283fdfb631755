//! Provider-agnostic chat completion with tool calling.
//!
//! [`ChatBackend`] is the single seam every agent talks through. Two
//! implementations ship here: [`HttpBackend`] speaks the chat-completions
//! wire format to any compatible endpoint, and [`ScriptedBackend`] replays
//! a declarative [`ScriptedPolicy`] so runs are deterministic offline.

mod http;
mod scripted;

pub use http::{build_request_body, parse_response_body, HttpBackend, RetryPolicy};
pub use scripted::{
    scripted_complete, Matcher, ScriptRule, ScriptView, ScriptedBackend, ScriptedCall,
    ScriptedPolicy, ScriptedResponse, NEXT_STEP_PREFIX, PLAN_VARS_MARKER,
};

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::tools::ToolSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SearchContext {
    Low,
    #[default]
    Medium,
    High,
}

impl SearchContext {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchContext::Low => "low",
            SearchContext::Medium => "medium",
            SearchContext::High => "high",
        }
    }
}

/// Model settings. Immutable once loaded; shared by concurrent runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub provider_route: String,
    pub base_url: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub model_id: String,
    pub temperature: f64,
    pub web_search_enabled: bool,
    pub web_search_context: SearchContext,
    pub max_output_tokens: u32,
    pub request_timeout_secs: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            provider_route: "openrouter".to_string(),
            base_url: "https://openrouter.ai/api/v1".to_string(),
            api_key_env: "LLM_API_KEY".to_string(),
            model_id: "openai/gpt-4.1-mini".to_string(),
            temperature: 0.1,
            web_search_enabled: false,
            web_search_context: SearchContext::Medium,
            max_output_tokens: 4096,
            request_timeout_secs: 300,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=2.0).contains(&self.temperature) || self.temperature.is_nan() {
            return Err(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            ));
        }
        if self.max_output_tokens == 0 {
            return Err("max_output_tokens must be positive".to_string());
        }
        if self.model_id.trim().is_empty() {
            return Err("model_id must not be empty".to_string());
        }
        Ok(())
    }

    pub fn request_timeout(&self) -> Duration {
        Duration::from_secs(self.request_timeout_secs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
    Tool,
}

/// A tool invocation requested by the model. `arguments` holds the raw
/// argument text exactly as the provider sent it; it is parsed at dispatch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolCallRequest {
    pub call_id: String,
    pub tool_name: String,
    pub arguments: String,
}

impl ToolCallRequest {
    pub fn new(call_id: impl Into<String>, tool_name: impl Into<String>, arguments: Value) -> Self {
        Self {
            call_id: call_id.into(),
            tool_name: tool_name.into(),
            arguments: arguments.to_string(),
        }
    }

    /// Parses the argument text into a key-value document. Empty text is an
    /// empty document.
    pub fn parse_arguments(&self) -> Result<Map<String, Value>, String> {
        if self.arguments.trim().is_empty() {
            return Ok(Map::new());
        }
        match serde_json::from_str::<Value>(&self.arguments) {
            Ok(Value::Object(map)) => Ok(map),
            Ok(other) => Err(format!(
                "tool arguments must be a JSON object, got {}",
                json_kind(&other)
            )),
            Err(err) => Err(format!("malformed tool arguments ({err}): {}", self.arguments)),
        }
    }
}

pub(crate) fn json_kind(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

/// A web citation attached to an assistant message by provider-side search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrlCitation {
    pub url: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub excerpt: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    #[serde(default)]
    pub content: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tool_calls: Vec<ToolCallRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_call_id: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub citations: Vec<UrlCitation>,
}

impl Message {
    fn plain(role: Role, content: impl Into<String>) -> Self {
        Self {
            role,
            content: content.into(),
            tool_calls: Vec::new(),
            tool_call_id: None,
            citations: Vec::new(),
        }
    }

    pub fn system(content: impl Into<String>) -> Self {
        Self::plain(Role::System, content)
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self::plain(Role::User, content)
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self::plain(Role::Assistant, content)
    }

    pub fn assistant_with_calls(content: impl Into<String>, calls: Vec<ToolCallRequest>) -> Self {
        Self {
            tool_calls: calls,
            ..Self::plain(Role::Assistant, content)
        }
    }

    pub fn tool(call_id: impl Into<String>, content: impl Into<String>) -> Self {
        Self {
            tool_call_id: Some(call_id.into()),
            ..Self::plain(Role::Tool, content)
        }
    }

    pub fn has_tool_calls(&self) -> bool {
        !self.tool_calls.is_empty()
    }
}

/// Checks the structural history invariants: one leading system message,
/// and every tool message answers a call made by an earlier assistant turn.
pub fn validate_history(history: &[Message]) -> Result<(), String> {
    match history.first() {
        Some(m) if m.role == Role::System => {}
        _ => return Err("history must start with a system message".to_string()),
    }
    let mut open_calls: Vec<&str> = Vec::new();
    for (i, msg) in history.iter().enumerate().skip(1) {
        match msg.role {
            Role::System => return Err(format!("extra system message at position {i}")),
            Role::Assistant => {
                if !msg.tool_calls.is_empty() && msg.tool_call_id.is_some() {
                    return Err(format!("assistant message {i} carries a tool_call_id"));
                }
                open_calls.extend(msg.tool_calls.iter().map(|c| c.call_id.as_str()));
            }
            Role::Tool => {
                let id = msg
                    .tool_call_id
                    .as_deref()
                    .ok_or_else(|| format!("tool message {i} has no tool_call_id"))?;
                if !open_calls.contains(&id) {
                    return Err(format!(
                        "tool message {i} answers unknown call id '{id}'"
                    ));
                }
            }
            Role::User => {
                if !msg.tool_calls.is_empty() || msg.tool_call_id.is_some() {
                    return Err(format!("user message {i} carries tool fields"));
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GatewayError {
    #[error("transport failure{}: {message}", status.map(|s| format!(" (status {s})")).unwrap_or_default())]
    Transport { status: Option<u16>, message: String },
    #[error("rate limited by provider (status {status})")]
    RateLimited {
        status: u16,
        retry_after: Option<Duration>,
    },
    #[error("provider rejected the request (status {status}): {excerpt}")]
    Provider { status: u16, excerpt: String },
    #[error("malformed provider response: {excerpt}")]
    MalformedResponse { excerpt: String },
    #[error("scripted policy '{policy}' has no rule for position {position}")]
    ScriptExhausted { policy: String, position: usize },
    #[error("invalid history: {0}")]
    InvalidHistory(String),
    #[error("API key not found: environment variable {0} is not set")]
    MissingApiKey(String),
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
}

impl GatewayError {
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            GatewayError::Transport { .. } | GatewayError::RateLimited { .. }
        )
    }

    pub fn status(&self) -> Option<u16> {
        match self {
            GatewayError::Transport { status, .. } => *status,
            GatewayError::RateLimited { status, .. } | GatewayError::Provider { status, .. } => {
                Some(*status)
            }
            _ => None,
        }
    }
}

/// Something that turns a conversation into the next assistant message.
///
/// Implementations never mutate `history`; the caller owns appending.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, history: &[Message], tools: &[ToolSpec]) -> Result<Message, GatewayError>;

    fn describe(&self) -> String;
}

impl<T: ChatBackend + ?Sized> ChatBackend for std::sync::Arc<T> {
    fn complete(&self, history: &[Message], tools: &[ToolSpec]) -> Result<Message, GatewayError> {
        (**self).complete(history, tools)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn defaults_follow_low_temperature_medium_search() {
        let config = ModelConfig::default();
        assert_eq!(config.temperature, 0.1);
        assert_eq!(config.web_search_context, SearchContext::Medium);
        assert!(config.validate().is_ok());
        let hot = ModelConfig {
            temperature: 2.5,
            ..ModelConfig::default()
        };
        assert!(hot.validate().is_err());
    }

    #[test]
    fn malformed_arguments_are_an_error_not_a_panic() {
        let call = ToolCallRequest {
            call_id: "c1".into(),
            tool_name: "fetch_pdb".into(),
            arguments: "{\"pdb_id\": ".into(),
        };
        let err = call.parse_arguments().unwrap_err();
        assert!(err.contains("malformed tool arguments"));
        let call = ToolCallRequest::new("c2", "fetch_pdb", json!(["x"]));
        assert!(call.parse_arguments().unwrap_err().contains("array"));
        let call = ToolCallRequest::new("c3", "fetch_pdb", json!({"pdb_id": "1AKI"}));
        assert_eq!(call.parse_arguments().unwrap()["pdb_id"], "1AKI");
    }

    #[test]
    fn history_validation() {
        let call = ToolCallRequest::new("c1", "fetch_pdb", json!({}));
        let good = vec![
            Message::system("s"),
            Message::user("u"),
            Message::assistant_with_calls("", vec![call]),
            Message::tool("c1", "ok"),
        ];
        assert!(validate_history(&good).is_ok());

        let orphan = vec![Message::system("s"), Message::tool("zz", "ok")];
        assert!(validate_history(&orphan).is_err());

        let two_systems = vec![Message::system("s"), Message::system("t")];
        assert!(validate_history(&two_systems).is_err());

        assert!(validate_history(&[Message::user("u")]).is_err());
    }

    #[test]
    fn rate_limit_is_retryable_and_keeps_status() {
        let err = GatewayError::RateLimited {
            status: 429,
            retry_after: None,
        };
        assert!(err.is_retryable());
        assert_eq!(err.status(), Some(429));
        let err = GatewayError::Provider {
            status: 400,
            excerpt: "bad".into(),
        };
        assert!(!err.is_retryable());
    }
}
