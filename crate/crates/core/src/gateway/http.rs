use std::time::Duration;

use serde_json::{json, Map, Value};

use super::{
    validate_history, ChatBackend, GatewayError, Message, ModelConfig, Role, ToolCallRequest,
    UrlCitation,
};
use crate::text::cap_head;
use crate::tools::ToolSpec;

const BODY_EXCERPT: usize = 2048;

/// Transport-level retry schedule. Everything else is the agent's job.
#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    pub delays: Vec<Duration>,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            delays: vec![Duration::from_secs(1), Duration::from_secs(4)],
        }
    }
}

impl RetryPolicy {
    pub fn none() -> Self {
        Self { delays: Vec::new() }
    }

    /// Same retry count as the default, without waiting. For tests.
    pub fn immediate() -> Self {
        Self {
            delays: vec![Duration::ZERO; 2],
        }
    }
}

/// Chat-completions client for any compatible endpoint.
pub struct HttpBackend {
    config: ModelConfig,
    api_key: String,
    agent: ureq::Agent,
    retry: RetryPolicy,
}

impl HttpBackend {
    /// Reads the API key from the environment variable named in `config`.
    pub fn from_env(config: ModelConfig) -> Result<Self, GatewayError> {
        let key = std::env::var(&config.api_key_env)
            .map_err(|_| GatewayError::MissingApiKey(config.api_key_env.clone()))?;
        Self::new(config, key)
    }

    pub fn new(config: ModelConfig, api_key: impl Into<String>) -> Result<Self, GatewayError> {
        config.validate().map_err(GatewayError::InvalidConfig)?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.request_timeout()))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self {
            config,
            api_key: api_key.into(),
            agent,
            retry: RetryPolicy::default(),
        })
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn send_once(&self, body: &Value) -> Result<Message, GatewayError> {
        let mut request = self
            .agent
            .post(self.endpoint())
            .header("Content-Type", "application/json");
        if !self.api_key.is_empty() {
            request = request.header("Authorization", format!("Bearer {}", self.api_key));
        }
        let mut response = request
            .send(body.to_string())
            .map_err(|err| GatewayError::Transport {
                status: None,
                message: err.to_string(),
            })?;
        let status = response.status().as_u16();
        let retry_after = response
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Duration::from_secs);
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|err| GatewayError::Transport {
                status: Some(status),
                message: format!("failed to read response body: {err}"),
            })?;
        match status {
            200..=299 => parse_response_body(&text),
            429 => Err(GatewayError::RateLimited {
                status,
                retry_after,
            }),
            500..=599 => Err(GatewayError::Transport {
                status: Some(status),
                message: cap_head(&text, BODY_EXCERPT).to_string(),
            }),
            _ => Err(GatewayError::Provider {
                status,
                excerpt: cap_head(&text, BODY_EXCERPT).to_string(),
            }),
        }
    }
}

impl ChatBackend for HttpBackend {
    fn complete(&self, history: &[Message], tools: &[ToolSpec]) -> Result<Message, GatewayError> {
        validate_history(history).map_err(GatewayError::InvalidHistory)?;
        let body = build_request_body(&self.config, history, tools);
        let mut attempt = 0;
        loop {
            match self.send_once(&body) {
                Err(err) if err.is_retryable() && attempt < self.retry.delays.len() => {
                    log::warn!("model request failed ({err}); retry {} of {}", attempt + 1, self.retry.delays.len());
                    std::thread::sleep(self.retry.delays[attempt]);
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    fn describe(&self) -> String {
        format!("{}:{}", self.config.provider_route, self.config.model_id)
    }
}

fn message_to_wire(message: &Message) -> Value {
    let role = match message.role {
        Role::System => "system",
        Role::User => "user",
        Role::Assistant => "assistant",
        Role::Tool => "tool",
    };
    let mut wire = Map::new();
    wire.insert("role".into(), json!(role));
    wire.insert("content".into(), json!(message.content));
    if !message.tool_calls.is_empty() {
        let calls: Vec<Value> = message
            .tool_calls
            .iter()
            .map(|c| {
                json!({
                    "id": c.call_id,
                    "type": "function",
                    "function": {"name": c.tool_name, "arguments": c.arguments},
                })
            })
            .collect();
        wire.insert("tool_calls".into(), Value::Array(calls));
    }
    if let Some(id) = &message.tool_call_id {
        wire.insert("tool_call_id".into(), json!(id));
    }
    Value::Object(wire)
}

/// The exact document posted to the provider. Temperature is always present.
pub fn build_request_body(config: &ModelConfig, history: &[Message], tools: &[ToolSpec]) -> Value {
    let mut body = Map::new();
    body.insert("model".into(), json!(config.model_id));
    body.insert(
        "messages".into(),
        Value::Array(history.iter().map(message_to_wire).collect()),
    );
    body.insert("temperature".into(), json!(config.temperature));
    body.insert("max_tokens".into(), json!(config.max_output_tokens));
    if !tools.is_empty() {
        body.insert(
            "tools".into(),
            Value::Array(tools.iter().map(ToolSpec::to_wire).collect()),
        );
        body.insert("tool_choice".into(), json!("auto"));
    }
    if config.web_search_enabled {
        body.insert(
            "web_search_options".into(),
            json!({"search_context_size": config.web_search_context.as_str()}),
        );
    }
    Value::Object(body)
}

fn malformed(text: &str) -> GatewayError {
    GatewayError::MalformedResponse {
        excerpt: cap_head(text, BODY_EXCERPT).to_string(),
    }
}

/// Parses a chat-completions response into the assistant message.
pub fn parse_response_body(text: &str) -> Result<Message, GatewayError> {
    let doc: Value = serde_json::from_str(text).map_err(|_| malformed(text))?;
    let message = doc
        .get("choices")
        .and_then(|c| c.get(0))
        .and_then(|c| c.get("message"))
        .ok_or_else(|| malformed(text))?;
    let content = match message.get("content") {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(malformed(text)),
    };
    let mut tool_calls = Vec::new();
    if let Some(calls) = message.get("tool_calls").and_then(Value::as_array) {
        for call in calls {
            let id = call.get("id").and_then(Value::as_str);
            let function = call.get("function");
            let name = function.and_then(|f| f.get("name")).and_then(Value::as_str);
            let (Some(id), Some(name)) = (id, name) else {
                return Err(malformed(text));
            };
            let arguments = match function.and_then(|f| f.get("arguments")) {
                Some(Value::String(s)) => s.clone(),
                Some(Value::Null) | None => String::new(),
                Some(other) => other.to_string(),
            };
            tool_calls.push(ToolCallRequest {
                call_id: id.to_string(),
                tool_name: name.to_string(),
                arguments,
            });
        }
    }
    let mut citations = Vec::new();
    if let Some(annotations) = message.get("annotations").and_then(Value::as_array) {
        for note in annotations {
            let Some(cite) = note.get("url_citation") else {
                continue;
            };
            let Some(url) = cite.get("url").and_then(Value::as_str) else {
                continue;
            };
            let title = cite.get("title").and_then(Value::as_str).unwrap_or_default();
            let span = match (
                cite.get("start_index").and_then(Value::as_u64),
                cite.get("end_index").and_then(Value::as_u64),
            ) {
                (Some(s), Some(e)) => content.get(s as usize..e as usize).map(str::to_string),
                _ => None,
            };
            let excerpt = span
                .or_else(|| cite.get("content").and_then(Value::as_str).map(str::to_string))
                .unwrap_or_default();
            citations.push(UrlCitation {
                url: url.to_string(),
                title: title.to_string(),
                excerpt,
            });
        }
    }
    Ok(Message {
        role: Role::Assistant,
        content,
        tool_calls,
        tool_call_id: None,
        citations,
    })
}
