//! Message history with bounded growth through summarization.

use std::sync::Arc;

use crate::gateway::{ChatBackend, Message, Role};
use crate::text::cap_head;

/// Messages appended since the last summary before another one is made.
pub const SUMMARY_THRESHOLD: usize = 40;
pub const SUMMARY_PREFIX: &str = "Summary of earlier conversation:";

const SUMMARIZER_PROMPT: &str = include_str!("../../prompts/summarizer.txt");
const DIGEST_LINE_CAP: usize = 240;

/// How the compressed prefix is written.
#[derive(Clone)]
pub enum Summarizer {
    /// Deterministic digest of calls and outcomes; makes no model request.
    Digest,
    /// The model writes the summary. A failed request skips the cycle.
    Model(Arc<dyn ChatBackend>),
}

impl Summarizer {
    fn summarize(&self, messages: &[Message]) -> Result<String, String> {
        match self {
            Summarizer::Digest => Ok(digest(messages)),
            Summarizer::Model(backend) => {
                let transcript = messages.iter().map(render_line).collect::<Vec<_>>().join("\n");
                let history = [Message::system(SUMMARIZER_PROMPT.trim()), Message::user(transcript)];
                let reply = backend.complete(&history, &[]).map_err(|e| e.to_string())?;
                if reply.content.trim().is_empty() {
                    return Err("summarizer returned no text".to_string());
                }
                Ok(reply.content.trim().to_string())
            }
        }
    }
}

fn first_line(text: &str) -> &str {
    cap_head(text.lines().find(|l| !l.trim().is_empty()).unwrap_or(""), DIGEST_LINE_CAP)
}

fn render_line(m: &Message) -> String {
    let role = match m.role {
        Role::System => "system",
        Role::User => "user",
        Role::Assistant => "assistant",
        Role::Tool => "tool",
    };
    let calls: Vec<String> = m.tool_calls.iter().map(|c| format!("{}({})", c.tool_name, c.arguments)).collect();
    if calls.is_empty() {
        format!("[{role}] {}", m.content)
    } else {
        format!("[{role}] {} calls: {}", m.content, calls.join(", "))
    }
}

fn digest(messages: &[Message]) -> String {
    let mut lines = Vec::new();
    for m in messages {
        match m.role {
            Role::Assistant => {
                for c in &m.tool_calls {
                    lines.push(format!("- called {} {}", c.tool_name, cap_head(&c.arguments, DIGEST_LINE_CAP)));
                }
            }
            Role::Tool => {
                let body: Vec<&str> = m.content.lines().filter(|l| !l.trim().is_empty()).collect();
                let mut line = format!("  -> {}", first_line(&m.content));
                if m.content.starts_with("FAILURE") && body.len() > 1 {
                    line.push_str(&format!(" {}", cap_head(body[body.len() - 1].trim(), DIGEST_LINE_CAP)));
                }
                lines.push(line);
            }
            _ => {}
        }
    }
    if lines.is_empty() {
        lines.push("- no tool activity".to_string());
    }
    lines.join("\n")
}

#[derive(Debug, Clone, PartialEq)]
pub enum SummaryOutcome {
    Compacted { before: usize, after: usize },
    Skipped(String),
}

pub struct Conversation {
    messages: Vec<Message>,
    /// Every message ever appended, unaffected by compaction.
    transcript: Vec<Message>,
    since_summary: usize,
    threshold: usize,
    summaries: usize,
}

impl Conversation {
    pub fn new(system: impl Into<String>, user: impl Into<String>) -> Self {
        Self::with_threshold(system, user, SUMMARY_THRESHOLD)
    }

    pub fn with_threshold(system: impl Into<String>, user: impl Into<String>, threshold: usize) -> Self {
        let messages = vec![Message::system(system), Message::user(user)];
        Self {
            transcript: messages.clone(),
            messages,
            since_summary: 2,
            threshold,
            summaries: 0,
        }
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn summaries(&self) -> usize {
        self.summaries
    }

    pub fn transcript(&self) -> &[Message] {
        &self.transcript
    }

    pub fn push(&mut self, message: Message) {
        self.transcript.push(message.clone());
        self.messages.push(message);
        self.since_summary += 1;
    }

    pub fn needs_summary(&self) -> bool {
        self.since_summary > self.threshold
    }

    /// Index of the second-to-last assistant message.
    pub fn tail_start(&self) -> Option<usize> {
        let mut assistants = self.messages.iter().enumerate().rev().filter(|(_, m)| m.role == Role::Assistant);
        assistants.next()?;
        assistants.next().map(|(i, _)| i)
    }

    /// Replaces everything between the system message and the tail with one
    /// assistant summary: `[system, summary, tail...]`.
    pub fn compact(&mut self, summary: &str) -> SummaryOutcome {
        let Some(tail) = self.tail_start() else {
            return SummaryOutcome::Skipped("fewer than two assistant messages".to_string());
        };
        if tail <= 1 {
            return SummaryOutcome::Skipped("nothing precedes the retained tail".to_string());
        }
        let before = self.messages.len();
        let rest = self.messages.split_off(tail);
        self.messages.truncate(1);
        self.messages.push(Message::assistant(format!("{SUMMARY_PREFIX}\n{summary}")));
        self.messages.extend(rest);
        self.since_summary = 0;
        self.summaries += 1;
        SummaryOutcome::Compacted { before, after: self.messages.len() }
    }

    /// Summarizes the prefix before the tail. On summarizer failure the
    /// history is left untouched.
    pub fn summarize(&mut self, summarizer: &Summarizer) -> SummaryOutcome {
        let Some(tail) = self.tail_start().filter(|&t| t > 1) else {
            return SummaryOutcome::Skipped("nothing to summarize".to_string());
        };
        match summarizer.summarize(&self.messages[1..tail]) {
            Ok(text) => self.compact(&text),
            Err(e) => {
                log::warn!("summarization skipped: {e}");
                SummaryOutcome::Skipped(e)
            }
        }
    }
}

/// Structural violations: every assistant tool call must be answered by a
/// tool message before the next non-tool message, and no tool message may
/// stand without its call.
pub fn pairing_violations(history: &[Message]) -> Vec<String> {
    let mut problems = Vec::new();
    if history.first().map(|m| m.role) != Some(Role::System) {
        problems.push("history does not start with the system message".to_string());
    }
    if history.iter().skip(1).any(|m| m.role == Role::System) {
        problems.push("more than one system message".to_string());
    }
    let mut open: Vec<String> = Vec::new();
    for (i, m) in history.iter().enumerate() {
        match m.role {
            Role::Tool => {
                let id = m.tool_call_id.clone().unwrap_or_default();
                match open.iter().position(|c| *c == id) {
                    Some(p) => {
                        open.remove(p);
                    }
                    None => problems.push(format!("tool message {i} ('{id}') has no matching call")),
                }
            }
            _ => {
                if !open.is_empty() {
                    problems.push(format!("calls {open:?} unanswered before message {i}"));
                    open.clear();
                }
                if m.role == Role::Assistant {
                    open.extend(m.tool_calls.iter().map(|c| c.call_id.clone()));
                }
            }
        }
    }
    if !open.is_empty() {
        problems.push(format!("calls {open:?} unanswered at end of history"));
    }
    problems
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{GatewayError, ToolCallRequest};
    use crate::tools::ToolSpec;
    use serde_json::json;

    fn turn(c: &mut Conversation, n: usize) {
        let id = format!("call_{n}");
        c.push(Message::assistant_with_calls("", vec![ToolCallRequest::new(&id, "fetch_pdb", json!({"pdb_id": "1AKI"}))]));
        c.push(Message::tool(&id, "SUCCESS: ok"));
        c.push(Message::user("Next step: prep"));
    }

    #[test]
    fn compaction_keeps_last_two_assistants() {
        let mut c = Conversation::new("sys", "go");
        for n in 0..14 {
            turn(&mut c, n);
        }
        assert!(c.needs_summary());
        let last_two: Vec<Message> =
            c.messages().iter().filter(|m| m.role == Role::Assistant).rev().take(2).cloned().collect();
        let tail_len = c.len() - c.tail_start().unwrap();
        assert!(matches!(c.summarize(&Summarizer::Digest), SummaryOutcome::Compacted { .. }));
        assert_eq!(c.len(), 2 + tail_len);
        assert_eq!(c.messages()[0].content, "sys");
        assert!(c.messages()[1].content.starts_with(SUMMARY_PREFIX));
        for m in last_two {
            assert!(c.messages().contains(&m));
        }
        assert!(pairing_violations(c.messages()).is_empty());
        assert!(!c.needs_summary());
    }

    struct Broken;
    impl ChatBackend for Broken {
        fn complete(&self, _: &[Message], _: &[ToolSpec]) -> Result<Message, GatewayError> {
            Err(GatewayError::Transport { status: None, message: "down".into() })
        }
        fn describe(&self) -> String {
            "broken".into()
        }
    }

    #[test]
    fn failed_summary_skips_cycle() {
        let mut c = Conversation::new("sys", "go");
        for n in 0..14 {
            turn(&mut c, n);
        }
        let before = c.messages().to_vec();
        assert!(matches!(c.summarize(&Summarizer::Model(Arc::new(Broken))), SummaryOutcome::Skipped(_)));
        assert_eq!(c.messages(), &before[..]);
    }

    #[test]
    fn detects_unpaired_tool_message() {
        let history = vec![Message::system("s"), Message::tool("x", "orphan")];
        assert_eq!(pairing_violations(&history).len(), 1);
    }
}
