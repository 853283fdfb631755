//! Append/summarize fuzz driver for conversation histories.

use proptest::prelude::*;
use serde_json::json;

use mdagent_core::agent::{pairing_violations, Conversation, Summarizer, SummaryOutcome, SUMMARY_PREFIX};
use mdagent_core::gateway::{validate_history, Message, Role, ToolCallRequest};

#[derive(Debug, Clone)]
pub enum Op {
    User,
    Turn(usize),
    Summarize,
}

pub fn arb_op() -> impl Strategy<Value = Op> {
    prop_oneof![
        1 => Just(Op::User),
        4 => (0usize..4).prop_map(Op::Turn),
        1 => Just(Op::Summarize),
    ]
}

fn assistants(history: &[Message]) -> Vec<Message> {
    history.iter().filter(|m| m.role == Role::Assistant).cloned().collect()
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    }};
}

/// Replays `ops` and checks pairing, validity, size bound and last-two
/// retention after every step.
pub fn check_summarization(ops: &[Op], threshold: usize) -> Result<(), String> {
    let mut conv = Conversation::with_threshold("system", "user request", threshold);
    let mut next_id = 0;
    for op in ops {
        match op {
            Op::User => conv.push(Message::user("progress")),
            Op::Turn(n) => {
                let calls: Vec<ToolCallRequest> = (0..*n)
                    .map(|k| ToolCallRequest::new(format!("c{next_id}_{k}"), "fetch_pdb", json!({"pdb_id": "1AKI"})))
                    .collect();
                conv.push(Message::assistant_with_calls(format!("turn {next_id}"), calls.clone()));
                for c in &calls {
                    conv.push(Message::tool(c.call_id.clone(), "SUCCESS: ok"));
                }
                next_id += 1;
            }
            Op::Summarize => {
                let before = conv.messages().to_vec();
                let last_two: Vec<Message> = assistants(&before).into_iter().rev().take(2).rev().collect();
                let tail_len = conv.tail_start().map(|t| before.len() - t);
                match conv.summarize(&Summarizer::Digest) {
                    SummaryOutcome::Compacted { after, .. } => {
                        let msgs = conv.messages();
                        let tail_len = tail_len.ok_or("compacted without a tail")?;
                        ensure!(after == msgs.len(), "reported size {after} != {}", msgs.len());
                        ensure!(msgs.len() <= 2 + tail_len, "{} messages after summary, tail {tail_len}", msgs.len());
                        ensure!(msgs[0].role == Role::System, "first message is not system");
                        ensure!(msgs[1].content.starts_with(SUMMARY_PREFIX), "second message is not the summary");
                        ensure!(assistants(&msgs[2..]) == last_two, "last two assistant turns not retained");
                        ensure!(msgs[2..] == before[before.len() - tail_len..], "tail altered");
                    }
                    SummaryOutcome::Skipped(_) => ensure!(conv.messages() == &before[..], "skipped summary changed history"),
                }
            }
        }
        let problems = pairing_violations(conv.messages());
        ensure!(problems.is_empty(), "pairing violations: {problems:?}");
        validate_history(conv.messages())?;
    }
    Ok(())
}
