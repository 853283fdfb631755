use std::sync::Arc;

use super::{Sandbox, SandboxError};
use crate::text::cap_tail;
use crate::tools::{
    Arguments, FailureKind, ToolContext, ToolFailure, ToolHandler, ToolResult, ToolSuccess,
};

/// Byte cap for `read`; the tail of larger files is returned with a note.
pub const FILE_READ_CAP: usize = 256 * 1024;

impl From<SandboxError> for ToolFailure {
    fn from(err: SandboxError) -> Self {
        let kind = match &err {
            SandboxError::Escape { .. } | SandboxError::Protected(_) => FailureKind::Sandbox,
            SandboxError::NotFound(_) => FailureKind::Precondition,
            _ => FailureKind::Io,
        };
        ToolFailure::new(kind, err.to_string())
    }
}

/// The agent's list/read/write/edit access to its run directory.
#[derive(Debug, Default, Clone, Copy)]
pub struct FileTool;

pub fn file_tool_handler() -> Arc<dyn ToolHandler> {
    Arc::new(FileTool)
}

impl ToolHandler for FileTool {
    fn invoke(&self, args: &Arguments, ctx: &ToolContext<'_>) -> ToolResult {
        let sb = ctx.sandbox;
        match args.str("action")? {
            "list" => list(sb),
            "read" => read(sb, args.str("path")?),
            "write" => {
                let path = args.str("path")?;
                let content = args.opt_str("content").unwrap_or_default();
                sb.write(path, content)?;
                sb.record_edit(path, content);
                Ok(ToolSuccess::new(format!("wrote {} bytes to {path}", content.len()))
                    .with_artifacts([path]))
            }
            "edit" => edit(sb, args),
            other => Err(ToolFailure::new(
                FailureKind::InvalidArguments,
                format!("unknown file action '{other}'"),
            )),
        }
    }
}

fn list(sb: &Sandbox) -> ToolResult {
    let entries = sb.list()?;
    if entries.is_empty() {
        return Ok(ToolSuccess::new("run directory is empty"));
    }
    let lines: Vec<String> = entries
        .iter()
        .map(|e| format!("{} ({} bytes)", e.path, e.size))
        .collect();
    Ok(ToolSuccess::new(format!(
        "{} files:\n{}",
        entries.len(),
        lines.join("\n")
    )))
}

fn read(sb: &Sandbox, path: &str) -> ToolResult {
    let text = sb.read_string(path)?;
    if text.len() > FILE_READ_CAP {
        return Ok(ToolSuccess::new(format!(
            "{}\n[note: {path} is {} bytes; only the last {FILE_READ_CAP} bytes are shown]",
            cap_tail(&text, FILE_READ_CAP),
            text.len()
        )));
    }
    Ok(ToolSuccess::new(text))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Occurrence {
    All,
    First,
    Unique,
}

fn edit(sb: &Sandbox, args: &Arguments) -> ToolResult {
    let path = args.str("path")?;
    let original = sb.read_string(path)?;
    let (updated, inserted, summary) = if let Some(find) = args.opt_str("find_text") {
        let replace = args.opt_str("replace_text").ok_or_else(|| {
            ToolFailure::new(
                FailureKind::InvalidArguments,
                "edit with find_text also needs replace_text",
            )
        })?;
        let policy = match args.opt_str("occurrence").unwrap_or("all") {
            "all" => Occurrence::All,
            "first" => Occurrence::First,
            "unique" => Occurrence::Unique,
            other => {
                return Err(ToolFailure::new(
                    FailureKind::InvalidArguments,
                    format!("unknown occurrence policy '{other}'"),
                ))
            }
        };
        let (text, count) = find_replace(&original, find, replace, policy)
            .map_err(|m| ToolFailure::precondition(format!("{path}: {m}")))?;
        let plural = if count == 1 { "" } else { "s" };
        (text, replace.to_string(), format!("{count} replacement{plural} in {path}"))
    } else if let (Some(start), Some(end)) = (args.opt_i64("line_start"), args.opt_i64("line_end")) {
        let replacement = args.opt_str("replacement").unwrap_or_default();
        let text = replace_lines(&original, start, end, replacement)
            .map_err(|m| ToolFailure::precondition(format!("{path}: {m}")))?;
        (
            text,
            replacement.to_string(),
            format!("replaced lines {start}-{end} in {path}"),
        )
    } else {
        return Err(ToolFailure::new(
            FailureKind::InvalidArguments,
            "edit needs either find_text/replace_text or line_start/line_end/replacement",
        ));
    };
    sb.write(path, &updated)?;
    sb.record_edit(path, &inserted);
    Ok(ToolSuccess::new(summary).with_artifacts([path]))
}

fn find_replace(
    text: &str,
    find: &str,
    replace: &str,
    policy: Occurrence,
) -> Result<(String, usize), String> {
    if find.is_empty() {
        return Err("find_text must not be empty".to_string());
    }
    let count = text.matches(find).count();
    match (count, policy) {
        (0, _) => Err(format!("no match for '{find}'")),
        (n, Occurrence::Unique) if n > 1 => Err(format!(
            "'{find}' matches {n} times but occurrence=unique"
        )),
        (_, Occurrence::First) => Ok((text.replacen(find, replace, 1), 1)),
        (n, _) => Ok((text.replace(find, replace), n)),
    }
}

/// Replaces 1-based inclusive lines `start..=end`. The replacement takes
/// over the line terminator of the last replaced line.
fn replace_lines(text: &str, start: i64, end: i64, replacement: &str) -> Result<String, String> {
    let lines: Vec<&str> = text.split_inclusive('\n').collect();
    if start < 1 || end < start || end as usize > lines.len() {
        return Err(format!(
            "line range {start}-{end} is outside 1-{}",
            lines.len()
        ));
    }
    let (s, e) = (start as usize - 1, end as usize);
    let last_had_newline = lines[e - 1].ends_with('\n');
    let mut out = String::with_capacity(text.len() + replacement.len());
    out.extend(lines[..s].iter().copied());
    out.push_str(replacement);
    if last_had_newline && !replacement.is_empty() && !replacement.ends_with('\n') {
        out.push('\n');
    }
    out.extend(lines[e..].iter().copied());
    Ok(out)
}
