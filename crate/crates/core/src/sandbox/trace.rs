use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::text::cap_tail;

/// Per-string cap applied to trace payloads.
pub const TRACE_EXCERPT_CAP: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Actor {
    Planner,
    Worker,
    Analyzer,
    Harness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    ToolCall,
    ToolOutcome,
    ModelTurn,
    PlanUpdate,
    SummaryEvent,
    Exit,
}

/// One line of `trace.log`. Field order is fixed for machine diffing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub seq: u64,
    pub timestamp: DateTime<Utc>,
    pub actor: Actor,
    pub kind: TraceKind,
    pub payload: Value,
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("trace i/o failure at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("trace {path} line {line} is malformed: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

pub(crate) struct TraceWriter {
    path: PathBuf,
    file: File,
    next_seq: u64,
    last: Option<DateTime<Utc>>,
}

impl TraceWriter {
    pub(crate) fn open(path: &Path) -> Result<Self, TraceError> {
        let io = |source| TraceError::Io {
            path: path.to_path_buf(),
            source,
        };
        let existing = if path.exists() {
            read_trace(path)?
        } else {
            Vec::new()
        };
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io)?;
        Ok(Self {
            path: path.to_path_buf(),
            file,
            next_seq: existing.last().map(|r| r.seq + 1).unwrap_or(0),
            last: existing.last().map(|r| r.timestamp),
        })
    }

    pub(crate) fn append(
        &mut self,
        actor: Actor,
        kind: TraceKind,
        mut payload: Value,
    ) -> Result<TraceRecord, TraceError> {
        cap_strings(&mut payload);
        let mut timestamp = Utc::now();
        if let Some(last) = self.last {
            if timestamp < last {
                timestamp = last;
            }
        }
        let record = TraceRecord {
            seq: self.next_seq,
            timestamp,
            actor,
            kind,
            payload,
        };
        let mut line = serde_json::to_string(&SerRecord(&record)).map_err(|e| TraceError::Io {
            path: self.path.clone(),
            source: std::io::Error::other(e),
        })?;
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|source| TraceError::Io {
                path: self.path.clone(),
                source,
            })?;
        self.next_seq += 1;
        self.last = Some(timestamp);
        Ok(record)
    }
}

/// Serializes timestamps with fixed microsecond precision.
struct SerRecord<'a>(&'a TraceRecord);

impl Serialize for SerRecord<'_> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let r = self.0;
        let mut s = serializer.serialize_struct("TraceRecord", 5)?;
        s.serialize_field("seq", &r.seq)?;
        s.serialize_field(
            "timestamp",
            &r.timestamp.to_rfc3339_opts(SecondsFormat::Micros, true),
        )?;
        s.serialize_field("actor", &r.actor)?;
        s.serialize_field("kind", &r.kind)?;
        s.serialize_field("payload", &r.payload)?;
        s.end()
    }
}

fn cap_strings(value: &mut Value) {
    match value {
        Value::String(s) if s.len() > TRACE_EXCERPT_CAP => *s = cap_tail(s, TRACE_EXCERPT_CAP),
        Value::Array(items) => items.iter_mut().for_each(cap_strings),
        Value::Object(map) => map.values_mut().for_each(cap_strings),
        _ => {}
    }
}

/// Reads every record of a trace file. A malformed line is an error.
pub fn read_trace(path: &Path) -> Result<Vec<TraceRecord>, TraceError> {
    let file = File::open(path).map_err(|source| TraceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| TraceError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| TraceError::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}
