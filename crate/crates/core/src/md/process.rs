//! External process runner: working directory, timeout with kill, and
//! full output capture.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use crate::tools::{FailureKind, ToolFailure};

#[derive(Debug, Clone)]
pub struct ProcessSpec {
    pub program: PathBuf,
    pub args: Vec<String>,
    pub stdin: Option<String>,
}

impl ProcessSpec {
    pub fn new(program: impl Into<PathBuf>, args: &[&str]) -> Self {
        Self {
            program: program.into(),
            args: args.iter().map(|s| s.to_string()).collect(),
            stdin: None,
        }
    }

    pub fn stdin(mut self, input: impl Into<String>) -> Self {
        self.stdin = Some(input.into());
        self
    }

    fn display(&self) -> String {
        let mut parts = vec![self.program.display().to_string()];
        parts.extend(self.args.iter().cloned());
        parts.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessOutput {
    pub stdout: String,
    pub stderr: String,
}

impl ProcessOutput {
    pub fn combined(&self) -> String {
        match (self.stdout.is_empty(), self.stderr.is_empty()) {
            (_, true) => self.stdout.clone(),
            (true, false) => self.stderr.clone(),
            (false, false) => format!("{}\n{}", self.stdout, self.stderr),
        }
    }
}

fn drain<R: Read + Send + 'static>(reader: Option<R>) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(mut r) = reader {
            let _ = r.read_to_end(&mut buf);
        }
        String::from_utf8_lossy(&buf).into_owned()
    })
}

/// Runs a program inside `cwd`. Nonzero exit, spawn failure and timeout
/// all become failures carrying the captured output.
pub fn run(spec: &ProcessSpec, cwd: &Path, timeout: Duration) -> Result<ProcessOutput, ToolFailure> {
    let mut child = Command::new(&spec.program)
        .args(&spec.args)
        .current_dir(cwd)
        .stdin(if spec.stdin.is_some() {
            Stdio::piped()
        } else {
            Stdio::null()
        })
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| {
            ToolFailure::new(
                FailureKind::ProcessExit,
                format!("could not start {}: {e}", spec.program.display()),
            )
        })?;
    if let (Some(input), Some(mut pipe)) = (&spec.stdin, child.stdin.take()) {
        let _ = pipe.write_all(input.as_bytes());
    }
    let out = drain(child.stdout.take());
    let err = drain(child.stderr.take());
    let started = Instant::now();
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) if started.elapsed() >= timeout => {
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            Ok(None) => thread::sleep(Duration::from_millis(20)),
            Err(e) => {
                return Err(ToolFailure::new(
                    FailureKind::ProcessExit,
                    format!("waiting for {} failed: {e}", spec.program.display()),
                ))
            }
        }
    };
    let output = ProcessOutput {
        stdout: out.join().unwrap_or_default(),
        stderr: err.join().unwrap_or_default(),
    };
    match status {
        None => Err(ToolFailure::new(
            FailureKind::Timeout,
            format!(
                "`{}` timed out after {} s and was killed\n{}",
                spec.display(),
                timeout.as_secs(),
                output.combined()
            ),
        )),
        Some(s) if !s.success() => Err(ToolFailure::new(
            FailureKind::ProcessExit,
            format!(
                "`{}` exited with {}\n{}",
                spec.display(),
                s.code().map(|c| format!("status {c}")).unwrap_or_else(|| "a signal".into()),
                output.combined()
            ),
        )),
        Some(_) => Ok(output),
    }
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;

    #[test]
    fn captures_output_and_failures() {
        let dir = tempfile::tempdir().unwrap();
        let ok = run(&ProcessSpec::new("sh", &["-c", "echo hi; pwd"]), dir.path(), Duration::from_secs(5)).unwrap();
        assert!(ok.stdout.starts_with("hi\n"));
        let fail = run(
            &ProcessSpec::new("sh", &["-c", "echo first; echo 'FATAL: boom' >&2; exit 3"]),
            dir.path(),
            Duration::from_secs(5),
        )
        .unwrap_err();
        assert_eq!(fail.kind, FailureKind::ProcessExit);
        assert!(fail.message.contains("status 3"));
        assert!(fail.message.ends_with("FATAL: boom\n"));
        let piped = run(&ProcessSpec::new("cat", &[]).stdin("4\n4\n"), dir.path(), Duration::from_secs(5)).unwrap();
        assert_eq!(piped.stdout, "4\n4\n");
    }

    #[test]
    fn timeout_kills() {
        let dir = tempfile::tempdir().unwrap();
        let started = Instant::now();
        let err = run(&ProcessSpec::new("sleep", &["5"]), dir.path(), Duration::from_millis(200)).unwrap_err();
        assert_eq!(err.kind, FailureKind::Timeout);
        assert!(started.elapsed() < Duration::from_secs(3));
    }

    #[test]
    fn missing_program() {
        let dir = tempfile::tempdir().unwrap();
        let err = run(&ProcessSpec::new("/nonexistent/antechamber", &[]), dir.path(), Duration::from_secs(1)).unwrap_err();
        assert!(err.message.contains("could not start"));
    }
}
