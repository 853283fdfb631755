//! Path-confined run directories, the agent-facing file tool, and the
//! append-only trace log.
//!
//! Layout of one run: `<workdir>/<run_id>/` holding the input structure,
//! `mdp/` seeds, generated artifacts, `trace.log`, `analysis.txt` and
//! `exit_report.md`.

mod files;
mod trace;

pub use files::{file_tool_handler, FileTool, FILE_READ_CAP};
pub use trace::{read_trace, Actor, TraceError, TraceKind, TraceRecord, TRACE_EXCERPT_CAP};

use std::path::{Component, Path, PathBuf};
use std::sync::Mutex;

use serde_json::Value;

use trace::TraceWriter;

pub const TRACE_FILE: &str = "trace.log";

#[derive(Debug, thiserror::Error)]
pub enum SandboxError {
    #[error("path '{path}' escapes the sandbox: {reason}")]
    Escape { path: String, reason: &'static str },
    #[error("run directory {0} already exists")]
    Collision(PathBuf),
    #[error("file not found: {0}")]
    NotFound(String),
    #[error("{0} is append-only and cannot be modified by tools")]
    Protected(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Trace(#[from] TraceError),
}

impl SandboxError {
    pub fn is_escape(&self) -> bool {
        matches!(self, SandboxError::Escape { .. })
    }
}

/// A file inserted or rewritten through the file tool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditEvent {
    pub path: String,
    pub inserted: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileEntry {
    pub path: String,
    pub size: u64,
}

pub struct Sandbox {
    root: PathBuf,
    run_id: String,
    trace: Mutex<TraceWriter>,
    edits: Mutex<Vec<EditEvent>>,
}

impl std::fmt::Debug for Sandbox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Sandbox")
            .field("root", &self.root)
            .field("run_id", &self.run_id)
            .finish()
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SandboxError + '_ {
    move |source| SandboxError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl Sandbox {
    /// Creates `<workdir>/<run_id>/`. Fails if the run directory exists, so
    /// two runs can never share a sandbox.
    pub fn create(workdir: &Path, run_id: &str) -> Result<Self, SandboxError> {
        if run_id.is_empty() || run_id.contains(['/', '\\']) || run_id == "." || run_id == ".." {
            return Err(SandboxError::Escape {
                path: run_id.to_string(),
                reason: "run id must be a single path component",
            });
        }
        std::fs::create_dir_all(workdir).map_err(io_err(workdir))?;
        let dir = workdir.join(run_id);
        match std::fs::create_dir(&dir) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(SandboxError::Collision(dir))
            }
            Err(e) => return Err(io_err(&dir)(e)),
        }
        Self::open(&dir)
    }

    /// Opens an existing run directory, appending to its trace.
    pub fn open(dir: &Path) -> Result<Self, SandboxError> {
        let root = dir.canonicalize().map_err(io_err(dir))?;
        let run_id = root
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let trace = TraceWriter::open(&root.join(TRACE_FILE))?;
        Ok(Self {
            root,
            run_id,
            trace: Mutex::new(trace),
            edits: Mutex::new(Vec::new()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn run_id(&self) -> &str {
        &self.run_id
    }

    pub fn trace_path(&self) -> PathBuf {
        self.root.join(TRACE_FILE)
    }

    /// Maps a sandbox-relative path to an absolute one inside the root.
    pub fn resolve(&self, relative: &str) -> Result<PathBuf, SandboxError> {
        let escape = |reason| SandboxError::Escape {
            path: relative.to_string(),
            reason,
        };
        if relative.contains('\0') {
            return Err(escape("NUL byte in path"));
        }
        let normalized = relative.replace('\\', "/");
        if normalized.starts_with('/') {
            return Err(escape("absolute or UNC path"));
        }
        let bytes = normalized.as_bytes();
        if bytes.len() >= 2 && bytes[1] == b':' && bytes[0].is_ascii_alphabetic() {
            return Err(escape("drive-qualified path"));
        }
        let mut parts: Vec<&str> = Vec::new();
        for part in normalized.split('/') {
            match part {
                "" | "." => {}
                ".." => {
                    if parts.pop().is_none() {
                        return Err(escape("parent traversal above the run directory"));
                    }
                }
                other => parts.push(other),
            }
        }
        let mut path = self.root.clone();
        for part in &parts {
            path.push(part);
        }
        if path
            .components()
            .any(|c| !matches!(c, Component::Normal(_) | Component::RootDir | Component::Prefix(_)))
        {
            return Err(escape("non-normal path component"));
        }
        let mut probe = path.as_path();
        loop {
            if probe.symlink_metadata().is_ok() {
                let real = probe.canonicalize().map_err(io_err(probe))?;
                if !real.starts_with(&self.root) {
                    return Err(escape("symbolic link leaves the run directory"));
                }
                break;
            }
            match probe.parent() {
                Some(parent) if parent.starts_with(&self.root) => probe = parent,
                _ => break,
            }
        }
        Ok(path)
    }

    /// Sandbox-relative form of an absolute path, with `/` separators.
    pub fn relative(&self, path: &Path) -> Option<String> {
        let rel = path.strip_prefix(&self.root).ok()?;
        let parts: Vec<String> = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect();
        Some(parts.join("/"))
    }

    fn is_trace(&self, path: &Path) -> bool {
        path == self.root.join(TRACE_FILE)
    }

    /// Writes a file, creating parent directories inside the root.
    pub fn write(&self, relative: &str, bytes: impl AsRef<[u8]>) -> Result<PathBuf, SandboxError> {
        let path = self.resolve(relative)?;
        if self.is_trace(&path) {
            return Err(SandboxError::Protected(TRACE_FILE.to_string()));
        }
        if path == self.root {
            return Err(SandboxError::Escape {
                path: relative.to_string(),
                reason: "cannot write to the run directory itself",
            });
        }
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        let path = self.resolve(relative)?;
        std::fs::write(&path, bytes).map_err(io_err(&path))?;
        Ok(path)
    }

    pub fn read_bytes(&self, relative: &str) -> Result<Vec<u8>, SandboxError> {
        let path = self.resolve(relative)?;
        if !path.is_file() {
            return Err(SandboxError::NotFound(relative.to_string()));
        }
        std::fs::read(&path).map_err(io_err(&path))
    }

    pub fn read_string(&self, relative: &str) -> Result<String, SandboxError> {
        let bytes = self.read_bytes(relative)?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }

    pub fn exists(&self, relative: &str) -> bool {
        self.resolve(relative).is_ok_and(|p| p.is_file())
    }

    /// True when the file exists and has at least one byte.
    pub fn nonempty(&self, relative: &str) -> bool {
        self.resolve(relative)
            .ok()
            .and_then(|p| std::fs::metadata(p).ok())
            .is_some_and(|m| m.is_file() && m.len() > 0)
    }

    pub fn remove(&self, relative: &str) -> Result<(), SandboxError> {
        let path = self.resolve(relative)?;
        if self.is_trace(&path) {
            return Err(SandboxError::Protected(TRACE_FILE.to_string()));
        }
        std::fs::remove_file(&path).map_err(io_err(&path))
    }

    /// Every regular file under the root (recursively), sorted, excluding
    /// the trace log.
    pub fn list(&self) -> Result<Vec<FileEntry>, SandboxError> {
        let mut out = Vec::new();
        let mut stack = vec![self.root.clone()];
        while let Some(dir) = stack.pop() {
            for entry in std::fs::read_dir(&dir).map_err(io_err(&dir))? {
                let entry = entry.map_err(io_err(&dir))?;
                let path = entry.path();
                let meta = entry.metadata().map_err(io_err(&path))?;
                if meta.is_dir() {
                    stack.push(path);
                } else if meta.is_file() && !self.is_trace(&path) {
                    if let Some(rel) = self.relative(&path) {
                        out.push(FileEntry {
                            path: rel,
                            size: meta.len(),
                        });
                    }
                }
            }
        }
        out.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(out)
    }

    pub fn append_trace(
        &self,
        actor: Actor,
        kind: TraceKind,
        payload: Value,
    ) -> Result<TraceRecord, TraceError> {
        let mut writer = self.trace.lock().unwrap_or_else(|e| e.into_inner());
        writer.append(actor, kind, payload)
    }

    pub fn read_trace(&self) -> Result<Vec<TraceRecord>, TraceError> {
        read_trace(&self.trace_path())
    }

    pub fn record_edit(&self, path: &str, inserted: &str) {
        let mut edits = self.edits.lock().unwrap_or_else(|e| e.into_inner());
        edits.push(EditEvent {
            path: path.to_string(),
            inserted: inserted.to_string(),
        });
    }

    /// Edits applied through the file tool during this run, oldest first.
    pub fn edits(&self) -> Vec<EditEvent> {
        self.edits.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sandbox() -> (tempfile::TempDir, Sandbox) {
        let dir = tempfile::tempdir().unwrap();
        let sb = Sandbox::create(dir.path(), "run-1").unwrap();
        (dir, sb)
    }

    #[test]
    fn resolves_inside_root() {
        let (_d, sb) = sandbox();
        assert_eq!(sb.resolve("em.gro").unwrap(), sb.root().join("em.gro"));
        assert_eq!(
            sb.resolve("sub/dir/../dir/topol.top").unwrap(),
            sb.root().join("sub/dir/topol.top")
        );
        sb.write("sub/dir/topol.top", "x").unwrap();
        assert!(sb.nonempty("sub/dir/topol.top"));
    }

    #[test]
    fn hostile_paths_are_rejected() {
        let (_d, sb) = sandbox();
        for bad in [
            "../../etc/passwd",
            "/etc/passwd",
            "\\\\server\\share",
            "C:\\Windows",
            "a/../../b",
            "..\\x",
            "nul\0byte",
        ] {
            assert!(sb.resolve(bad).unwrap_err().is_escape(), "{bad}");
        }
    }

    #[cfg(unix)]
    #[test]
    fn symlinks_out_of_root_are_rejected() {
        let (d, sb) = sandbox();
        let outside = d.path().join("outside");
        std::fs::create_dir(&outside).unwrap();
        std::os::unix::fs::symlink(&outside, sb.root().join("link")).unwrap();
        assert!(sb.resolve("link/file.txt").unwrap_err().is_escape());
        assert!(sb.write("link/file.txt", "x").is_err());
        assert!(!outside.join("file.txt").exists());
    }

    #[test]
    fn run_directories_never_collide() {
        let dir = tempfile::tempdir().unwrap();
        Sandbox::create(dir.path(), "same").unwrap();
        assert!(matches!(
            Sandbox::create(dir.path(), "same"),
            Err(SandboxError::Collision(_))
        ));
    }

    #[test]
    fn trace_is_hidden_and_protected() {
        let (_d, sb) = sandbox();
        sb.append_trace(Actor::Harness, TraceKind::Exit, serde_json::json!({}))
            .unwrap();
        sb.write("a.txt", "1").unwrap();
        let listed: Vec<String> = sb.list().unwrap().into_iter().map(|e| e.path).collect();
        assert_eq!(listed, ["a.txt"]);
        assert!(matches!(
            sb.write("trace.log", "x"),
            Err(SandboxError::Protected(_))
        ));
    }
}
