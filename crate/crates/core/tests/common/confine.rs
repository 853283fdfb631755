//! Hostile-path fixture shared by the confinement tests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use proptest::prelude::*;
use serde_json::json;

use mdagent_core::gateway::ToolCallRequest;
use mdagent_core::md::{build_registry, MockBackend, ToolsetOptions};
use mdagent_core::sandbox::{Actor, Sandbox};
use mdagent_core::tools::ToolRegistry;

/// Stands in for the per-case absolute path of the outside directory.
pub const OUTSIDE_PLACEHOLDER: &str = "/placeholder/outside";

/// Path -> (length, contents) for every file under `dir`, skipping `except`.
pub fn snapshot(dir: &Path, except: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let entry = entry.unwrap();
            let path = entry.path();
            if path.starts_with(except) {
                continue;
            }
            let meta = std::fs::symlink_metadata(&path).unwrap();
            if meta.is_dir() {
                stack.push(path.clone());
                out.insert(path, Vec::new());
            } else if meta.is_symlink() {
                out.insert(path.clone(), std::fs::read_link(&path).unwrap().to_string_lossy().as_bytes().to_vec());
            } else {
                out.insert(path.clone(), std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

pub struct Arena {
    pub tempdir: tempfile::TempDir,
    pub base: PathBuf,
    pub outside: PathBuf,
    pub sandbox: Sandbox,
    pub registry: ToolRegistry,
}

pub fn arena() -> Arena {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().canonicalize().unwrap();
    let outside = base.join("outside");
    std::fs::create_dir_all(outside.join("etc")).unwrap();
    std::fs::write(outside.join("victim.txt"), "keep me").unwrap();
    std::fs::write(outside.join("etc/passwd"), "root:x:0:0").unwrap();
    let sandbox = Sandbox::create(&base.join("runs"), "run").unwrap();
    std::os::unix::fs::symlink(&outside, sandbox.root().join("link")).unwrap();
    std::os::unix::fs::symlink(outside.join("victim.txt"), sandbox.root().join("victim_link.txt")).unwrap();
    sandbox.write("complex.pdb", "ATOM      1  CL1 UNL A   1\n").unwrap();
    let registry = build_registry(ToolsetOptions::new(Arc::new(MockBackend::new()))).unwrap();
    Arena { tempdir: dir, base, outside, sandbox, registry }
}

pub const PIECES: [&str; 16] = [
    "..", "..", ".", "link", "victim_link.txt", "", "etc", "passwd", "victim.txt", "outside", "a", "\\..", "C:", "%2e%2e", "~",
    "runs",
];

pub fn hostile_path() -> impl Strategy<Value = String> {
    let outside = OUTSIDE_PLACEHOLDER;
    (
        prop::collection::vec(0..PIECES.len(), 1..7),
        prop::sample::select(vec!["/", "\\", "//"]),
        0u8..6,
    )
        .prop_map(move |(idx, sep, prefix)| {
            let body = idx.iter().map(|&i| PIECES[i]).collect::<Vec<_>>().join(sep);
            match prefix {
                0 => format!("/{body}"),
                1 => format!("{outside}/{body}"),
                2 => format!("{body}\0x"),
                3 => format!("..{sep}{body}"),
                _ => body,
            }
        })
}

pub fn attack(a: &Arena, path: &str) {
    let dispatch = |args: serde_json::Value| {
        a.registry.dispatch(&ToolCallRequest::new("x", "file_tool", args), &a.sandbox, Actor::Worker).unwrap();
    };
    dispatch(json!({"action": "write", "path": path, "content": "pwned"}));
    dispatch(json!({"action": "edit", "path": path, "find_text": "keep", "replace_text": "lost"}));
    dispatch(json!({"action": "edit", "path": path, "line_start": 1, "line_end": 1, "replacement": "lost"}));
    dispatch(json!({"action": "read", "path": path}));
    dispatch(json!({"action": "list", "path": path}));
    let _ = a.sandbox.write(path, "pwned");
    let _ = a.sandbox.remove(path);
    let _ = a.registry.dispatch(
        &ToolCallRequest::new("y", "prepare_structures", json!({"pdb_file": path, "ligands": []})),
        &a.sandbox,
        Actor::Worker,
    );
}

/// Runs every attack with `path` in a fresh arena and compares the
/// filesystem outside the run directory before and after.
pub fn check_confinement(path: &str) -> Result<(), String> {
    let a = arena();
    let path = path.replace(OUTSIDE_PLACEHOLDER, a.outside.to_str().unwrap());
    let before = snapshot(&a.base, a.sandbox.root());
    attack(&a, &path);
    let after = snapshot(&a.base, a.sandbox.root());
    if before != after {
        return Err(format!("outside state changed for {path:?}"));
    }
    if std::fs::read_to_string(a.outside.join("victim.txt")).unwrap() != "keep me" {
        return Err(format!("victim modified by {path:?}"));
    }
    Ok(())
}
