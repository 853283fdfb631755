//! TOML configuration file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::SUMMARY_THRESHOLD;
use crate::gateway::ModelConfig;
use crate::md::{ExecutablePaths, ForceFieldChoice};
use crate::retrieval::DEFAULT_K;
use crate::MAX_ITERATIONS;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSettings {
    pub workdir: PathBuf,
    pub padding_angstrom: f64,
    pub tool_timeout_secs: u64,
    pub summary_threshold: usize,
    pub max_iterations: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            workdir: PathBuf::from("runs"),
            padding_angstrom: 10.0,
            tool_timeout_secs: 600,
            summary_threshold: SUMMARY_THRESHOLD,
            max_iterations: MAX_ITERATIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetrievalSettings {
    /// Directory of `.txt`/`.md` papers for `search_papers`.
    pub corpus_dir: Option<PathBuf>,
    pub k: usize,
}

impl Default for RetrievalSettings {
    fn default() -> Self {
        Self { corpus_dir: None, k: DEFAULT_K }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub model: ModelConfig,
    pub executables: ExecutablePaths,
    pub forcefield: ForceFieldChoice,
    pub run: RunSettings,
    pub retrieval: RetrievalSettings,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        let config: Self = toml::from_str(text).map_err(|e| e.to_string())?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text).map_err(|message| ConfigError::Invalid { path: path.to_path_buf(), message })
    }

    pub fn validate(&self) -> Result<(), String> {
        self.model.validate()?;
        if self.run.padding_angstrom.is_nan() || self.run.padding_angstrom <= 0.0 {
            return Err("run.padding_angstrom must be positive".to_string());
        }
        if self.run.max_iterations == 0 || self.run.max_iterations > MAX_ITERATIONS {
            return Err(format!("run.max_iterations must be in 1..={MAX_ITERATIONS}"));
        }
        if self.run.summary_threshold < 4 {
            return Err("run.summary_threshold must be at least 4".to_string());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let c = Config::from_toml("[model]\nmodel_id = \"x/y\"\n[executables]\ngmx = \"/opt/gmx\"\n").unwrap();
        assert_eq!(c.model.model_id, "x/y");
        assert_eq!(c.executables.gmx, PathBuf::from("/opt/gmx"));
        assert_eq!(c.executables.tleap, PathBuf::from("tleap"));
        assert_eq!(c.run.max_iterations, 35);
        assert_eq!(Config::from_toml("").unwrap(), Config::default());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Config::from_toml("[run]\nmax_iterations = 50\n").is_err());
        assert!(Config::from_toml("[model]\ntemperature = 5.0\n").is_err());
        assert!(Config::from_toml("[model\n").is_err());
    }
}
