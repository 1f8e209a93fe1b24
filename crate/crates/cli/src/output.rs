use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";

/// Record written after every successful command.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub tool_version: String,
    /// Accepted for forward compatibility; the models are deterministic.
    pub seed: Option<u64>,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
}

/// Output directory that tracks every file it writes.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
    started: Instant,
}

impl OutputDir {
    /// Creates `root` and removes a manifest left by an earlier run, so a
    /// manifest exists only after a successful command.
    pub fn create(root: &Path) -> Result<Self, CliError> {
        let fail = |source| CliError::Write { path: root.to_path_buf(), source };
        std::fs::create_dir_all(root).map_err(fail)?;
        let stale = root.join(MANIFEST);
        if stale.exists() {
            std::fs::remove_file(&stale).map_err(|source| CliError::Write { path: stale, source })?;
        }
        Ok(Self { root: root.to_path_buf(), files: Vec::new(), started: Instant::now() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.root.join(name);
        std::fs::write(&path, contents).map_err(|source| CliError::Write { path, source })?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numeric(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn finish(self, command: &str, config: serde_json::Value, seed: Option<u64>) -> Result<PathBuf, CliError> {
        let manifest = RunManifest {
            command: command.to_string(),
            config,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            wall_time_s: self.started.elapsed().as_secs_f64(),
            outputs: self.files.clone(),
        };
        let path = self.root.join(MANIFEST);
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Numeric(e.to_string()))?;
        std::fs::write(&path, text + "\n").map_err(|source| CliError::Write { path: path.clone(), source })?;
        Ok(path)
    }
}

/// Serializes a snapshot for the manifest.
pub fn snapshot<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).unwrap_or(serde_json::Value::Null)
}
