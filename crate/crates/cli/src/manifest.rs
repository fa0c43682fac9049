// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::error::{io_error, CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

/// What produced a run directory, written once when the run finishes.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub command: String,
    /// Effective settings after merging flags and the config file.
    pub config: Value,
    pub seeds: Vec<u64>,
    pub rng: String,
    pub version: String,
    /// Paths relative to the run directory.
    pub outputs: Vec<String>,
    pub duration_seconds: f64,
}

/// A run directory being filled; files are recorded as they are written.
pub struct RunDir {
    root: PathBuf,
    outputs: Vec<String>,
    started: Instant,
}

impl RunDir {
    /// Creates `root` if needed; refuses a directory that already holds a manifest.
    pub fn open(root: &Path) -> CliResult<Self> {
        if root.join(MANIFEST_FILE).exists() {
            return Err(CliError::Config(format!(
                "{} already holds a {MANIFEST_FILE}; choose a fresh output directory",
                root.display()
            )));
        }
        std::fs::create_dir_all(root).map_err(|e| io_error("create", root, e))?;
        Ok(Self { root: root.to_path_buf(), outputs: Vec::new(), started: Instant::now() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.root.join(name);
        std::fs::write(&path, contents).map_err(|e| io_error("write", &path, e))?;
        self.record(&path);
        Ok(path)
    }

    /// Notes a file some other writer put inside the directory.
    pub fn record(&mut self, path: &Path) {
        let rel = path.strip_prefix(&self.root).unwrap_or(path);
        self.outputs.push(rel.to_string_lossy().into_owned());
    }

    pub fn finish(self, command: &str, config: Value, seeds: Vec<u64>) -> CliResult<PathBuf> {
        let manifest = RunManifest {
            command_line: std::env::args().collect(),
            command: command.into(),
            config,
            seeds,
            rng: whitebox_core::tasks::RNG_ALGORITHM.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            outputs: self.outputs,
            duration_seconds: self.started.elapsed().as_secs_f64(),
        };
        let path = self.root.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        std::fs::write(&path, text).map_err(|e| io_error("write", &path, e))?;
        Ok(path)
    }
}
