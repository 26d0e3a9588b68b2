//! Append-only run manifests: one JSON object per line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileDigest {
    pub path: String,
    /// Hex SHA-256 of the file, or of the sorted `path\0digest\n` listing of
    /// a directory's files. `None` when the path does not exist.
    pub sha256: Option<String>,
}

impl FileDigest {
    pub fn of(path: &Path) -> Self {
        Self {
            path: path.display().to_string(),
            sha256: digest_path(path).ok(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn digest_path(path: &Path) -> Result<String> {
    if path.is_dir() {
        let mut listing = Sha256::new();
        for entry in walkdir::WalkDir::new(path).sort_by_file_name() {
            let entry = entry.map_err(|e| {
                let p = e.path().unwrap_or(path).to_path_buf();
                Error::io(p, e.into())
            })?;
            if entry.file_type().is_file() {
                let rel = entry.path().strip_prefix(path).unwrap_or(entry.path());
                listing.update(rel.to_string_lossy().as_bytes());
                listing.update(b"\0");
                listing.update(digest_path(entry.path())?.as_bytes());
                listing.update(b"\n");
            }
        }
        Ok(format!("{:x}", listing.finalize()))
    } else {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(sha256_hex(&bytes))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub started_unix_ms: u128,
    pub elapsed_ms: u128,
    pub exit_code: i32,
    pub error: Option<String>,
}

/// Collects a manifest while a command runs.
#[derive(Debug)]
pub struct ManifestRecorder {
    command: String,
    config: serde_json::Value,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    started: SystemTime,
    clock: Instant,
}

impl ManifestRecorder {
    pub fn start(command: &str) -> Self {
        Self {
            command: command.to_owned(),
            config: serde_json::Value::Null,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: SystemTime::now(),
            clock: Instant::now(),
        }
    }

    pub fn config(&mut self, snapshot: impl Serialize) {
        self.config = serde_json::to_value(snapshot).unwrap_or(serde_json::Value::Null);
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn finish(self, outcome: &Result<()>) -> RunManifest {
        RunManifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION").to_owned(),
            config: self.config,
            inputs: self.inputs.iter().map(|p| FileDigest::of(p)).collect(),
            outputs: self.outputs.iter().map(|p| FileDigest::of(p)).collect(),
            started_unix_ms: self.started.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis()),
            elapsed_ms: self.clock.elapsed().as_millis(),
            exit_code: outcome.as_ref().map_or_else(Error::exit_code, |_| 0),
            error: outcome.as_ref().err().map(ToString::to_string),
        }
    }
}

impl RunManifest {
    /// Appends this manifest as one line of `path`.
    pub fn append(&self, path: &Path) -> Result<()> {
        let mut line = serde_json::to_string(self).expect("manifest serialises");
        line.push('\n');
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        file.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))
    }
}
