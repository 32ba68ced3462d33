//! Run manifest written next to every command's outputs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub name: String,
    /// File path, or `bundled` for built-in data.
    pub source: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest<C: Serialize> {
    pub command: &'static str,
    pub version: &'static str,
    pub threads: Option<usize>,
    pub seed: u64,
    pub config: C,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
}

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        let _ = write!(s, "{b:02x}");
    }
    s
}

pub fn digest(name: &str, source: Option<&Path>, bytes: &[u8]) -> InputDigest {
    InputDigest {
        name: name.into(),
        source: source.map_or_else(|| "bundled".into(), |p| p.display().to_string()),
        sha256: sha256_hex(bytes),
    }
}

/// Output names relative to `dir`, sorted.
pub fn relative(dir: &Path, paths: &[PathBuf]) -> Vec<String> {
    let mut v: Vec<String> = paths
        .iter()
        .map(|p| p.strip_prefix(dir).unwrap_or(p).display().to_string())
        .collect();
    v.sort();
    v
}

impl<C: Serialize> Manifest<C> {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::validation(format!("manifest: {e}")))?;
        std::fs::write(&path, text + "\n")
            .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))
    }
}
