//! CSV files and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<PathBuf> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(path.to_path_buf())
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Artifact {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: String,
    pub config_sha256: String,
    pub seed: u64,
    pub topology_override: Option<String>,
    pub output_dir: String,
    pub started_at: String,
    pub finished_at: String,
    pub artifacts: Vec<Artifact>,
}

impl RunManifest {
    pub fn file_name(subcommand: &str) -> String {
        format!("manifest-{subcommand}.json")
    }
}

pub fn artifact(out: &Path, path: &Path) -> Result<Artifact> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let rel = path.strip_prefix(out).unwrap_or(path);
    Ok(Artifact {
        path: rel.to_string_lossy().replace('\\', "/"),
        sha256: sha256_hex(&bytes),
        bytes: bytes.len() as u64,
    })
}
