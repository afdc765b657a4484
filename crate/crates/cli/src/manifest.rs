use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// SHA-256 of the stored `config.toml`.
    pub config_hash: String,
    pub config: ExperimentConfig,
    /// Every file written by the run except this manifest, sorted by path.
    pub outputs: Vec<OutputRecord>,
    pub sources: Vec<SourceRecord>,
    pub flags: Vec<Flag>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    /// Relative to the run directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub label: String,
    pub truncation_deficit: f64,
    /// `1 − Σ_{m ≤ m_max} P(m)`.
    pub tail_probability: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    /// Source label, optionally followed by `/` and the output tag.
    pub scope: String,
    pub kind: FlagKind,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagKind {
    /// Resource construction or another hard numerical failure.
    Failed,
    /// `P(m)` below the floor; the heralded state is truncation noise.
    Unreliable,
    ZeroEvidence,
    /// No output bin has the requested posterior mode.
    NoMatchingBin,
    /// Wigner minimum on the grid edge.
    WignerBoundary,
    /// `∫W` off by more than `1e-3`.
    WignerNormalization,
    /// Analytic detector response disagrees with sampling.
    MonteCarlo,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn record(dir: &Path, rel: &str) -> Result<OutputRecord> {
    let path = dir.join(rel);
    let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
    Ok(OutputRecord {
        path: rel.to_string(),
        sha256: sha256_hex(&bytes),
        bytes: bytes.len() as u64,
    })
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))
    }

    /// Accepts the manifest file or the run directory holding it.
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let file = if path.is_dir() {
            path.join(MANIFEST_FILE)
        } else {
            path.to_path_buf()
        };
        let text = fs::read_to_string(&file).map_err(|e| CliError::io(&file, e))?;
        let manifest: Self =
            serde_json::from_str(&text).map_err(|e| CliError::Manifest(format!("{}: {e}", file.display())))?;
        let dir = file.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((manifest, dir))
    }
}
