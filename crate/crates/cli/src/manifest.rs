//! Run manifests: what ran, on what, and the SHA-256 of every output.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Option<PathBuf>,
    pub inputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
    /// File name → hex SHA-256.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

pub fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub struct Recorder {
    m: RunManifest,
}

impl Recorder {
    pub fn start(command: &str, config: Option<&Path>, inputs: &[&Path], seed: Option<u64>) -> Self {
        Recorder {
            m: RunManifest {
                command: command.to_string(),
                config: config.map(Path::to_path_buf),
                inputs: inputs.iter().map(|p| p.to_path_buf()).collect(),
                seed,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                started_at: now(),
                finished_at: String::new(),
                outputs: BTreeMap::new(),
            },
        }
    }

    /// Hashes `outputs` and writes `manifest.<command>.json` into `dir`.
    pub fn finish(mut self, dir: &Path, outputs: &[PathBuf]) -> std::io::Result<PathBuf> {
        for p in outputs {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            self.m.outputs.insert(name, sha256_file(p)?);
        }
        self.m.finished_at = now();
        let path = dir.join(format!("manifest.{}.json", self.m.command));
        fs::write(&path, serde_json::to_vec_pretty(&self.m).expect("manifest serializes"))?;
        Ok(path)
    }
}
