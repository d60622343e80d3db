use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Content listing of one run. Holds no timestamps so that reruns compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    /// Hashes of input artifacts consumed by the run.
    pub inputs: Vec<ManifestEntry>,
    pub files: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub(crate) fn entry(root: &Path, path: &Path) -> Result<ManifestEntry> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let rel = path.strip_prefix(root).unwrap_or(path);
    Ok(ManifestEntry {
        path: rel.to_string_lossy().replace('\\', "/"),
        sha256: sha256_hex(&bytes),
        bytes: bytes.len() as u64,
    })
}

impl Manifest {
    pub(crate) fn new(command: &str, config_sha256: String, seed: u64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_sha256,
            seed,
            inputs: Vec::new(),
            files: Vec::new(),
        }
    }

    pub(crate) fn add_inputs(&mut self, root: &Path, paths: &[PathBuf]) -> Result<()> {
        for p in paths {
            self.inputs.push(entry(root, p)?);
        }
        Ok(())
    }

    /// Hashes `paths`, sorts the listing and writes it as pretty JSON.
    pub(crate) fn finish(mut self, root: &Path, paths: &[PathBuf], out: &Path) -> Result<Self> {
        for p in paths {
            self.files.push(entry(root, p)?);
        }
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        let text = serde_json::to_string_pretty(&self)
            .map_err(|e| Error::format(out, e.to_string()))?;
        std::fs::write(out, text + "\n").map_err(|e| Error::io(out, e))?;
        Ok(self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    /// Entries whose file is missing or no longer matches its hash.
    pub fn stale_entries(&self, root: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter(|f| match std::fs::read(root.join(&f.path)) {
                Ok(bytes) => sha256_hex(&bytes) != f.sha256,
                Err(_) => true,
            })
            .map(|f| f.path.clone())
            .collect()
    }
}
