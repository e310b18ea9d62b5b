//! Per-subcommand provenance manifests: which inputs were read, a hash of
//! the effective config, and a hash of every artifact written. Two runs with
//! the same config and seeds must produce identical manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub subcommand: String,
    pub config_sha256: String,
    pub inputs: Vec<String>,
    /// Artifact file name -> sha256 of its bytes.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

pub struct ManifestBuilder {
    manifest: Manifest,
}

impl ManifestBuilder {
    pub fn new(subcommand: &str, canonical_config: &str) -> Self {
        ManifestBuilder {
            manifest: Manifest {
                subcommand: subcommand.to_string(),
                config_sha256: sha256_hex(canonical_config.as_bytes()),
                inputs: Vec::new(),
                outputs: BTreeMap::new(),
            },
        }
    }

    pub fn input(&mut self, path: &Path) -> &mut Self {
        self.manifest.inputs.push(path.display().to_string());
        self
    }

    /// Records an artifact by hashing the file as written.
    pub fn output(&mut self, path: &Path) -> std::io::Result<&mut Self> {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        self.manifest.outputs.insert(name, sha256_file(path)?);
        Ok(self)
    }

    /// Writes `<subcommand>_manifest.json` into `dir` and returns its path.
    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join(format!("{}_manifest.json", self.manifest.subcommand));
        let text = serde_json::to_string_pretty(&self.manifest)?;
        std::fs::write(&path, text)?;
        Ok(path)
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }
}

pub fn read_manifest(path: &Path) -> std::io::Result<Manifest> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
