//! Run manifests: every artifact-producing run writes a sidecar JSON that
//! records the tool version, the semantic parameters, and digests of any
//! input files. Identical manifests imply bytewise identical artifacts.
//!
//! The worker-thread count and the memory budget are execution knobs, not
//! semantic parameters: results are defined to be independent of them, so
//! they are deliberately left out of the manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub params: serde_json::Value,
    pub inputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: &'static str, params: serde_json::Value) -> Self {
        Manifest {
            tool: "waring",
            version: env!("CARGO_PKG_VERSION"),
            command,
            params,
            inputs: BTreeMap::new(),
        }
    }

    pub fn record_input(&mut self, path: &Path) -> anyhow::Result<()> {
        let bytes = fs::read(path)
            .map_err(|e| anyhow::anyhow!("reading input {}: {e}", path.display()))?;
        let digest = Sha256::digest(&bytes);
        self.inputs
            .insert(path.display().to_string(), hex::encode(digest));
        Ok(())
    }

    /// Writes `<artifact>.manifest.json` next to the artifact.
    pub fn write_beside(&self, artifact: &Path) -> anyhow::Result<()> {
        let path = manifest_path(artifact);
        let body = serde_json::to_string_pretty(self)?;
        fs::write(&path, body)
            .map_err(|e| anyhow::anyhow!("writing manifest {}: {e}", path.display()))?;
        Ok(())
    }
}

pub fn manifest_path(artifact: &Path) -> std::path::PathBuf {
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}
