//! Run manifests: the resolved configuration, input digests and outputs of
//! each command.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::Result;

pub const MANIFEST_FILE: &str = "run_manifest.json";
pub const CONFIG_FILE: &str = "config.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: RunConfig,
    pub inputs: Vec<InputDigest>,
    /// Digest over the per-file digests, in listed order.
    pub inputs_sha256: String,
    pub outputs: Vec<String>,
    pub report: serde_json::Value,
}

pub fn digest_file(path: &Path) -> Result<InputDigest> {
    let bytes = std::fs::read(path)?;
    Ok(InputDigest { path: path.to_path_buf(), sha256: hex::encode(Sha256::digest(&bytes)) })
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig, inputs: &[PathBuf], report: serde_json::Value) -> Result<Self> {
        let inputs = inputs.iter().map(|p| digest_file(p)).collect::<Result<Vec<_>>>()?;
        let mut h = Sha256::new();
        for d in &inputs {
            h.update(d.sha256.as_bytes());
        }
        Ok(Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            inputs,
            inputs_sha256: hex::encode(h.finalize()),
            outputs: Vec::new(),
            report,
        })
    }

    /// Write the manifest and the resolved config next to the outputs.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(self)?)?;
        std::fs::write(dir.join(CONFIG_FILE), serde_json::to_string_pretty(&self.config)?)?;
        Ok(())
    }
}
