use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Everything needed to re-run a subcommand and check its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub tool_version: String,
    pub config_sha256: Option<String>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    /// Taken from `SOURCE_DATE_EPOCH` when set; never from the clock.
    pub timestamp: Option<u64>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn new(subcommand: &str, seed: Option<u64>) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: None,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            seed,
            timestamp: std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.trim().parse().ok()),
        }
    }

    pub fn config(&mut self, path: &Path) -> Result<()> {
        self.config_sha256 = Some(sha256_file(path)?);
        Ok(())
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    /// Hashes the outputs and writes `<output>.manifest.json` next to each.
    pub fn finish(mut self, outputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
        for p in outputs {
            self.outputs.insert(p.display().to_string(), sha256_file(p)?);
        }
        let body = serde_json::to_string_pretty(&self)? + "\n";
        let mut written = Vec::new();
        for p in outputs {
            let mut name = p.as_os_str().to_owned();
            name.push(".manifest.json");
            let path = PathBuf::from(name);
            std::fs::write(&path, &body).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}
