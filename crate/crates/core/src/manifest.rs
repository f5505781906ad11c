//! Run manifests: the seed, parameters, and output digests a run needs to
//! be reproduced and checked bit-for-bit.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// One output file with its content digest.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct OutputRecord {
    /// Path relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce a run byte-for-byte.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub master_seed: u64,
    pub n: Vec<u32>,
    pub num_samples: u64,
    pub num_streams: u32,
    pub bin_count: u32,
    pub eigensolver_retries: u64,
    pub outputs: Vec<OutputRecord>,
}

impl RunManifest {
    pub fn new(
        command: impl Into<String>,
        master_seed: u64,
        n: Vec<u32>,
        num_samples: u64,
        num_streams: u32,
        bin_count: u32,
    ) -> Self {
        RunManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            command: command.into(),
            master_seed,
            n,
            num_samples,
            num_streams,
            bin_count,
            eigensolver_retries: 0,
            outputs: Vec::new(),
        }
    }

    /// Records a file that already exists on disk, digesting its content.
    pub fn record_output(&mut self, dir: &Path, rel_path: &str) -> Result<()> {
        let digest = sha256_file(&dir.join(rel_path))?;
        self.outputs.push(OutputRecord { path: rel_path.to_string(), sha256: digest });
        Ok(())
    }

    /// Serializes to pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    /// Writes `manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        fs::write(&path, self.to_json())?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| {
            Error::inconsistency("RunManifest", format!("cannot parse {}: {e}", path.display()))
        })
    }

    /// Recomputes the digest of every recorded output (relative to the
    /// manifest's directory) and reports mismatches.
    pub fn verify_outputs(&self, dir: &Path) -> Result<Vec<String>> {
        let mut mismatches = Vec::new();
        for rec in &self.outputs {
            let actual = sha256_file(&dir.join(&rec.path))?;
            if actual != rec.sha256 {
                mismatches.push(format!(
                    "{}: recorded {} actual {}",
                    rec.path, rec.sha256, actual
                ));
            }
        }
        Ok(mismatches)
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    Ok(sha256_hex(&bytes))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}
