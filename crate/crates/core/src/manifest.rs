//! Run manifests: what went in, with which settings, and what came out.
//!
//! Manifests carry no wall-clock time so that two identical runs produce
//! byte-identical files. Keys inside `parameters` and `records` are sorted.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const TOOL_NAME: &str = "touchauth";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

impl FileDigest {
    pub fn of_bytes(name: impl Into<String>, data: &[u8]) -> Self {
        FileDigest { name: name.into(), bytes: data.len() as u64, sha256: sha256_hex(data) }
    }

    pub fn of_file(name: impl Into<String>, path: &Path) -> Result<Self> {
        let data = std::fs::read(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
        Ok(Self::of_bytes(name, &data))
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Effective settings, including every seed.
    pub parameters: serde_json::Value,
    /// Per-stage counts and per-model training outcomes.
    #[serde(default)]
    pub records: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, parameters: serde_json::Value) -> Self {
        RunManifest {
            tool: TOOL_NAME.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            parameters,
            records: serde_json::Value::Null,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: RunManifest = serde_json::from_str(text)?;
        if m.tool != TOOL_NAME {
            return Err(Error::Format(format!("not a {TOOL_NAME} manifest (tool = '{}')", m.tool)));
        }
        Ok(m)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, self.to_json()?).map_err(|source| Error::Write { path, source })
    }
}
