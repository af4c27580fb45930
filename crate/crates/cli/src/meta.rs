//! Provenance written next to every artifact: the command, its settings and
//! a digest of each input. Nothing run-specific (times, absolute paths) goes
//! in, so identical inputs give byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub inputs: BTreeMap<String, InputDigest>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

impl Meta {
    pub fn new(command: &'static str, config: impl Serialize) -> Self {
        Meta {
            tool: "zhnp",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: None,
            config: serde_json::to_value(config).expect("config serializes"),
            inputs: BTreeMap::new(),
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn input(mut self, role: &str, path: &Path) -> Result<Self> {
        let file = path
            .file_name()
            .map_or_else(|| path.display().to_string(), |f| f.to_string_lossy().into_owned());
        self.inputs.insert(
            role.to_string(),
            InputDigest {
                file,
                sha256: sha256_file(path)?,
            },
        );
        Ok(self)
    }

    /// Writes `<artifact>.meta.json`.
    pub fn write_beside(&self, artifact: &Path) -> Result<PathBuf> {
        let mut name = artifact.as_os_str().to_owned();
        name.push(".meta.json");
        let path = PathBuf::from(name);
        write_json(&path, self)?;
        Ok(path)
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(text.as_bytes())?;
    Ok(())
}
