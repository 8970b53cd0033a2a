use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use semtk_core::embed::text_digest;

/// Everything needed to re-run a command: its seed, the full configuration
/// and a digest of it, plus output counts.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub config_digest: String,
    pub counts: BTreeMap<String, usize>,
    pub flags: Vec<String>,
}

impl Manifest {
    pub fn new<C: Serialize>(command: &str, seed: u64, config: &C) -> Result<Self> {
        let config = serde_json::to_value(config)?;
        let config_digest = text_digest(&serde_json::to_string(&config)?);
        Ok(Manifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config,
            config_digest,
            counts: BTreeMap::new(),
            flags: Vec::new(),
        })
    }

    pub fn count(&mut self, key: &str, n: usize) -> &mut Self {
        self.counts.insert(key.to_string(), n);
        self
    }

    /// Written next to `out` as `<out>.manifest.json`.
    pub fn write_for(&self, out: &Path) -> Result<PathBuf> {
        let path = manifest_path(out);
        std::fs::write(&path, serde_json::to_string_pretty(self)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// `<out>` with `suffix` appended to the file name.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
