use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const MANIFEST_FILE: &str = "manifest.json";

/// SHA-256 of each file, keyed by a location-independent name.
#[derive(Debug, Default, Clone, Serialize)]
pub struct Digests(pub BTreeMap<String, String>);

impl Digests {
    pub fn add(&mut self, key: &str, bytes: &[u8]) {
        self.0.insert(key.to_string(), hex::encode(Sha256::digest(bytes)));
    }
}

/// Provenance record written next to every command's outputs. Holds no
/// timestamps or absolute paths so reruns are byte-identical.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub parameters: BTreeMap<String, String>,
    pub inputs: Digests,
    pub outputs: Digests,
}

/// Collects output files, then writes them together with the manifest.
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Self {
        OutputSet { dir: dir.to_path_buf(), files: Vec::new() }
    }

    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn write(self, mut manifest: RunManifest) -> Result<()> {
        std::fs::create_dir_all(&self.dir).with_context(|| format!("cannot create {}", self.dir.display()))?;
        for (name, bytes) in &self.files {
            manifest.outputs.add(name, bytes);
            let path = self.dir.join(name);
            std::fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        }
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        let path = self.dir.join(MANIFEST_FILE);
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
    }
}
