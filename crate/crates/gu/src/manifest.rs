//! Run manifests: what produced an output file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub inputs: Vec<String>,
    pub seeds: Vec<u64>,
    pub tolerances: BTreeMap<String, f64>,
    pub version: String,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` overrides the clock.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command: Vec<String>) -> Self {
        RunManifest {
            command,
            inputs: Vec::new(),
            seeds: Vec::new(),
            tolerances: BTreeMap::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: now(),
        }
    }

    pub fn input(mut self, p: &Path) -> Self {
        self.inputs.push(p.display().to_string());
        self
    }

    pub fn seed(mut self, s: u64) -> Self {
        self.seeds.push(s);
        self
    }

    pub fn tolerance(mut self, name: &str, value: f64) -> Self {
        self.tolerances.insert(name.to_string(), value);
        self
    }
}

fn now() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.parse().ok()) {
        return t;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// `out.json` gets `out.json.manifest.json` next to it.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}
