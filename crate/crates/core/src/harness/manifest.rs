//! Run manifests: what ran, how long it took and digests of what it wrote.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use super::HarnessError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub test: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(dir: &Path, name: &str) -> Result<Self, HarnessError> {
        let data = std::fs::read(dir.join(name))?;
        Ok(FileDigest {
            path: name.to_string(),
            bytes: data.len() as u64,
            sha256: hex::encode(Sha256::digest(&data)),
        })
    }
}

/// Everything time- or machine-dependent about a run lives here, so the
/// payload files themselves stay byte-identical across reruns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub workers: usize,
    pub started_unix_seconds: f64,
    pub wall_clock_seconds: f64,
    pub pass: bool,
    pub tests: Vec<TestOutcome>,
    pub files: Vec<FileDigest>,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf, HarnessError> {
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
