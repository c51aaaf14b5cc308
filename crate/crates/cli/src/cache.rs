//! Result cache keyed by a content hash of the resolved run parameters.
//!
//! Enabled by setting `CHBELL_CACHE_DIR`. A cache entry stores the exact
//! output text per artifact role, so a hit reproduces the same bytes a fresh
//! computation would write.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const CACHE_ENV: &str = "CHBELL_CACHE_DIR";

pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn from_env() -> Self {
        Self { dir: std::env::var_os(CACHE_ENV).map(PathBuf::from) }
    }

    pub fn lookup(&self, key: &str) -> Option<BTreeMap<String, String>> {
        let dir = self.dir.as_ref()?;
        let text = std::fs::read_to_string(dir.join(format!("{key}.json"))).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn store(&self, key: &str, outputs: &BTreeMap<String, String>) -> Result<(), CliError> {
        let Some(dir) = self.dir.as_ref() else { return Ok(()) };
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("cache dir {}: {e}", dir.display())))?;
        let path = dir.join(format!("{key}.json"));
        let body = serde_json::to_string(outputs).expect("string map");
        std::fs::write(&path, body)
            .map_err(|e| CliError::Io(format!("cache write {}: {e}", path.display())))
    }
}

/// SHA-256 over the canonical JSON serialization of the run descriptor.
pub fn config_hash<T: Serialize>(descriptor: &T) -> String {
    let json = serde_json::to_string(descriptor).expect("serializable descriptor");
    hex::encode(Sha256::digest(json.as_bytes()))
}
