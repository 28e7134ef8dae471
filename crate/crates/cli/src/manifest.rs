//! Run manifests: enough metadata to reproduce any output directory.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Utc};
use sha2::{Digest, Sha256};

use crate::output::json_escape;

/// Reproducibility record written next to every command's outputs.
pub struct RunManifest {
    pub command_line: String,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub input_hashes: BTreeMap<String, String>,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(seed: Option<u64>) -> Self {
        Self {
            command_line: std::env::args().collect::<Vec<_>>().join(" "),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_hashes: BTreeMap::new(),
            timestamp: timestamp(),
        }
    }

    pub fn add_input(&mut self, path: &Path, bytes: &[u8]) {
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.input_hashes.insert(path.display().to_string(), hex);
    }

    pub fn to_json(&self) -> String {
        let hashes: Vec<String> = self
            .input_hashes
            .iter()
            .map(|(k, v)| format!("\"{}\":\"{}\"", json_escape(k), json_escape(v)))
            .collect();
        format!(
            "{{\"command_line\":\"{}\",\"seed\":{},\"tool_version\":\"{}\",\"input_hashes\":{{{}}},\"timestamp\":\"{}\"}}\n",
            json_escape(&self.command_line),
            self.seed.map_or("null".to_string(), |s| s.to_string()),
            json_escape(&self.tool_version),
            hashes.join(","),
            json_escape(&self.timestamp),
        )
    }
}

/// RFC 3339 timestamp; honors `SOURCE_DATE_EPOCH` for reproducible runs.
fn timestamp() -> String {
    if let Ok(epoch) = std::env::var("SOURCE_DATE_EPOCH") {
        if let Ok(secs) = epoch.parse::<i64>() {
            if let Some(dt) = DateTime::<Utc>::from_timestamp(secs, 0) {
                return dt.to_rfc3339();
            }
        }
    }
    Utc::now().to_rfc3339()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_json_shape() {
        let mut m = RunManifest::new(Some(7));
        m.add_input(Path::new("x.json"), b"hello");
        let j = m.to_json();
        assert!(j.contains("\"seed\":7"));
        assert!(j.contains(
            "\"x.json\":\"2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824\""
        ));
    }
}
