//! Report envelope, run manifest, and output routing.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::json;

/// Everything needed to reproduce a report.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub input_digest: String,
    pub parameters: serde_json::Map<String, serde_json::Value>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub anchors: Vec<String>,
    /// Only recorded with `--timing`, so default reports stay byte-stable.
    pub wall_time_ms: Option<u64>,
}

impl RunManifest {
    pub fn new(command: &str, input: &[u8]) -> Self {
        Self {
            command: command.to_string(),
            input_digest: format!("sha256:{}", hex::encode(Sha256::digest(input))),
            parameters: serde_json::Map::new(),
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            anchors: Vec::new(),
            wall_time_ms: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn anchors(mut self, anchors: &[&str]) -> Self {
        self.anchors = anchors.iter().map(|s| s.to_string()).collect();
        self
    }
}

#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub manifest: &'a RunManifest,
    pub result: &'a T,
    pub contracts_met: bool,
}

/// Where the report goes: `--out` wins, relative paths land under
/// `CKLAB_REPORT_DIR` when it is set, and without `--out` the directory
/// receives `<command>.json`. With neither, the report goes to stdout.
pub fn destination(
    out: Option<&Path>,
    report_dir: Option<&Path>,
    command: &str,
) -> Option<PathBuf> {
    match (out, report_dir) {
        (Some(p), Some(dir)) if p.is_relative() => Some(dir.join(p)),
        (Some(p), _) => Some(p.to_path_buf()),
        (None, Some(dir)) => Some(dir.join(format!("{command}.json"))),
        (None, None) => None,
    }
}

pub fn write_report<T: Serialize>(
    manifest: &RunManifest,
    result: &T,
    contracts_met: bool,
    dest: Option<&Path>,
) -> Result<()> {
    let bytes = json::to_bytes(&Report {
        manifest,
        result,
        contracts_met,
    })
    .context("serializing report")?;
    match dest {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)
                    .with_context(|| format!("creating {}", parent.display()))?;
            }
            std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&bytes)
                .context("writing stdout")
        }
    }
}
