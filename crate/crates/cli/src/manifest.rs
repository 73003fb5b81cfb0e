//! Run manifests: every command writes a JSON manifest with the merged
//! config snapshot, a version string, wall time and its output counts, so
//! the producing command can be re-run bit-identically (given the same
//! backends).

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use crate::CliError;

pub struct ManifestWriter {
    command: &'static str,
    started: Instant,
    config_snapshot: serde_json::Value,
}

impl ManifestWriter {
    pub fn start(command: &'static str, config_snapshot: serde_json::Value) -> Self {
        ManifestWriter {
            command,
            started: Instant::now(),
            config_snapshot,
        }
    }

    /// Write `<command>_manifest.json` under the output directory.
    pub fn finish(
        self,
        output_dir: &Path,
        counts: serde_json::Value,
        artifacts: &[(&str, PathBuf)],
    ) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(output_dir).map_err(|e| {
            CliError::Runtime(format!("cannot create {}: {e}", output_dir.display()))
        })?;
        let artifacts: serde_json::Map<String, serde_json::Value> = artifacts
            .iter()
            .map(|(name, path)| {
                (
                    name.to_string(),
                    serde_json::Value::String(path.display().to_string()),
                )
            })
            .collect();
        let manifest = json!({
            "command": self.command,
            "version": format!("{}+{}", env!("CARGO_PKG_VERSION"), env!("CONVERSUM_BUILD_ID")),
            "wall_time_ms": self.started.elapsed().as_millis() as u64,
            "config": self.config_snapshot,
            "counts": counts,
            "artifacts": artifacts,
        });
        let path = output_dir.join(format!("{}_manifest.json", self.command));
        std::fs::write(
            &path,
            serde_json::to_string_pretty(&manifest).expect("manifest json"),
        )
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}
