//! Checkpoint persistence: one JSON file per checkpoint holding the
//! scorer's parameter blob.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::TrainingError;

pub fn save_checkpoint<S: Serialize>(scorer: &S, path: &Path) -> Result<(), TrainingError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| TrainingError::CheckpointIo {
            path: parent.to_path_buf(),
            detail: e.to_string(),
        })?;
    }
    let body = serde_json::to_string_pretty(scorer).map_err(|e| TrainingError::CheckpointIo {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    std::fs::write(path, body).map_err(|e| TrainingError::CheckpointIo {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })
}

pub fn load_checkpoint<S: DeserializeOwned>(path: &Path) -> Result<S, TrainingError> {
    let bytes = std::fs::read(path).map_err(|e| TrainingError::CheckpointIo {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    serde_json::from_slice(&bytes).map_err(|e| TrainingError::CheckpointIo {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })
}
