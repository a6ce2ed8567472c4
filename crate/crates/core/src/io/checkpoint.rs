//! JSON checkpoints. Floats are written with round-trip precision, so a
//! resumed chain continues bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_text, write_text};
use crate::error::{Error, Result};
use crate::io::RunConfig;
use crate::sampler::Checkpoint;

/// A checkpoint together with the run configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointFile {
    pub run: RunConfig,
    pub checkpoint: Checkpoint,
}

pub fn write_checkpoint(path: &Path, file: &CheckpointFile) -> Result<()> {
    let text = serde_json::to_string(file).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let tmp = path.with_extension("tmp");
    write_text(&tmp, &text)?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<CheckpointFile> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))
}
