//! Checkpoint files on disk.

use std::path::Path;

use pgfs_core::agent::{load_checkpoint, save_checkpoint, CheckpointError, CheckpointMeta, Trainer};
use pgfs_core::env::Environment;

use crate::error::{Error, Result};

/// Writes through a temporary file in the same directory and renames it over
/// `path`, so an interrupted write never leaves a truncated checkpoint.
pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text).map_err(|e| Error::runtime(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::runtime(format!("{}: {e}", path.display())))
}

pub fn save<E: Environment>(path: &Path, trainer: &Trainer<E::State>, env: &E, meta: &CheckpointMeta) -> Result<()> {
    write_atomic(path, &save_checkpoint(trainer, env, meta))
}

pub fn checkpoint_error(path: &Path, e: CheckpointError) -> Error {
    Error::data(format!("{}: {e}", path.display()))
}

pub fn load<E: Environment>(path: &Path, env: &E, corpus_hash: &str) -> Result<(Trainer<E::State>, CheckpointMeta)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_checkpoint(&text, env, corpus_hash).map_err(|e| checkpoint_error(path, e))
}

/// Value of a free-form metadata entry.
pub fn meta_value<'a>(meta: &'a CheckpointMeta, key: &str) -> Option<&'a str> {
    meta.extra.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}
