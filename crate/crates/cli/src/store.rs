//! File I/O, content hashes and the worker pool.

use std::fs;
use std::path::{Path, PathBuf};

use pacing_core::{PacingInstance, PacingOutcome};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::exit::{CliError, CliResult, Exit};

/// Environment variable holding the worker count of the experiment pool.
pub const WORKERS_ENV: &str = "PACING_WORKERS";

/// Lowercase hex SHA-256 of `bytes`.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the canonical JSON form of an instance.
pub fn instance_hash(inst: &PacingInstance) -> String {
    content_hash(inst.to_json().as_bytes())
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::new(Exit::Io, anyhow::anyhow!("{}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

pub fn read_instance(path: &Path) -> CliResult<PacingInstance> {
    PacingInstance::from_json(&read(path)?)
        .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

/// Reads an outcome from either a bare outcome file or a solve report.
pub fn read_outcome(path: &Path) -> CliResult<PacingOutcome> {
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    let body = match value.get("outcome") {
        Some(inner) if !inner.is_null() => inner.clone(),
        Some(_) => {
            return Err(CliError::new(
                Exit::VerifyFailed,
                anyhow::anyhow!("{}: report has no outcome", path.display()),
            ))
        }
        None => value,
    };
    serde_json::from_value(body).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

fn ensure_parent(path: &Path) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    ensure_parent(path)?;
    fs::write(path, text)?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Stores an instance under `dir/instances/<hash>.json` and returns its hash.
pub fn archive_instance(dir: &Path, inst: &PacingInstance) -> CliResult<String> {
    let hash = instance_hash(inst);
    let path: PathBuf = dir.join("instances").join(format!("{hash}.json"));
    if !path.exists() {
        write_text(&path, &inst.to_json())?;
    }
    Ok(hash)
}

/// Worker count from `PACING_WORKERS`, else the available parallelism.
pub fn worker_count() -> CliResult<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::parse(format!(
                "{WORKERS_ENV} must be a positive integer, got `{s}`"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Runs `f` inside a pool of `worker_count()` threads.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count()?)
        .build()
        .map_err(|e| CliError::failure(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}
