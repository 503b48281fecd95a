//! Experiment driver for `cubecycles`: parameter sweeps over seeds, Monte
//! Carlo checks and machine-readable CSV / JSON outputs.
//!
//! Every command is a value of [`Command`]; the same value deserialises from
//! a JSON manifest, so a manifest replays a run exactly.

pub mod args;
pub mod commands;

use std::path::{Path, PathBuf};

pub use args::{Density, LengthSpec, SeedSet};
pub use commands::{execute, Artifact, Command};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] cubecycles::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
}

pub(crate) fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// `2 exp(-a^2 / (3 n p))`, the two-sided Chernoff bound for a binomial
/// count with mean `n p` deviating by at least `a`. Requires `a` in `[0, n p]`.
pub fn chernoff_bound(n: u64, p: f64, a: f64) -> Result<f64, CliError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CliError::Domain(format!("p = {p} is not a probability")));
    }
    let mean = n as f64 * p;
    if mean <= 0.0 || !(0.0..=mean).contains(&a) {
        return Err(CliError::Domain(format!("deviation a = {a} is outside [0, {mean}]")));
    }
    Ok(2.0 * (-a * a / (3.0 * mean)).exp())
}

/// Writes artifacts into `dir` (created if missing).
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(io_error(dir))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        std::fs::write(&path, &a.contents).map_err(io_error(&path))?;
    }
    Ok(())
}

/// Reads a manifest: one [`Command`] as JSON.
pub fn read_manifest(path: &Path) -> Result<Command, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    Ok(serde_json::from_str(&text)?)
}
