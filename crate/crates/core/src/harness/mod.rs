//! Parameter-sweep experiment runner.
//!
//! A sweep crosses oracle parameters, pricing schemes, TCOD values and risk
//! levels. Each `(cell, repetition)` gets a seed derived from the base seed
//! and the cell's coordinates; volumes, prices and heuristic randomness are
//! drawn from streams of that seed, and every strategy runs on the same
//! priced catalog so profits are paired.

pub mod config;
pub mod grid;
pub mod sequence;

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use config::{ExperimentConfig, OracleConfig, StrategyEntry, VolumesConfig};
pub use grid::{
    build_instance, build_oracles, cells, mean_std, run_grid, run_instance, write_experiment_csv, Cell, CellError,
    GridOutcome, OracleSlot, ResultRow,
};
pub use sequence::{cell_sequence, run_sequence, sequence_rows, write_sequence_csv, SequenceRow};

/// Runs `f` on a rayon pool with `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config_sha256: String,
    base_seed: u64,
    repetitions: usize,
    rows: usize,
    cell_errors: Vec<ManifestError<'a>>,
}

#[derive(Debug, Serialize)]
struct ManifestError<'a> {
    cell: &'a Cell,
    message: &'a str,
}

#[derive(Debug)]
pub struct SweepReport {
    pub experiment_csv: PathBuf,
    pub manifest: PathBuf,
    pub outcome: GridOutcome,
}

pub fn config_hash(config_bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(config_bytes))
}

/// Runs the sweep and writes `experiment.csv` and `manifest.json` into
/// `out_dir`.
pub fn sweep(cfg: &ExperimentConfig, config_bytes: &[u8], out_dir: &Path) -> Result<SweepReport> {
    let outcome = run_grid(cfg)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let csv_path = out_dir.join(&cfg.output.experiment);
    let file = std::fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    write_experiment_csv(&outcome.rows, std::io::BufWriter::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(&csv_path, source),
        other => other,
    })?;

    let manifest = Manifest {
        tool: "tbyb",
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: config_hash(config_bytes),
        base_seed: cfg.grid.base_seed,
        repetitions: cfg.grid.repetitions,
        rows: outcome.rows.len(),
        cell_errors: outcome
            .errors
            .iter()
            .map(|e| ManifestError {
                cell: &e.cell,
                message: &e.message,
            })
            .collect(),
    };
    let manifest_path = out_dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(SweepReport {
        experiment_csv: csv_path,
        manifest: manifest_path,
        outcome,
    })
}
