//! Deterministic emission: fixed column orders, round-trip-exact float
//! formatting, and self-describing header comments, so identical configs
//! yield byte-identical CSV files.

use std::path::{Path, PathBuf};

use sparsetrig::SolverStatus;

use crate::error::{AppError, Result};

/// Stamped into every output header.
pub const ARTIFACT_VERSION: &str = concat!(
    "sparsetrig ",
    env!("CARGO_PKG_VERSION"),
    " schema 1"
);

/// 17 significant digits — parses back to the identical f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Status exactly as it serializes in JSON reports.
pub fn status_str(status: SolverStatus) -> &'static str {
    match status {
        SolverStatus::Converged => "converged",
        SolverStatus::MaxIter => "max-iter",
        SolverStatus::InfeasibleDetected => "infeasible-detected",
    }
}

/// An in-memory CSV document with provenance comments above the header row.
pub struct CsvDoc {
    text: String,
    rows: usize,
}

impl CsvDoc {
    pub fn new(command: &str, config_hash: &str, seeds: &[u64], columns: &[&str]) -> CsvDoc {
        let seed_list = if seeds.is_empty() {
            "none".to_string()
        } else {
            seeds
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut text = String::new();
        text.push_str(&format!("# artifact-version: {ARTIFACT_VERSION}\n"));
        text.push_str(&format!("# command: {command}\n"));
        text.push_str(&format!("# config-sha256: {config_hash}\n"));
        text.push_str(&format!("# seeds: {seed_list}\n"));
        text.push_str(&columns.join(","));
        text.push('\n');
        CsvDoc { text, rows: 0 }
    }

    pub fn push_row<I>(&mut self, fields: I)
    where
        I: IntoIterator<Item = String>,
    {
        let row: Vec<String> = fields.into_iter().collect();
        self.text.push_str(&row.join(","));
        self.text.push('\n');
        self.rows += 1;
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_bytes(path, self.text.as_bytes())?;
        println!("wrote {} ({} rows)", path.display(), self.rows);
        Ok(())
    }
}

/// The JSON report lands next to the CSV under the same stem.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| AppError::Numerical(format!("cannot serialize report: {e}")))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| {
                AppError::Config(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    std::fs::write(path, bytes)
        .map_err(|e| AppError::Config(format!("cannot write {}: {e}", path.display())))
}
