//! Artifact emission: CSV tables with fixed headers and a JSON summary that
//! echoes the resolved configuration and a content hash of it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Git-style object hash: SHA-256 of `blob <len>\0<content>`, in hex.
pub fn blob_hash(content: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("blob {}\0", content.len()).as_bytes());
    hasher.update(content);
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// CSV text: one header line and one line per row.
pub struct Table {
    header: &'static str,
    rows: Vec<String>,
}

impl Table {
    pub fn new(header: &'static str) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, fields: &[String]) {
        self.rows.push(fields.join(","));
    }

    pub fn render(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(self.header);
        out.push('\n');
        for row in &self.rows {
            out.push_str(row);
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct Acceptance {
    pub passed: bool,
    pub detail: String,
}

#[derive(Serialize)]
struct Summary<'a> {
    command: &'a str,
    config: BTreeMap<String, String>,
    seed: Option<u64>,
    input_hash: String,
    acceptance: &'a Acceptance,
    report: serde_json::Value,
}

/// Paths of the files written by one run.
#[derive(Debug)]
pub struct Written {
    pub csv: PathBuf,
    pub json: PathBuf,
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Writes `<out>/<command>.csv` and `<out>/<command>.json`.
pub fn emit(
    cfg: &RunConfig,
    table: &Table,
    report: serde_json::Value,
    acceptance: &Acceptance,
) -> Result<Written, CliError> {
    let dir = PathBuf::from(cfg.str("out"));
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    let csv = dir.join(format!("{}.csv", cfg.command));
    let json = dir.join(format!("{}.json", cfg.command));
    write(&csv, &table.render())?;
    let summary = Summary {
        command: &cfg.command,
        config: cfg.inputs(),
        seed: cfg.values.get("seed").and_then(|s| s.parse().ok()),
        input_hash: blob_hash(cfg.canonical_text().as_bytes()),
        acceptance,
        report,
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    write(&json, &text)?;
    Ok(Written { csv, json })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blob_hash_of_empty_content() {
        // `git hash-object --object-format=sha256 /dev/null`.
        assert_eq!(blob_hash(b""), "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813");
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, f64::MIN_POSITIVE, 1e300, -2.5e-7] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        assert_eq!(Table::new("lambda,p_hat,ci_lo,ci_hi").render(), "lambda,p_hat,ci_lo,ci_hi\n");
    }
}
