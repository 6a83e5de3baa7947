//! CSV and JSON persistence. Floats are written with 17 significant digits
//! so reruns can be compared byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Column-oriented table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push_numeric(&mut self, values: &[f64]) {
        self.rows.push(values.iter().copied().map(fmt_f64).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        w.write_record(&self.header).map_err(|e| csv_error(path, e))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let header = r.headers().map_err(|e| csv_error(path, e))?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec.map_err(|e| csv_error(path, e))?.iter().map(String::from).collect());
        }
        Ok(Self { header, rows })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parses a numeric column by name.
    pub fn column(&self, name: &str, origin: &Path) -> CliResult<Vec<f64>> {
        let k = self.column_index(name).ok_or_else(|| CliError::Parse {
            path: origin.to_path_buf(),
            message: format!("missing column '{name}'"),
        })?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r[k].parse::<f64>().map_err(|e| CliError::Parse {
                    path: origin.to_path_buf(),
                    message: format!("row {}, column '{name}': {e}", i + 2),
                })
            })
            .collect()
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::Parse { path: path.to_path_buf(), message: e.to_string() }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })
}

/// Numbers kept in `summary.json`, keyed for stable ordering.
pub type Scalars = BTreeMap<String, f64>;
