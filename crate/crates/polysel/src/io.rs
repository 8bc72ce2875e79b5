//! CSV tables and the run manifest.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use polysel_core::Matrix;
use serde::Serialize;

use crate::config::Config;
use crate::error::{config_err, HarnessError, Result};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_owned(),
        source,
    }
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Writes `rows` with a header row taken from the field names.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

fn read_rows(path: &Path, has_headers: bool) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut r = csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| config_err(format!("{}: row {}: `{f}` is not a number", path.display(), i + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Reads a numeric CSV with one row per observation.
pub fn read_matrix(path: &Path, has_headers: bool) -> Result<Matrix> {
    let rows = read_rows(path, has_headers)?;
    if rows.is_empty() {
        return Err(config_err(format!("{}: no rows", path.display())));
    }
    Ok(Matrix::from_rows(&rows)?)
}

/// Reads a single-column numeric CSV.
pub fn read_vector(path: &Path, has_headers: bool) -> Result<Vec<f64>> {
    read_rows(path, has_headers)?
        .into_iter()
        .enumerate()
        .map(|(i, row)| match row.as_slice() {
            [v] => Ok(*v),
            _ => Err(config_err(format!("{}: row {} must have one column", path.display(), i + 1))),
        })
        .collect()
}

/// Provenance of one CLI run. Contains nothing that varies between
/// otherwise identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: Config,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
    pub counts: serde_json::Map<String, serde_json::Value>,
}

impl Manifest {
    pub fn new(command: &str, config: &Config) -> Self {
        Self {
            command: command.to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            seed: config.scenario.seed,
            config_hash: config.hash(),
            config: config.clone(),
            outputs: Vec::new(),
            notes: Vec::new(),
            counts: serde_json::Map::new(),
        }
    }

    pub fn count(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.counts.insert(key.to_owned(), value.into());
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text).map_err(io_err(&path))?;
        Ok(path)
    }
}
