//! Result tables, run manifests and their on-disk formats.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{FgsrError, Result};
use crate::experiments::{SweepRow, SweepSummary};
use crate::lrmc::SolverConfig;
use crate::observations::ObservationSet;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One table cell before formatting.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// Seventeen significant digits, enough to recover every `f64` exactly.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// A table of already-rendered cells with named columns.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ResultsTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ResultsTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        ResultsTable {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(FgsrError::Dimension(format!(
                "row has {} cells but the table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row.iter().map(Cell::render).collect());
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Cell `name` of row `row`.
    pub fn get(&self, row: usize, name: &str) -> Option<&str> {
        let c = self.column(name)?;
        self.rows.get(row).map(|r| r[c].as_str())
    }
}

/// Values that differ between otherwise identical runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct Timing {
    pub started_at: String,
    pub finished_at: String,
    /// Solver wall time in seconds, one entry per results row.
    pub wall_times: Vec<f64>,
}

/// Provenance sidecar written next to every results file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: SolverConfig,
    pub dataset_fingerprint: String,
    pub seeds: Vec<u64>,
    pub artifact_version: String,
    /// Command-specific facts such as the dataset re-indexing.
    #[serde(default)]
    pub details: serde_json::Map<String, serde_json::Value>,
    pub timing: Timing,
}

impl RunManifest {
    pub fn new(
        command: impl Into<String>,
        config: SolverConfig,
        dataset_fingerprint: String,
        seeds: Vec<u64>,
    ) -> Self {
        RunManifest {
            command: command.into(),
            config,
            dataset_fingerprint,
            seeds,
            artifact_version: ARTIFACT_VERSION.to_string(),
            details: serde_json::Map::new(),
            timing: Timing {
                started_at: now_iso8601(),
                ..Timing::default()
            },
        }
    }

    pub fn finish(&mut self) {
        self.timing.finished_at = now_iso8601();
    }
}

pub fn now_iso8601() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn fingerprint_bytes(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

/// Hash of the shape, indices and values of an observation set.
pub fn fingerprint_observations(omega: &ObservationSet) -> String {
    let mut h = Sha256::new();
    h.update((omega.rows() as u64).to_le_bytes());
    h.update((omega.cols() as u64).to_le_bytes());
    for (i, j, v) in omega.iter() {
        h.update((i as u64).to_le_bytes());
        h.update((j as u64).to_le_bytes());
        h.update(v.to_le_bytes());
    }
    format!("sha256:{}", hex::encode(h.finalize()))
}

/// Path of the manifest sidecar of a results file.
pub fn manifest_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn write_table(table: &ResultsTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_table(path: &Path) -> Result<ResultsTable> {
    let mut r = csv::Reader::from_path(path)?;
    let columns = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok(ResultsTable { columns, rows })
}

/// Writes `table` as CSV at `path` and `manifest` as JSON at
/// [`manifest_path`]`(path)`.
pub fn write_results(table: &ResultsTable, manifest: &RunManifest, path: &Path) -> Result<()> {
    write_table(table, path)?;
    let mut json = serde_json::to_string_pretty(manifest)?;
    json.push('\n');
    fs::write(manifest_path(path), json)?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub const SWEEP_COLUMNS: [&str; 19] = [
    "method",
    "axis",
    "axis_value",
    "seed",
    "m",
    "n",
    "r",
    "missing_rate",
    "snr",
    "density",
    "d",
    "q",
    "relative_error",
    "nmae",
    "rmse",
    "revealed_rank",
    "iterations",
    "converged",
    "config",
];

/// Sweep rows without their wall times, which go to the manifest.
pub fn sweep_table(rows: &[SweepRow]) -> ResultsTable {
    let mut t = ResultsTable::new(SWEEP_COLUMNS);
    for r in rows {
        t.push(vec![
            r.method.as_str().into(),
            r.axis.as_str().into(),
            r.axis_value.into(),
            r.seed.into(),
            r.m.into(),
            r.n.into(),
            r.r.into(),
            r.missing_rate.into(),
            r.snr.into(),
            r.density.into(),
            r.d.into(),
            r.q.into(),
            r.relative_error.into(),
            r.nmae.into(),
            r.rmse.into(),
            r.revealed_rank.into(),
            r.iterations.into(),
            r.converged.into(),
            r.config.as_str().into(),
        ])
        .expect("row matches the sweep columns");
    }
    t
}

pub fn summary_table(summary: &[SweepSummary]) -> ResultsTable {
    let mut t = ResultsTable::new([
        "method",
        "axis_value",
        "runs",
        "mean_relative_error",
        "std_relative_error",
    ]);
    for s in summary {
        t.push(vec![
            s.method.as_str().into(),
            s.axis_value.into(),
            s.runs.into(),
            s.mean_error.into(),
            s.std_error.into(),
        ])
        .expect("row matches the summary columns");
    }
    t
}
