use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One aggregated cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub algorithm: String,
    pub lambda: f64,
    pub of: f64,
    pub snr_db: f64,
    pub mse_db: f64,
    pub mse_std_db: f64,
    pub trials: usize,
    pub fail_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MseReport {
    pub rows: Vec<MseRow>,
}

impl MseReport {
    /// Rows of one algorithm, in report order.
    pub fn algorithm<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a MseRow> + 'a {
        self.rows.iter().filter(move |r| r.algorithm == name)
    }
}

/// Serializes the report as CSV text with LF line endings.
pub fn sweep_to_string(report: &MseReport) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    if report.rows.is_empty() {
        w.write_record([
            "algorithm",
            "lambda",
            "of",
            "snr_db",
            "mse_db",
            "mse_std_db",
            "trials",
            "fail_rate",
        ])
        .map_err(|e| Error::Parse(e.to_string()))?;
    }
    for row in &report.rows {
        w.serialize(row).map_err(|e| Error::Parse(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn sweep_from_str(text: &str) -> Result<MseReport> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let rows = r
        .deserialize()
        .collect::<std::result::Result<Vec<MseRow>, _>>()
        .map_err(|e| Error::Parse(e.to_string()))?;
    Ok(MseReport { rows })
}

pub fn sweep_to_csv(report: &MseReport, path: &Path) -> Result<()> {
    std::fs::write(path, sweep_to_string(report)?).map_err(|e| Error::io(path, e))
}

pub fn read_sweep_csv(path: &Path) -> Result<MseReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    sweep_from_str(&text).map_err(|e| Error::io(path, e))
}
