//! CSV and manifest writers.
//!
//! Floats are written with Rust's `Display` for `f64`, which emits the
//! shortest decimal string that parses back to the same value.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::runner::{CdfReport, SweepResult};
use crate::error::Result;

pub const SWEEP_HEADER: [&str; 8] = [
    "construction",
    "input_family",
    "axis_name",
    "axis_value",
    "probe",
    "mean",
    "std",
    "trials",
];

pub const CDF_HEADER: [&str; 3] = ["construction", "grid", "cdf"];
pub const TAIL_HEADER: [&str; 3] = ["construction", "threshold", "tail"];

fn fmt(v: f64) -> String {
    format!("{v}")
}

pub fn write_sweep_csv<W: Write>(result: &SweepResult, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SWEEP_HEADER)?;
    for row in &result.rows {
        out.write_record([
            row.construction.label().to_string(),
            row.input_family.label().to_string(),
            result.axis_name.clone(),
            row.axis_value.to_string(),
            fmt(row.probe),
            fmt(row.mean),
            fmt(row.std),
            row.trials.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_cdf_csv<W: Write>(report: &CdfReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CDF_HEADER)?;
    for series in &report.series {
        for (g, c) in series.grid.iter().zip(&series.cdf) {
            out.write_record([series.label.clone(), fmt(*g), fmt(*c)])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_tail_csv<W: Write>(report: &CdfReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TAIL_HEADER)?;
    for series in &report.series {
        for (t, f) in series.thresholds.iter().zip(&series.tail) {
            out.write_record([series.label.clone(), fmt(*t), fmt(*f)])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Run metadata written next to every CSV.
#[derive(Debug, Serialize)]
pub struct Manifest<C: Serialize> {
    pub config: C,
    pub seed: u64,
    pub version: &'static str,
    pub started_at: String,
    pub command: String,
}

impl<C: Serialize> Manifest<C> {
    pub fn new(command: &str, seed: u64, config: C) -> Self {
        Self {
            config,
            seed,
            version: env!("CARGO_PKG_VERSION"),
            started_at: chrono::Utc::now().to_rfc3339(),
            command: command.to_string(),
        }
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

/// `out.csv` → `out.manifest.json`.
pub fn manifest_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("manifest.json")
}

/// `out.csv` → `out.tail.csv`.
pub fn tail_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("tail.csv")
}
