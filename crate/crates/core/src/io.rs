//! Report and table output: `report.json` plus `series/<name>.csv` per
//! experiment directory. CSV uses a header row, comma delimiter and the
//! shortest round-trip decimal form of each value.

use crate::error::{Error, Result};
use crate::stability::{ExperimentReport, Series};
use std::fs;
use std::path::{Path, PathBuf};

fn io_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Write a header and rows of numbers.
pub fn write_csv<P: AsRef<Path>>(path: P, columns: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    w.write_record(columns).map_err(|e| io_error(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

pub fn write_series<P: AsRef<Path>>(path: P, series: &Series) -> Result<()> {
    write_csv(path, &series.columns, &series.rows)
}

/// Pretty JSON, UTF-8, trailing newline.
pub fn write_json<P: AsRef<Path>, T: serde::Serialize + ?Sized>(path: P, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_error(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Write `report` under `root/<name>/`; returns the experiment directory.
pub fn write_report<P: AsRef<Path>>(root: P, name: &str, report: &ExperimentReport) -> Result<PathBuf> {
    let dir = root.as_ref().join(name);
    let series_dir = dir.join("series");
    fs::create_dir_all(&series_dir).map_err(|e| io_error(&series_dir, e))?;
    write_json(dir.join("report.json"), report)?;
    for (key, series) in &report.series {
        write_series(series_dir.join(format!("{key}.csv")), series)?;
    }
    Ok(dir)
}
