//! Curve CSV ingestion and emission.
//!
//! Files are rectangular numeric tables: one row per curve, one column per
//! grid point, with an optional single header row listing the grid
//! coordinates. A first row counts as a header exactly when it has at
//! least two columns and its values are strictly increasing inside (0, 1];
//! single-column files are always read as data. Data is written at 17
//! significant digits so a round trip through disk is exact, and every
//! write goes to a temporary sibling first and is renamed into place.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fwn::fspace::{FunctionalSample, Grid};

fn parse_row(record: &csv::StringRecord) -> std::result::Result<Vec<f64>, (usize, String)> {
    record
        .iter()
        .enumerate()
        .map(|(col, field)| {
            let t = field.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| (col, t.to_string()))
        })
        .collect()
}

fn is_header(values: &[f64]) -> bool {
    values.len() >= 2
        && values.iter().all(|v| *v > 0.0 && *v <= 1.0)
        && values.windows(2).all(|w| w[0] < w[1])
}

/// Read a curve table; a detected header row becomes the grid, otherwise
/// the uniform grid t_i = i/m is assumed.
pub fn read_curves(path: &Path) -> Result<FunctionalSample> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut grid_points: Option<Vec<f64>> = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("{}: row {}", path.display(), idx + 1))?;
        let values = match parse_row(&record) {
            Ok(v) => v,
            Err((col, field)) => bail!(
                "{}: row {}, column {}: cannot parse {:?} as a finite number",
                path.display(),
                idx + 1,
                col + 1,
                field
            ),
        };
        if idx == 0 && is_header(&values) {
            grid_points = Some(values);
            continue;
        }
        if let Some(first) = rows.first() {
            if values.len() != first.len() {
                bail!(
                    "{}: row {} has {} columns, expected {}",
                    path.display(),
                    idx + 1,
                    values.len(),
                    first.len()
                );
            }
        } else if let Some(points) = &grid_points {
            if values.len() != points.len() {
                bail!(
                    "{}: row {} has {} columns, but the header has {}",
                    path.display(),
                    idx + 1,
                    values.len(),
                    points.len()
                );
            }
        }
        rows.push(values);
    }
    if rows.is_empty() {
        bail!("{}: no curve rows", path.display());
    }
    let m = rows[0].len();
    let grid = match grid_points {
        Some(points) => Grid::with_weights(points, vec![1.0 / m as f64; m])?,
        None => Grid::uniform(m),
    };
    Ok(FunctionalSample::from_rows(grid, rows)?)
}

fn tmp_sibling(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Write a string to `path` atomically: temporary sibling, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = tmp_sibling(path);
    fs::write(&tmp, contents).with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("cannot move {} into place", path.display()))?;
    Ok(())
}

/// Write a curve table; the header row of grid coordinates is emitted for
/// multi-column files, where the reader can recognize it.
pub fn write_curves(path: &Path, sample: &FunctionalSample) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    if sample.m() >= 2 {
        writer.write_record(sample.grid().points().iter().map(|p| format!("{p:?}")))?;
    }
    for curve in sample.curves() {
        writer.write_record(curve.values().iter().map(|v| format!("{v:.16e}")))?;
    }
    let bytes = writer.into_inner().context("csv buffer")?;
    write_atomic(path, std::str::from_utf8(&bytes).context("csv text")?)
}
