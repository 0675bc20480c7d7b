//! CSV and JSON files used by the command-line tools.
//!
//! Design matrices are headerless numeric grids, one sample per row; response
//! vectors hold one value per line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))
}

fn parse_row(record: &csv::StringRecord, line: usize, path: &Path) -> Result<Vec<f64>> {
    record
        .iter()
        .map(|f| {
            f.parse::<f64>()
                .with_context(|| format!("{}:{}: not a number: {f:?}", path.display(), line))
        })
        .collect()
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in reader(path)?.records().enumerate() {
        let rec = rec.with_context(|| format!("reading {}", path.display()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let row = parse_row(&rec, i + 1, path)?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                bail!("{}:{}: expected {} columns, found {}", path.display(), i + 1, first.len(), row.len());
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("{} holds no rows", path.display());
    }
    let (n, p) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
}

pub fn read_vector(path: &Path) -> Result<DVector<f64>> {
    let mut values = Vec::new();
    for (i, rec) in reader(path)?.records().enumerate() {
        let rec = rec.with_context(|| format!("reading {}", path.display()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let row = parse_row(&rec, i + 1, path)?;
        if row.len() != 1 {
            bail!("{}:{}: expected one value per line, found {}", path.display(), i + 1, row.len());
        }
        values.push(row[0]);
    }
    Ok(DVector::from_vec(values))
}

pub fn write_matrix(path: &Path, x: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    for i in 0..x.nrows() {
        w.write_record(x.row(i).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_vector(path: &Path, y: &DVector<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for v in y.iter() {
        writeln!(w, "{v}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
