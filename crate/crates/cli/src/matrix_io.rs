//! Headerless numeric CSV matrices.

use std::fs::File;
use std::io::{BufWriter, Read};
use std::path::Path;

use anyhow::Context;
use ndarray::{Array2, ArrayView2};
use spikecov_core::linalg::DataMatrix;

/// First failure while reading a matrix, with 1-based row and column.
#[derive(Debug)]
pub struct ParseFailure {
    pub row: usize,
    pub column: usize,
    pub message: String,
}

impl std::fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "row {}, column {}: {}", self.row, self.column, self.message)
    }
}

impl std::error::Error for ParseFailure {}

pub fn parse_matrix<R: Read>(input: R) -> Result<Array2<f64>, ParseFailure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ParseFailure {
            row: i + 1,
            column: 1,
            message: e.to_string(),
        })?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(ParseFailure {
                row: i + 1,
                column: record.len().min(w) + 1,
                message: format!("expected {w} fields, found {}", record.len()),
            });
        }
        for (j, field) in record.iter().enumerate() {
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(ParseFailure {
                        row: i + 1,
                        column: j + 1,
                        message: format!("`{field}` is not a finite number"),
                    })
                }
            }
        }
        rows += 1;
    }
    let width = width.ok_or(ParseFailure {
        row: 1,
        column: 1,
        message: "input is empty".into(),
    })?;
    Ok(Array2::from_shape_vec((rows, width), values).expect("rectangular by construction"))
}

/// Reads a `p x T` panel, one variable per row.
pub fn read_panel(path: &Path) -> anyhow::Result<Result<DataMatrix, ParseFailure>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(parse_matrix(file).map(|a| DataMatrix::new(a).expect("finite and non-empty")))
}

pub fn write_matrix(path: &Path, m: ArrayView2<f64>) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = csv::WriterBuilder::new().from_writer(BufWriter::new(file));
    for row in m.rows() {
        w.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Two-column `name,value` file with a header.
pub fn write_named(path: &Path, entries: &[(String, f64)]) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = csv::WriterBuilder::new().from_writer(BufWriter::new(file));
    w.write_record(["name", "value"])?;
    for (k, v) in entries {
        w.write_record([k.clone(), format!("{v:.16e}")])?;
    }
    w.flush()?;
    Ok(())
}
