//! Experiment output: per-replication CSV rows plus a `key=value` summary.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::config::ExperimentKind;
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Float(v) => Some(*v),
            Cell::Text(_) => None,
        }
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

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub experiment: ExperimentKind,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    summary: Vec<(String, f64)>,
    pub config: Vec<(String, String)>,
    pub wall_time: Duration,
}

impl ExperimentReport {
    pub fn new(experiment: ExperimentKind, columns: Vec<String>, config: Vec<(String, String)>) -> Self {
        Self {
            experiment,
            columns,
            rows: Vec::new(),
            summary: Vec::new(),
            config,
            wall_time: Duration::ZERO,
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Adds a summary metric; rejects non-finite values.
    pub fn metric(&mut self, name: impl Into<String>, value: f64) -> Result<()> {
        let name = name.into();
        if !value.is_finite() {
            return Err(HarnessError::NonFinite(name));
        }
        self.summary.push((name, value));
        Ok(())
    }

    pub fn summary(&self) -> &[(String, f64)] {
        &self.summary
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    /// Values of one numeric column, in row order.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        self.rows.iter().map(|r| r[idx].as_f64()).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .quote_style(csv::QuoteStyle::Necessary)
            .terminator(csv::Terminator::CRLF)
            .from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Summary text: experiment tag, config echo under `config.`, row count,
    /// then metrics in insertion order. Wall time is not included so that
    /// repeated runs produce identical files.
    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment={}", self.experiment.name());
        for (k, v) in &self.config {
            let _ = writeln!(s, "config.{k}={v}");
        }
        let _ = writeln!(s, "rows={}", self.rows.len());
        for (k, v) in &self.summary {
            let _ = writeln!(s, "{k}={}", format_float(*v));
        }
        s
    }

    /// Writes `<name>.csv` and `<name>.summary` into `dir`, creating it if needed.
    pub fn save(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.experiment.name()));
        let summary_path = dir.join(format!("{}.summary", self.experiment.name()));
        let file = fs::File::create(&csv_path)?;
        self.write_csv(std::io::BufWriter::new(file))?;
        fs::write(&summary_path, self.summary_text())?;
        Ok((csv_path, summary_path))
    }
}
