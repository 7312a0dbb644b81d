use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::field::QGrid;
use super::husimi::BlochGrid;
use crate::error::Result;

/// Axes and normalization checks written next to a grid CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSidecar {
    pub kind: String,
    pub row_axis: String,
    pub column_axis: String,
    pub rows: Vec<f64>,
    pub columns: Vec<f64>,
    pub min_value: f64,
    pub max_value: f64,
    /// Riemann integral for Q, resolution-of-identity integral for Husimi.
    pub normalization: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spin: Option<f64>,
}

fn write_matrix(path: &Path, values: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in values {
        w.write_record(row.iter().map(|v| format!("{v:.17e}")))?;
    }
    w.flush()?;
    Ok(())
}

fn write_sidecar(path: &Path, sidecar: &GridSidecar) -> Result<PathBuf> {
    let out = path.with_extension("json");
    serde_json::to_writer_pretty(BufWriter::new(File::create(&out)?), sidecar)?;
    Ok(out)
}

fn max_of(values: &[Vec<f64>]) -> f64 {
    values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
}

impl QGrid {
    pub fn sidecar(&self) -> GridSidecar {
        GridSidecar {
            kind: "field_q".into(),
            row_axis: "im_alpha".into(),
            column_axis: "re_alpha".into(),
            rows: self.im.clone(),
            columns: self.re.clone(),
            min_value: self.min_value(),
            max_value: max_of(&self.values),
            normalization: self.integral(),
            spin: None,
        }
    }

    /// Matrix CSV (rows Im α, columns Re α) plus JSON sidecar; returns the sidecar path.
    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        write_matrix(path, &self.values)?;
        write_sidecar(path, &self.sidecar())
    }
}

impl BlochGrid {
    pub fn sidecar(&self) -> GridSidecar {
        GridSidecar {
            kind: "spin_husimi".into(),
            row_axis: "theta".into(),
            column_axis: "phi".into(),
            rows: self.theta.clone(),
            columns: self.phi.clone(),
            min_value: self.min_value(),
            max_value: self.max_value(),
            normalization: self.resolution_integral(),
            spin: Some(self.spin),
        }
    }

    /// Matrix CSV (rows θ, columns φ) plus JSON sidecar; returns the sidecar path.
    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        write_matrix(path, &self.values)?;
        write_sidecar(path, &self.sidecar())
    }
}

/// 8-bit binary PGM scaled to the grid maximum, first row at the top.
pub fn write_pgm(path: &Path, values: &[Vec<f64>]) -> Result<()> {
    let height = values.len();
    let width = values.first().map_or(0, Vec::len);
    let top = max_of(values).max(f64::MIN_POSITIVE);
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{width} {height}\n255\n")?;
    let bytes: Vec<u8> = values
        .iter()
        .flatten()
        .map(|v| (v.max(0.0) / top * 255.0).round() as u8)
        .collect();
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}
