//! Dataset schema, CSV ingestion and standardization.
//!
//! A dataset row is a 10-component flow feature vector (periodicity, duration
//! and size cumulative frequencies), a binary class label and the identifier of
//! the capture the connection came from.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const N_PREDICTORS: usize = 10;

pub const PREDICTOR_NAMES: [&str; N_PREDICTORS] = [
    "x_sp", "x_wp", "x_wnp", "x_snp", "x_ds", "x_dm", "x_dl", "x_ss", "x_sm", "x_sl",
];

pub const CSV_HEADER: &str = "x_sp,x_wp,x_wnp,x_snp,x_ds,x_dm,x_dl,x_ss,x_sm,x_sl,label,capture";

const N_COLUMNS: usize = N_PREDICTORS + 2;

/// Flow predictors in header order: four periodicity, three duration and
/// three size frequencies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; N_PREDICTORS]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        PREDICTOR_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.0[i])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    Botnet,
    Normal,
}

impl ClassLabel {
    /// Botnet is the positive class.
    pub fn is_positive(self) -> bool {
        self == ClassLabel::Botnet
    }

    pub fn from_positive(positive: bool) -> Self {
        if positive {
            ClassLabel::Botnet
        } else {
            ClassLabel::Normal
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Botnet => "Botnet",
            ClassLabel::Normal => "Normal",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "Botnet" => Ok(ClassLabel::Botnet),
            "Normal" => Ok(ClassLabel::Normal),
            other => Err(format!(
                "unknown label {other:?} (expected Botnet or Normal)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub features: FeatureVector,
    pub label: ClassLabel,
    /// Capture identifier; may be empty when the source has no grouping.
    pub group: String,
}

/// Per-column mean and population standard deviation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub mean: Vec<f64>,
    pub std_dev: Vec<f64>,
}

impl StandardizationParams {
    /// Statistics of the columns of `m`. Uses Welford's update; constant
    /// columns get a standard deviation of exactly 0.
    pub fn fit(m: &Matrix) -> Result<Self> {
        if m.n_rows() == 0 {
            return Err(Error::Degenerate(
                "standardization needs a non-empty reference set".into(),
            ));
        }
        let d = m.n_cols();
        let mut mean = vec![0.0; d];
        let mut m2 = vec![0.0; d];
        for (k, row) in m.rows().enumerate() {
            let n = (k + 1) as f64;
            for j in 0..d {
                let delta = row[j] - mean[j];
                mean[j] += delta / n;
                m2[j] += delta * (row[j] - mean[j]);
            }
        }
        let n = m.n_rows() as f64;
        let std_dev = (0..d)
            .map(|j| {
                let first = m.get(0, j);
                if m.rows().all(|r| r[j] == first) {
                    0.0
                } else {
                    (m2[j] / n).max(0.0).sqrt()
                }
            })
            .collect();
        Ok(Self { mean, std_dev })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            mean: vec![0.0; d],
            std_dev: vec![1.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Maps each column to `(x - mean) / std_dev`; zero-deviation columns map to 0.
    pub fn apply(&self, m: &Matrix) -> Result<Matrix> {
        self.check_dim(m)?;
        let mut out = m.clone();
        for i in 0..out.n_rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = if self.std_dev[j] > 0.0 {
                    (*v - self.mean[j]) / self.std_dev[j]
                } else {
                    0.0
                };
            }
        }
        Ok(out)
    }

    /// Inverse of [`apply`](Self::apply). Zero-deviation columns come back as their mean.
    pub fn invert(&self, m: &Matrix) -> Result<Matrix> {
        self.check_dim(m)?;
        let mut out = m.clone();
        for i in 0..out.n_rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = *v * self.std_dev[j] + self.mean[j];
            }
        }
        Ok(out)
    }

    fn check_dim(&self, m: &Matrix) -> Result<()> {
        if m.n_cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: m.n_cols(),
            });
        }
        Ok(())
    }
}

/// Standardizes `rows` with externally captured parameters.
pub fn standardize(rows: &Matrix, params: &StandardizationParams) -> Result<Matrix> {
    params.apply(rows)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IngestOptions {
    /// Reject predictor values above 1.
    pub assume_normalized: bool,
}

/// Immutable labelled dataset with cached column statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    rows: Vec<Row>,
    column_stats: StandardizationParams,
}

impl Dataset {
    pub fn new(rows: Vec<Row>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Degenerate(format!(
                "a dataset needs at least 2 rows, got {}",
                rows.len()
            )));
        }
        for (i, r) in rows.iter().enumerate() {
            if let Some(v) = r.features.0.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::Degenerate(format!(
                    "data row {} has an invalid predictor value {v}",
                    i + 1
                )));
            }
        }
        let m = Matrix::from_rows(&rows.iter().map(|r| r.features.0).collect::<Vec<_>>())?;
        let column_stats = StandardizationParams::fit(&m)?;
        Ok(Self { rows, column_stats })
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_stats(&self) -> &StandardizationParams {
        &self.column_stats
    }

    pub fn labels(&self) -> Vec<ClassLabel> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn count(&self, label: ClassLabel) -> usize {
        self.rows.iter().filter(|r| r.label == label).count()
    }

    pub fn has_both_classes(&self) -> bool {
        self.count(ClassLabel::Botnet) > 0 && self.count(ClassLabel::Normal) > 0
    }

    /// Sorted distinct non-empty group ids.
    pub fn groups(&self) -> Vec<&str> {
        let mut g: Vec<&str> = self
            .rows
            .iter()
            .map(|r| r.group.as_str())
            .filter(|g| !g.is_empty())
            .collect();
        g.sort_unstable();
        g.dedup();
        g
    }

    /// Index of the first row whose group id is empty.
    pub fn first_missing_group(&self) -> Option<usize> {
        self.rows.iter().position(|r| r.group.is_empty())
    }

    pub fn predictors(&self) -> Matrix {
        self.predictors_of_iter(0..self.rows.len())
    }

    pub fn predictors_of(&self, indices: &[usize]) -> Matrix {
        self.predictors_of_iter(indices.iter().copied())
    }

    fn predictors_of_iter(&self, idx: impl Iterator<Item = usize>) -> Matrix {
        let mut data = Vec::new();
        let mut n = 0;
        for i in idx {
            data.extend_from_slice(&self.rows[i].features.0);
            n += 1;
        }
        Matrix::from_vec(n, N_PREDICTORS, data).expect("row width is fixed")
    }

    pub fn labels_of(&self, indices: &[usize]) -> Vec<ClassLabel> {
        indices.iter().map(|&i| self.rows[i].label).collect()
    }

    /// Writes the dataset in the ingest CSV format.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            for v in r.features.0 {
                write!(w, "{v},")?;
            }
            writeln!(w, "{},{}", r.label, r.group)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads a dataset from CSV text. The header must match [`CSV_HEADER`] exactly.
pub fn parse_dataset<R: Read>(source: R, opts: IngestOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);

    let mut records = reader.records();
    match records.next() {
        None => {
            return Err(Error::Ingest {
                line: 1,
                message: "missing header row".into(),
            })
        }
        Some(rec) => {
            let rec = rec?;
            let header: Vec<&str> = rec.iter().collect();
            if header.join(",") != CSV_HEADER {
                return Err(Error::Ingest {
                    line: 1,
                    message: format!("header must be `{CSV_HEADER}`"),
                });
            }
        }
    }

    let mut rows = Vec::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let err = |message: String| Error::Ingest { line, message };
        if rec.len() != N_COLUMNS {
            return Err(err(format!(
                "expected {N_COLUMNS} columns, found {}",
                rec.len()
            )));
        }
        let mut features = [0.0; N_PREDICTORS];
        for (j, slot) in features.iter_mut().enumerate() {
            let cell = &rec[j];
            let v: f64 = cell.trim().parse().map_err(|_| {
                err(format!(
                    "malformed number {cell:?} in column {}",
                    PREDICTOR_NAMES[j]
                ))
            })?;
            if !v.is_finite() || v < 0.0 {
                return Err(err(format!(
                    "{} must be finite and non-negative, got {cell}",
                    PREDICTOR_NAMES[j]
                )));
            }
            if opts.assume_normalized && v > 1.0 {
                return Err(err(format!(
                    "{} = {cell} exceeds 1 with normalized predictors assumed",
                    PREDICTOR_NAMES[j]
                )));
            }
            *slot = v;
        }
        let label: ClassLabel = rec[N_PREDICTORS].parse().map_err(err)?;
        rows.push(Row {
            features: FeatureVector(features),
            label,
            group: rec[N_PREDICTORS + 1].to_string(),
        });
    }
    Dataset::new(rows)
}
