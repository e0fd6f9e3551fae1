//! Train/test divergence diagnostics.
//!
//! The similarity diagnostic trains a forest to tell real training rows from
//! copies whose columns were shuffled independently (same marginals, joint
//! structure destroyed). Test rows the forest assigns to the shuffled class
//! lie outside the region the training data occupies.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::learners::{forest_fit, ForestParams};
use crate::matrix::Matrix;
use crate::rng::{derive_seed, rng_for, stream};

pub const MIN_TRAIN_ROWS: usize = 10;

/// Probability of the real class below which a test row counts as not recognized.
pub const RECOGNITION_THRESHOLD: f64 = 0.5;

/// Copy of `train` with every column shuffled by its own seeded permutation.
pub fn permute_columns(train: &Matrix, seed: u64) -> Matrix {
    let mut rng = rng_for(seed, stream::PERMUTE);
    let mut out = train.clone();
    let mut order: Vec<usize> = (0..train.n_rows()).collect();
    for j in 0..train.n_cols() {
        order.shuffle(&mut rng);
        for (i, &src) in order.iter().enumerate() {
            out.set(i, j, train.get(src, j));
        }
    }
    out
}

/// Fraction of `test` rows whose predicted probability of belonging to the
/// real training data is below 0.5.
pub fn similarity_diagnostic(train: &Matrix, test: &Matrix, seed: u64) -> Result<f64> {
    if train.n_rows() < MIN_TRAIN_ROWS {
        return Err(Error::Degenerate(format!(
            "similarity diagnostic needs at least {MIN_TRAIN_ROWS} training rows, got {}",
            train.n_rows()
        )));
    }
    if test.n_rows() == 0 {
        return Err(Error::Degenerate(
            "similarity diagnostic needs test rows".into(),
        ));
    }
    if test.n_cols() != train.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: train.n_cols(),
            found: test.n_cols(),
        });
    }
    let first = train.row(0);
    if train.rows().all(|r| r == first) {
        return Err(Error::Degenerate(
            "all training rows are identical; real and permuted rows cannot be told apart".into(),
        ));
    }

    let permuted = permute_columns(train, seed);
    let x = train.vstack(&permuted)?;
    let mut y = vec![true; train.n_rows()];
    y.extend(std::iter::repeat_n(false, train.n_rows()));
    let params = ForestParams {
        seed: derive_seed(seed, stream::DIAG_FOREST),
        ..ForestParams::default()
    };
    let forest = forest_fit(&x, &y, &params)?;
    let p_real = forest.predict_proba(test)?;
    let missed = p_real
        .iter()
        .filter(|&&p| p < RECOGNITION_THRESHOLD)
        .count();
    Ok(missed as f64 / test.n_rows() as f64)
}

/// Not-recognized fractions over repeats. `std_dev` is the sample standard
/// deviation (0 for a single repeat).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub fractions: Vec<f64>,
    pub mean: f64,
    pub std_dev: f64,
}

impl SimilarityReport {
    pub fn from_fractions(fractions: Vec<f64>) -> Result<Self> {
        if fractions.is_empty() {
            return Err(Error::Degenerate("no similarity fractions".into()));
        }
        let n = fractions.len() as f64;
        let mean = fractions.iter().sum::<f64>() / n;
        let std_dev = if fractions.len() < 2 {
            0.0
        } else {
            (fractions.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Ok(Self {
            fractions,
            mean,
            std_dev,
        })
    }
}

/// Two leading principal components of a predictor matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub components: [Vec<f64>; 2],
    pub eigenvalues: [f64; 2],
    /// Share of total variance carried by each component.
    pub explained_variance_ratio: [f64; 2],
}

/// Population covariance (divides by n) of the columns of `rows`.
pub fn covariance(rows: &Matrix) -> (Vec<f64>, DMatrix<f64>) {
    let (n, d) = (rows.n_rows(), rows.n_cols());
    let mut mean = vec![0.0; d];
    for r in rows.rows() {
        for (m, x) in mean.iter_mut().zip(r) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for r in rows.rows() {
        for a in 0..d {
            let da = r[a] - mean[a];
            for b in a..d {
                cov[(a, b)] += da * (r[b] - mean[b]);
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            let v = cov[(a, b)] / n as f64;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    (mean, cov)
}

/// Flips `v` so that its largest-magnitude coordinate (first on ties) is positive.
pub fn fix_sign(v: &mut [f64]) {
    let mut k = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[k].abs() {
            k = i;
        }
    }
    if v[k] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub fn pca_fit(rows: &Matrix) -> Result<PcaModel> {
    if rows.n_rows() < 3 {
        return Err(Error::Degenerate(format!(
            "PCA needs at least 3 rows, got {}",
            rows.n_rows()
        )));
    }
    let (mean, cov) = covariance(rows);
    let trace = cov.trace();
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    if order.len() < 2 || trace <= 0.0 || eig.eigenvalues[order[1]] <= 1e-12 * trace {
        return Err(Error::Degenerate(
            "predictor matrix has rank below 2".into(),
        ));
    }
    let take = |k: usize| -> (Vec<f64>, f64) {
        let mut v: Vec<f64> = eig.eigenvectors.column(order[k]).iter().copied().collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        fix_sign(&mut v);
        (v, eig.eigenvalues[order[k]].max(0.0))
    };
    let (c1, l1) = take(0);
    let (c2, l2) = take(1);
    Ok(PcaModel {
        mean,
        components: [c1, c2],
        eigenvalues: [l1, l2],
        explained_variance_ratio: [l1 / trace, l2 / trace],
    })
}

pub fn pca_project(model: &PcaModel, rows: &Matrix) -> Result<Vec<[f64; 2]>> {
    if rows.n_cols() != model.mean.len() {
        return Err(Error::DimensionMismatch {
            expected: model.mean.len(),
            found: rows.n_cols(),
        });
    }
    Ok(rows
        .rows()
        .map(|r| {
            let mut out = [0.0; 2];
            for (k, c) in model.components.iter().enumerate() {
                out[k] = r
                    .iter()
                    .zip(&model.mean)
                    .zip(c)
                    .map(|((x, m), w)| (x - m) * w)
                    .sum();
            }
            out
        })
        .collect())
}

/// Writes `pc1,pc2,label,capture,split_side` rows for the given dataset rows.
pub fn write_pca_csv<W: Write>(
    mut w: W,
    dataset: &Dataset,
    indices: &[usize],
    coords: &[[f64; 2]],
    side: &[&str],
) -> Result<()> {
    if indices.len() != coords.len() || indices.len() != side.len() {
        return Err(Error::LengthMismatch {
            left: indices.len(),
            right: coords.len().min(side.len()),
        });
    }
    writeln!(w, "pc1,pc2,label,capture,split_side")?;
    for ((&i, c), s) in indices.iter().zip(coords).zip(side) {
        let r = &dataset.rows()[i];
        writeln!(w, "{},{},{},{},{}", c[0], c[1], r.label, r.group, s)?;
    }
    w.flush()?;
    Ok(())
}
