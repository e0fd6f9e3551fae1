//! Lloyd's k-means with k-means++ seeding.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{squared_euclidean, Matrix};
use crate::rng::{rng_for, stream};

pub const MAX_ITERATIONS: usize = 300;
pub const TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMeansFit {
    pub labels: Vec<usize>,
    pub centroids: Matrix,
    pub iterations: usize,
}

impl KMeansFit {
    /// Within-cluster sum of squared distances.
    pub fn inertia(&self, points: &Matrix) -> f64 {
        within_cluster_ss(points, &self.labels, &self.centroids)
    }
}

pub fn within_cluster_ss(points: &Matrix, labels: &[usize], centroids: &Matrix) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &c)| squared_euclidean(points.row(i), centroids.row(c)))
        .sum()
}

fn nearest(row: &[f64], centroids: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centroids.n_rows() {
        let d = squared_euclidean(row, centroids.row(c));
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init(points: &Matrix, k: usize, seed: u64) -> Matrix {
    let mut rng = rng_for(seed, stream::KMEANS);
    let n = points.n_rows();
    let mut centroids = Matrix::zeros(k, points.n_cols());
    let first = rng.random_range(0..n);
    centroids.row_mut(0).copy_from_slice(points.row(first));
    let mut d2: Vec<f64> = (0..n)
        .map(|i| squared_euclidean(points.row(i), points.row(first)))
        .collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > target && w > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.row_mut(c).copy_from_slice(points.row(pick));
        for (i, slot) in d2.iter_mut().enumerate() {
            let d = squared_euclidean(points.row(i), centroids.row(c));
            if d < *slot {
                *slot = d;
            }
        }
    }
    centroids
}

/// Clusters `points` into `k` groups.
///
/// Assignment runs in parallel; centroid sums are accumulated sequentially in
/// row order so the result does not depend on the thread count. A cluster that
/// ends up empty is reseeded with the point farthest from its own centroid.
/// The returned centroids are the means of the returned labels.
pub fn kmeans_fit(points: &Matrix, k: usize, seed: u64) -> Result<KMeansFit> {
    let n = points.n_rows();
    if k == 0 {
        return Err(Error::Config("k-means needs k >= 1".into()));
    }
    if k > n {
        return Err(Error::Config(format!("k-means with k = {k} on {n} points")));
    }
    let d = points.n_cols();
    let mut centroids = plus_plus_init(points, k, seed);
    let mut labels = vec![0usize; n];
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let assigned: Vec<(usize, f64)> = (0..n)
            .into_par_iter()
            .map(|i| nearest(points.row(i), &centroids))
            .collect();
        for (slot, (c, _)) in labels.iter_mut().zip(&assigned) {
            *slot = *c;
        }

        let mut sums = Matrix::zeros(k, d);
        let mut counts = vec![0usize; k];
        for (i, &c) in labels.iter().enumerate() {
            counts[c] += 1;
            for (s, x) in sums.row_mut(c).iter_mut().zip(points.row(i)) {
                *s += x;
            }
        }

        let mut taken = vec![false; n];
        for c in 0..k {
            if counts[c] == 0 {
                // farthest point from its centroid, lowest index on ties
                let mut far = None;
                let mut far_d = -1.0;
                for (i, &(_, di)) in assigned.iter().enumerate() {
                    if !taken[i] && counts[labels[i]] > 1 && di > far_d {
                        far = Some(i);
                        far_d = di;
                    }
                }
                let Some(i) = far else { continue };
                taken[i] = true;
                let old = labels[i];
                counts[old] -= 1;
                for (s, x) in sums.row_mut(old).iter_mut().zip(points.row(i)) {
                    *s -= x;
                }
                labels[i] = c;
                counts[c] = 1;
                sums.row_mut(c).copy_from_slice(points.row(i));
            }
        }

        let mut shift: f64 = 0.0;
        for (c, &count) in counts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let inv = 1.0 / count as f64;
            let new: Vec<f64> = sums.row(c).iter().map(|s| s * inv).collect();
            shift = shift.max(squared_euclidean(&new, centroids.row(c)).sqrt());
            centroids.row_mut(c).copy_from_slice(&new);
        }
        if shift < TOLERANCE {
            break;
        }
    }

    Ok(KMeansFit {
        labels,
        centroids,
        iterations,
    })
}
