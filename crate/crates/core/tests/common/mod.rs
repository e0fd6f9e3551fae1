#![allow(dead_code)]

pub mod oracles;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splitlab::{generate_synthetic, ClassLabel, Dataset, FeatureVector, Matrix, Row, SynthConfig};

pub const SYNTH_SEED: u64 = 7;

pub fn synthetic() -> Dataset {
    generate_synthetic(&SynthConfig::default_layout(), SYNTH_SEED).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.rows().map(|r| r.to_vec()).collect()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Matrix {
    let data = (0..n * d).map(|_| rng.random::<f64>()).collect();
    Matrix::from_vec(n, d, data).unwrap()
}

/// Values from a small integer grid, so that ties in distances and
/// thresholds are common.
pub fn grid_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize, levels: u32) -> Matrix {
    let data = (0..n * d)
        .map(|_| rng.random_range(0..levels) as f64)
        .collect();
    Matrix::from_vec(n, d, data).unwrap()
}

/// Two well separated Gaussian blobs in `d` dimensions; label is `true` for the second.
pub fn blobs(rng: &mut ChaCha8Rng, n_per_class: usize, d: usize) -> (Matrix, Vec<bool>) {
    let mut data = Vec::new();
    let mut y = Vec::new();
    for class in [false, true] {
        let centre = if class { 0.8 } else { 0.2 };
        for _ in 0..n_per_class {
            for _ in 0..d {
                data.push(centre + rng.random_range(-0.1..0.1));
            }
            y.push(class);
        }
    }
    (Matrix::from_vec(2 * n_per_class, d, data).unwrap(), y)
}

pub fn dataset_from(x: &Matrix, y: &[bool], groups: Option<&[String]>) -> Dataset {
    let rows = x
        .rows()
        .zip(y)
        .enumerate()
        .map(|(i, (r, &label))| Row {
            features: FeatureVector(r.try_into().unwrap()),
            label: ClassLabel::from_positive(label),
            group: groups.map(|g| g[i].clone()).unwrap_or_default(),
        })
        .collect();
    Dataset::new(rows).unwrap()
}
