//! Slow, direct reimplementations used to cross-check the library.
#![allow(dead_code)]

use splitlab::{Aggregation, ClassLabel};

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Greedy maximum-dissimilarity order, recomputing every aggregate from
/// scratch at each step. Ties go to the lowest candidate index.
pub fn brute_force_greedy(
    cands: &[Vec<f64>],
    reference: &[Vec<f64>],
    k: usize,
    how: Aggregation,
    seed_size: usize,
) -> Vec<usize> {
    let score = |p: &[f64], set: &[&Vec<f64>]| -> f64 {
        let ds: Vec<f64> = set.iter().map(|s| dist(p, s)).collect();
        match how {
            Aggregation::MeanDistance => ds.iter().sum::<f64>() / ds.len() as f64,
            Aggregation::MinDistance => ds.iter().copied().fold(f64::INFINITY, f64::min),
        }
    };
    let mut chosen: Vec<usize> = Vec::new();
    while chosen.len() < k {
        let set: Vec<&Vec<f64>> = if chosen.len() < seed_size {
            reference.iter().collect()
        } else {
            chosen.iter().map(|&c| &cands[c]).collect()
        };
        let scored: Vec<(usize, f64)> = (0..cands.len())
            .filter(|i| !chosen.contains(i))
            .map(|i| (i, score(&cands[i], &set)))
            .collect();
        let top = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        chosen.push(scored.iter().find(|s| s.1 == top).unwrap().0);
    }
    chosen
}

/// `n * (1 - sum_k p_k^2)` from class counts.
pub fn weighted_impurity(labels: &[bool]) -> f64 {
    let n = labels.len() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let mut impurity = 1.0;
    for class in [false, true] {
        let p = labels.iter().filter(|&&l| l == class).count() as f64 / n;
        impurity -= p * p;
    }
    n * impurity
}

/// Score of splitting `samples` by `x[feature] <= threshold`, or `None` when
/// a side would be smaller than `min_leaf`.
pub fn split_score(
    x: &[Vec<f64>],
    y: &[bool],
    samples: &[usize],
    feature: usize,
    threshold: f64,
    min_leaf: usize,
) -> Option<f64> {
    let (left, right): (Vec<usize>, Vec<usize>) =
        samples.iter().partition(|&&i| x[i][feature] <= threshold);
    if left.len() < min_leaf || right.len() < min_leaf {
        return None;
    }
    let labels = |s: &[usize]| s.iter().map(|&i| y[i]).collect::<Vec<_>>();
    Some(weighted_impurity(&labels(&left)) + weighted_impurity(&labels(&right)))
}

/// Lowest split score over every feature in `features` and every threshold
/// that separates two distinct observed values.
pub fn exhaustive_best_split(
    x: &[Vec<f64>],
    y: &[bool],
    samples: &[usize],
    features: &[usize],
    min_leaf: usize,
) -> Option<f64> {
    let mut best: Option<f64> = None;
    for &f in features {
        let mut values: Vec<f64> = samples.iter().map(|&i| x[i][f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for v in values.iter().take(values.len().saturating_sub(1)) {
            if let Some(s) = split_score(x, y, samples, f, *v, min_leaf) {
                best = Some(best.map_or(s, |b: f64| b.min(s)));
            }
        }
    }
    best
}

/// (sensitivity, specificity, balanced accuracy, F1) by walking the rows.
pub fn count_metrics(
    truth: &[ClassLabel],
    predicted: &[ClassLabel],
) -> (Option<f64>, Option<f64>, Option<f64>, Option<f64>) {
    let (mut pos, mut neg, mut hit_pos, mut hit_neg, mut called_pos) = (0, 0, 0, 0, 0);
    for (t, p) in truth.iter().zip(predicted) {
        if *p == ClassLabel::Botnet {
            called_pos += 1;
        }
        match t {
            ClassLabel::Botnet => {
                pos += 1;
                if p == t {
                    hit_pos += 1;
                }
            }
            ClassLabel::Normal => {
                neg += 1;
                if p == t {
                    hit_neg += 1;
                }
            }
        }
    }
    let sens = (pos > 0).then(|| hit_pos as f64 / pos as f64);
    let spec = (neg > 0).then(|| hit_neg as f64 / neg as f64);
    let ba = match (sens, spec) {
        (Some(a), Some(b)) => Some(0.5 * (a + b)),
        _ => None,
    };
    let f1 = if pos + called_pos == 0 {
        None
    } else {
        let precision = if called_pos == 0 {
            0.0
        } else {
            hit_pos as f64 / called_pos as f64
        };
        let recall = if pos == 0 {
            0.0
        } else {
            hit_pos as f64 / pos as f64
        };
        Some(if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        })
    };
    (sens, spec, ba, f1)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns eigenvalues
/// in descending order with unit eigenvectors as the matching entries.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> Vec<(f64, Vec<f64>)> {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|j| (a[j][j], v.iter().map(|row| row[j]).collect()))
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    pairs
}

/// Population covariance of `rows`.
pub fn covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len() as f64;
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    (0..d)
        .map(|a| {
            (0..d)
                .map(|b| {
                    rows.iter()
                        .map(|r| (r[a] - mean[a]) * (r[b] - mean[b]))
                        .sum::<f64>()
                        / n
                })
                .collect()
        })
        .collect()
}

/// Median by full sort.
pub fn sorted_median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Quantile with linear interpolation between closest ranks.
pub fn sorted_quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q;
    let below = v[h.floor() as usize];
    let above = v[h.ceil() as usize];
    below + (h - h.floor()) * (above - below)
}

/// Mean binomial deviance of raw scores.
pub fn mean_log_loss(y: &[bool], score: &[f64]) -> f64 {
    let total: f64 = y
        .iter()
        .zip(score)
        .map(|(&t, &f)| {
            let p = 1.0 / (1.0 + (-f).exp());
            if t {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    total / y.len() as f64
}
