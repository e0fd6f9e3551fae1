use serde::{Deserialize, Serialize};

use super::tree::{fit_regressor, DecisionTree};
use super::{check_binary, check_dim};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{rng_for, stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub n_stages: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Fraction of rows each stage is fitted on; 1.0 uses every row.
    pub subsample: f64,
    pub seed: u64,
}

impl Default for GbtParams {
    fn default() -> Self {
        Self {
            n_stages: 200,
            learning_rate: 0.1,
            max_depth: 3,
            min_leaf: 1,
            subsample: 1.0,
            seed: 0,
        }
    }
}

/// Gradient-boosted trees with logistic loss. Scores are log-odds of the
/// positive class; stage trees store already-shrunk leaf values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    init_score: f64,
    trees: Vec<DecisionTree>,
    learning_rate: f64,
    n_features: usize,
    /// Mean training logistic loss after each stage.
    train_loss: Vec<f64>,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean logistic loss of scores `f` against labels `y`.
pub fn logistic_loss(y: &[bool], f: &[f64]) -> f64 {
    // log(1 + e^f) - y f, written to avoid overflow
    let sum: f64 = y
        .iter()
        .zip(f)
        .map(|(&yi, &fi)| {
            let softplus = fi.max(0.0) + (-fi.abs()).exp().ln_1p();
            softplus - if yi { fi } else { 0.0 }
        })
        .sum();
    sum / y.len() as f64
}

/// Step halvings tried when a stage would raise the training loss.
const MAX_BACKTRACK: usize = 30;

/// Fits the boosted ensemble.
///
/// The initial score is the log-odds of positive prevalence. Each stage fits a
/// depth-limited squared-error tree to the negative gradient `y - p`, sets
/// leaf values by a Newton step `sum(y - p) / sum(p (1 - p))` and shrinks them
/// by the learning rate. If a stage would increase the training loss its leaf
/// values are halved until it does not, so the recorded loss never rises.
pub fn gbt_fit(x: &Matrix, y: &[bool], params: &GbtParams) -> Result<GbtModel> {
    check_binary(x, y)?;
    if !(params.learning_rate.is_finite() && params.learning_rate >= 0.0) {
        return Err(Error::Config(format!(
            "invalid learning rate {}",
            params.learning_rate
        )));
    }
    if !(params.subsample > 0.0 && params.subsample <= 1.0) {
        return Err(Error::Config(format!(
            "subsample must be in (0, 1], got {}",
            params.subsample
        )));
    }
    let n = x.n_rows();
    let pos = y.iter().filter(|&&v| v).count() as f64;
    let prevalence = pos / n as f64;
    let init_score = (prevalence / (1.0 - prevalence)).ln();

    let mut scores = vec![init_score; n];
    let mut loss = logistic_loss(y, &scores);
    let mut trees = Vec::with_capacity(params.n_stages);
    let mut train_loss = Vec::with_capacity(params.n_stages);
    let mut rng = rng_for(params.seed, stream::LEARNER);
    let n_sub = ((params.subsample * n as f64).round() as usize).clamp(1, n);

    for _ in 0..params.n_stages {
        let p: Vec<f64> = scores.iter().map(|&s| sigmoid(s)).collect();
        let grad: Vec<f64> = y
            .iter()
            .zip(&p)
            .map(|(&yi, &pi)| if yi { 1.0 - pi } else { -pi })
            .collect();
        let hess: Vec<f64> = p.iter().map(|&pi| pi * (1.0 - pi)).collect();
        let samples: Vec<usize> = if n_sub == n {
            (0..n).collect()
        } else {
            let mut s = rand::seq::index::sample(&mut rng, n, n_sub).into_vec();
            s.sort_unstable();
            s
        };
        let mut tree = fit_regressor(x, &grad, &hess, samples, params.max_depth, params.min_leaf);
        tree.scale_leaves(params.learning_rate);

        let mut step: Vec<f64> = x.rows().map(|r| tree.predict_row(r)).collect();
        let mut candidate: Vec<f64> = scores.iter().zip(&step).map(|(s, d)| s + d).collect();
        let mut new_loss = logistic_loss(y, &candidate);
        let mut halvings = 0;
        while new_loss > loss && halvings < MAX_BACKTRACK {
            tree.scale_leaves(0.5);
            step.iter_mut().for_each(|d| *d *= 0.5);
            candidate = scores.iter().zip(&step).map(|(s, d)| s + d).collect();
            new_loss = logistic_loss(y, &candidate);
            halvings += 1;
        }
        if new_loss > loss {
            tree.scale_leaves(0.0);
            new_loss = loss;
        } else {
            scores = candidate;
        }
        loss = new_loss;
        train_loss.push(loss);
        trees.push(tree);
    }

    Ok(GbtModel {
        init_score,
        trees,
        learning_rate: params.learning_rate,
        n_features: x.n_cols(),
        train_loss,
    })
}

impl GbtModel {
    pub fn init_score(&self) -> f64 {
        self.init_score
    }

    pub fn n_stages(&self) -> usize {
        self.trees.len()
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn train_loss(&self) -> &[f64] {
        &self.train_loss
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    /// Log-odds using the first `stages` trees.
    pub fn staged_decision_function(&self, x: &Matrix, stages: usize) -> Result<Vec<f64>> {
        check_dim(self.n_features, x)?;
        let k = stages.min(self.trees.len());
        Ok(x.rows()
            .map(|r| {
                self.init_score
                    + self.trees[..k]
                        .iter()
                        .map(|t| t.predict_row(r))
                        .sum::<f64>()
            })
            .collect())
    }

    pub fn decision_function(&self, x: &Matrix) -> Result<Vec<f64>> {
        self.staged_decision_function(x, self.trees.len())
    }

    pub fn staged_predict_proba(&self, x: &Matrix, stages: usize) -> Result<Vec<f64>> {
        Ok(self
            .staged_decision_function(x, stages)?
            .into_iter()
            .map(sigmoid)
            .collect())
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        self.staged_predict_proba(x, self.trees.len())
    }

    /// Copy of the model keeping only the first `stages` trees.
    pub fn truncated(&self, stages: usize) -> GbtModel {
        let k = stages.min(self.trees.len());
        GbtModel {
            init_score: self.init_score,
            trees: self.trees[..k].to_vec(),
            learning_rate: self.learning_rate,
            n_features: self.n_features,
            train_loss: self.train_loss[..k].to_vec(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}
