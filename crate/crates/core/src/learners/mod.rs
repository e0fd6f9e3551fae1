//! Tree-ensemble baselines: a random forest and gradient-boosted trees, both
//! trained on a positive/negative target, plus class-balancing downsampling.

mod forest;
mod gbt;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::ClassLabel;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{derive_seed, rng_for, stream};

pub use forest::{bootstrap_indices, forest_fit, ForestModel, ForestParams};
pub use gbt::{gbt_fit, logistic_loss, sigmoid, GbtModel, GbtParams};
pub use tree::DecisionTree;

pub(crate) fn check_dim(expected: usize, x: &Matrix) -> Result<()> {
    if x.n_cols() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: x.n_cols(),
        });
    }
    Ok(())
}

pub(crate) fn check_binary(x: &Matrix, y: &[bool]) -> Result<()> {
    if x.n_rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.n_rows(),
            right: y.len(),
        });
    }
    if x.n_rows() < 2 {
        return Err(Error::Degenerate("training needs at least 2 rows".into()));
    }
    let pos = y.iter().filter(|&&v| v).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::Degenerate(
            "training labels contain a single class".into(),
        ));
    }
    Ok(())
}

/// Subsamples the majority class, without replacement, down to the size of
/// the minority class. Returns row indices in a seeded random order.
pub fn downsample(labels: &[ClassLabel], seed: u64) -> Result<Vec<usize>> {
    let (pos, neg): (Vec<usize>, Vec<usize>) =
        (0..labels.len()).partition(|&i| labels[i].is_positive());
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Degenerate("downsampling needs both classes".into()));
    }
    let mut rng = rng_for(seed, stream::DOWNSAMPLE);
    let (minority, majority) = if pos.len() <= neg.len() {
        (pos, neg)
    } else {
        (neg, pos)
    };
    let mut out: Vec<usize> = rand::seq::index::sample(&mut rng, majority.len(), minority.len())
        .into_iter()
        .map(|p| majority[p])
        .collect();
    out.extend(minority);
    out.shuffle(&mut rng);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Learner {
    RandomForest,
    GradientBoosting,
}

impl Learner {
    pub const ALL: [Learner; 2] = [Learner::RandomForest, Learner::GradientBoosting];

    pub fn as_str(self) -> &'static str {
        match self {
            Learner::RandomForest => "random_forest",
            Learner::GradientBoosting => "gradient_boosting",
        }
    }

    /// Fits the learner with its default parameters.
    pub fn fit(self, x: &Matrix, y: &[bool], seed: u64) -> Result<Model> {
        let seed = derive_seed(seed, stream::LEARNER);
        Ok(match self {
            Learner::RandomForest => Model::Forest(forest_fit(
                x,
                y,
                &ForestParams {
                    seed,
                    ..ForestParams::default()
                },
            )?),
            Learner::GradientBoosting => Model::Gbt(gbt_fit(
                x,
                y,
                &GbtParams {
                    seed,
                    ..GbtParams::default()
                },
            )?),
        })
    }
}

impl fmt::Display for Learner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Learner {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "random_forest" | "rf" | "forest" => Ok(Learner::RandomForest),
            "gradient_boosting" | "gbt" | "boosting" => Ok(Learner::GradientBoosting),
            _ => Err(format!(
                "unknown learner {s:?} (expected random_forest or gradient_boosting)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Forest(ForestModel),
    Gbt(GbtModel),
}

impl Model {
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        match self {
            Model::Forest(m) => m.predict_proba(x),
            Model::Gbt(m) => m.predict_proba(x),
        }
    }

    /// Class predictions at the 0.5 probability threshold.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<ClassLabel>> {
        Ok(self
            .predict_proba(x)?
            .into_iter()
            .map(|p| ClassLabel::from_positive(p >= 0.5))
            .collect())
    }
}
