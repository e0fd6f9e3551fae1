use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{fit_classifier, DecisionTree, TreeParams};
use super::{check_binary, check_dim};
use crate::error::Result;
use crate::matrix::Matrix;
use crate::rng::{derive_seed, rng_for, stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// `None` means `floor(sqrt(n_features))`, i.e. 3 for the 10 flow predictors.
    pub features_per_split: Option<usize>,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_leaf: 1,
            features_per_split: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    trees: Vec<DecisionTree>,
    tree_seeds: Vec<u64>,
    features_per_split: usize,
    n_features: usize,
}

/// Bootstrap resample of `n` rows drawn with the tree's own seed.
pub fn bootstrap_indices(n: usize, tree_seed: u64) -> Vec<usize> {
    let mut rng = rng_for(tree_seed, stream::TREE);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Random forest of Gini trees, each grown on a bootstrap resample. Trees are
/// fitted in parallel; each draws from its own seed so the model does not
/// depend on scheduling.
pub fn forest_fit(x: &Matrix, y: &[bool], params: &ForestParams) -> Result<ForestModel> {
    check_binary(x, y)?;
    let d = x.n_cols();
    let mtry = params
        .features_per_split
        .unwrap_or_else(|| ((d as f64).sqrt().floor() as usize).max(1))
        .clamp(1, d);
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        features_per_split: Some(mtry),
    };
    let tree_seeds: Vec<u64> = (0..params.n_trees as u64)
        .map(|t| derive_seed(params.seed, stream::TREE.wrapping_add(t)))
        .collect();
    let trees = tree_seeds
        .par_iter()
        .map(|&s| {
            let samples = bootstrap_indices(x.n_rows(), s);
            let mut rng = rng_for(s, stream::TREE ^ 0xff);
            fit_classifier(x, y, samples, &tree_params, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        trees,
        tree_seeds,
        features_per_split: mtry,
        n_features: d,
    })
}

impl ForestModel {
    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn tree_seeds(&self) -> &[u64] {
        &self.tree_seeds
    }

    pub fn features_per_split(&self) -> usize {
        self.features_per_split
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Mean positive-class probability over the trees.
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_dim(self.n_features, x)?;
        let n_trees = self.trees.len() as f64;
        Ok(x.rows()
            .map(|row| self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / n_trees)
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}
