//! Train/test splitting strategies.
//!
//! Every strategy is a pure function of `(dataset, config)`: the only source
//! of randomness is a ChaCha stream derived from `config.seed`. Returned index
//! sets are disjoint, sorted ascending and have exactly the requested sizes.

mod kmeans;

use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, StandardizationParams};
use crate::error::{Error, Result};
use crate::matrix::{euclidean, Matrix};
use crate::rng::{derive_seed, rng_for, stream};

pub use kmeans::{kmeans_fit, within_cluster_ss, KMeansFit, MAX_ITERATIONS, TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    MonteCarlo,
    Dissimilarity,
    Informed,
    Clustering,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::MonteCarlo,
        Strategy::Dissimilarity,
        Strategy::Informed,
        Strategy::Clustering,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::MonteCarlo => "monte_carlo",
            Strategy::Dissimilarity => "dissimilarity",
            Strategy::Informed => "informed",
            Strategy::Clustering => "clustering",
        }
    }

    /// Whether the strategy keeps whole groups on one side.
    pub fn is_grouped(self) -> bool {
        matches!(self, Strategy::Informed | Strategy::Clustering)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "monte_carlo" | "montecarlo" | "mc" => Ok(Strategy::MonteCarlo),
            "dissimilarity" => Ok(Strategy::Dissimilarity),
            "informed" => Ok(Strategy::Informed),
            "clustering" | "cluster" => Ok(Strategy::Clustering),
            _ => Err(format!(
                "unknown strategy {s:?} (expected monte_carlo, dissimilarity, informed or clustering)"
            )),
        }
    }
}

/// Aggregate distance from a candidate row to a set of rows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    MeanDistance,
    MinDistance,
}

impl FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "mean" | "mean_distance" => Ok(Aggregation::MeanDistance),
            "min" | "min_distance" | "maxmin" => Ok(Aggregation::MinDistance),
            _ => Err(format!("unknown aggregation {s:?} (expected mean or min)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
    pub strategy: Strategy,
    pub aggregation: Aggregation,
    pub n_clusters: usize,
    /// Rows farthest from the training set used to start the dissimilar test set.
    pub dissim_seed_size: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            n_train: 2000,
            n_test: 1000,
            seed: 0,
            strategy: Strategy::MonteCarlo,
            aggregation: Aggregation::MeanDistance,
            n_clusters: 10,
            dissim_seed_size: 1,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self, n_rows: usize) -> Result<()> {
        if self.n_train < 2 {
            return Err(Error::Config(format!(
                "n_train must be >= 2, got {}",
                self.n_train
            )));
        }
        if self.n_test < 1 {
            return Err(Error::Config("n_test must be >= 1".into()));
        }
        if self.n_train + self.n_test > n_rows {
            return Err(Error::Config(format!(
                "n_train + n_test = {} exceeds the {n_rows} available rows",
                self.n_train + self.n_test
            )));
        }
        if self.dissim_seed_size < 1 {
            return Err(Error::Config("dissim_seed_size must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPair {
    pub strategy: Strategy,
    pub seed: u64,
    pub repeat: usize,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

impl SplitPair {
    fn new(
        config: &SplitConfig,
        repeat: usize,
        mut train_indices: Vec<usize>,
        mut test_indices: Vec<usize>,
    ) -> Self {
        train_indices.sort_unstable();
        test_indices.sort_unstable();
        Self {
            strategy: config.strategy,
            seed: config.seed,
            repeat,
            train_indices,
            test_indices,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Checks disjointness and index range against a dataset of `n_rows` rows.
    pub fn check(&self, n_rows: usize) -> Result<()> {
        if let Some(i) = self
            .train_indices
            .iter()
            .chain(&self.test_indices)
            .find(|&&i| i >= n_rows)
        {
            return Err(Error::Config(format!(
                "split index {i} out of range for {n_rows} rows"
            )));
        }
        let mut seen = vec![false; n_rows];
        for &i in self.train_indices.iter().chain(&self.test_indices) {
            if seen[i] {
                return Err(Error::Config(format!("split index {i} appears twice")));
            }
            seen[i] = true;
        }
        Ok(())
    }
}

/// Runs `config.strategy`. `repeat` is recorded on the result; randomness comes
/// from `config.seed` alone.
pub fn split(dataset: &Dataset, config: &SplitConfig, repeat: usize) -> Result<SplitPair> {
    match config.strategy {
        Strategy::MonteCarlo => monte_carlo_split(dataset, config, repeat),
        Strategy::Dissimilarity => dissimilarity_split(dataset, config, repeat),
        Strategy::Informed => informed_split(dataset, config, repeat),
        Strategy::Clustering => clustering_split(dataset, config, repeat),
    }
}

fn split_rng(config: &SplitConfig) -> ChaCha8Rng {
    rng_for(config.seed, stream::SPLIT)
}

/// Draws `n_train + n_test` rows without replacement and partitions them at random.
fn monte_carlo_indices(n_rows: usize, config: &SplitConfig) -> (Vec<usize>, Vec<usize>) {
    let mut rng = split_rng(config);
    let mut picked = index::sample(&mut rng, n_rows, config.n_train + config.n_test).into_vec();
    picked.shuffle(&mut rng);
    let test = picked.split_off(config.n_train);
    (picked, test)
}

pub fn monte_carlo_split(
    dataset: &Dataset,
    config: &SplitConfig,
    repeat: usize,
) -> Result<SplitPair> {
    config.validate(dataset.len())?;
    let (train, test) = monte_carlo_indices(dataset.len(), config);
    Ok(SplitPair::new(config, repeat, train, test))
}

/// Training rows are drawn exactly as for Monte Carlo with the same seed; the
/// test set is then grown greedily from every remaining row, each step adding
/// the row most dissimilar to the test rows chosen so far. Distances are
/// Euclidean on predictors standardized with training statistics.
pub fn dissimilarity_split(
    dataset: &Dataset,
    config: &SplitConfig,
    repeat: usize,
) -> Result<SplitPair> {
    config.validate(dataset.len())?;
    let (mut train, _) = monte_carlo_indices(dataset.len(), config);
    train.sort_unstable();
    let mut in_train = vec![false; dataset.len()];
    for &i in &train {
        in_train[i] = true;
    }
    let pool: Vec<usize> = (0..dataset.len()).filter(|&i| !in_train[i]).collect();

    let train_x = dataset.predictors_of(&train);
    let params = StandardizationParams::fit(&train_x)?;
    let train_z = params.apply(&train_x)?;
    let pool_z = params.apply(&dataset.predictors_of(&pool))?;

    let order = greedy_dissimilar(
        &pool_z,
        &train_z,
        config.n_test,
        config.aggregation,
        config.dissim_seed_size,
    )?;
    let test = order.into_iter().map(|p| pool[p]).collect();
    Ok(SplitPair::new(config, repeat, train, test))
}

fn aggregate(sum: f64, min: f64, count: usize, how: Aggregation) -> f64 {
    match how {
        Aggregation::MeanDistance => sum / count as f64,
        Aggregation::MinDistance => min,
    }
}

/// Index of the largest score among unselected candidates, lowest index on ties.
fn argmax_unselected(scores: &[f64], selected: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if selected[i] {
            continue;
        }
        match best {
            Some(b) if s <= scores[b] => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Greedy maximum-dissimilarity selection.
///
/// Returns `n_select` row positions of `candidates` in selection order. The
/// first `seed_size` rows are those with the largest aggregate distance to
/// `reference`; every later row maximizes its aggregate distance to the rows
/// already selected.
pub fn greedy_dissimilar(
    candidates: &Matrix,
    reference: &Matrix,
    n_select: usize,
    how: Aggregation,
    seed_size: usize,
) -> Result<Vec<usize>> {
    let n = candidates.n_rows();
    if n_select > n {
        return Err(Error::Config(format!(
            "cannot select {n_select} rows from {n} candidates"
        )));
    }
    if reference.n_rows() == 0 {
        return Err(Error::Config("empty reference set".into()));
    }
    if candidates.n_cols() != reference.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: reference.n_cols(),
            found: candidates.n_cols(),
        });
    }
    let mut selected = vec![false; n];
    let mut order = Vec::with_capacity(n_select);
    if n_select == 0 {
        return Ok(order);
    }

    let to_reference: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = candidates.row(i);
            let mut sum = 0.0;
            let mut min = f64::INFINITY;
            for r in reference.rows() {
                let d = euclidean(row, r);
                sum += d;
                min = min.min(d);
            }
            aggregate(sum, min, reference.n_rows(), how)
        })
        .collect();

    for _ in 0..seed_size.min(n_select) {
        let i = argmax_unselected(&to_reference, &selected).expect("candidates remain");
        selected[i] = true;
        order.push(i);
    }

    let mut sums = vec![0.0; n];
    let mut mins = vec![f64::INFINITY; n];
    let absorb = |sums: &mut [f64], mins: &mut [f64], new: usize| {
        let new_row = candidates.row(new);
        sums.par_iter_mut()
            .zip(mins.par_iter_mut())
            .enumerate()
            .for_each(|(i, (s, m))| {
                let d = euclidean(candidates.row(i), new_row);
                *s += d;
                *m = m.min(d);
            });
    };
    for &i in &order {
        absorb(&mut sums, &mut mins, i);
    }
    let mut scores = vec![0.0; n];
    while order.len() < n_select {
        let count = order.len();
        for i in 0..n {
            scores[i] = aggregate(sums[i], mins[i], count, how);
        }
        let next = argmax_unselected(&scores, &selected).expect("candidates remain");
        selected[next] = true;
        order.push(next);
        absorb(&mut sums, &mut mins, next);
    }
    Ok(order)
}

/// Rows are partitioned by capture id: no capture contributes to both sides.
pub fn informed_split(dataset: &Dataset, config: &SplitConfig, repeat: usize) -> Result<SplitPair> {
    config.validate(dataset.len())?;
    if let Some(i) = dataset.first_missing_group() {
        return Err(Error::Partition(format!(
            "informed split requires a capture id on every row; data row {} has none",
            i + 1
        )));
    }
    let names: Vec<String> = dataset.groups().into_iter().map(str::to_owned).collect();
    let group_of: Vec<usize> = dataset
        .rows()
        .iter()
        .map(|r| names.binary_search(&r.group).expect("group listed"))
        .collect();
    let mut rng = split_rng(config);
    let (train, test) = group_split(&group_of, &names, config, &mut rng)?;
    Ok(SplitPair::new(config, repeat, train, test))
}

/// K-means cluster of every row, on predictors standardized with the
/// dataset's own column statistics. These are the groups of the clustering split.
pub fn cluster_labels(dataset: &Dataset, config: &SplitConfig) -> Result<Vec<usize>> {
    if dataset.len() < config.n_clusters {
        return Err(Error::Config(format!(
            "{} clusters requested for {} rows",
            config.n_clusters,
            dataset.len()
        )));
    }
    let z = dataset.column_stats().apply(&dataset.predictors())?;
    Ok(kmeans_fit(
        &z,
        config.n_clusters,
        derive_seed(config.seed, stream::KMEANS),
    )?
    .labels)
}

/// Group split on k-means cluster labels of the standardized predictors.
/// Capture ids are ignored.
pub fn clustering_split(
    dataset: &Dataset,
    config: &SplitConfig,
    repeat: usize,
) -> Result<SplitPair> {
    config.validate(dataset.len())?;
    let labels = cluster_labels(dataset, config)?;
    let names: Vec<String> = (0..config.n_clusters)
        .map(|c| format!("cluster-{c}"))
        .collect();
    let mut rng = split_rng(config);
    let (train, test) = group_split(&labels, &names, config, &mut rng)?;
    Ok(SplitPair::new(config, repeat, train, test))
}

/// Shuffles the groups, takes test groups in shuffled order until they hold at
/// least `n_test` rows and leaves the rest for training. When that leaves fewer
/// than `n_train` training rows, the accumulation restarts at each later
/// position of the shuffled order in turn.
fn group_split(
    group_of: &[usize],
    names: &[String],
    config: &SplitConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let n_groups = names.len();
    let n_rows = group_of.len();
    let mut sizes = vec![0usize; n_groups];
    for &g in group_of {
        sizes[g] += 1;
    }
    let present = sizes.iter().filter(|&&s| s > 0).count();
    if present < 2 {
        return Err(Error::Partition(format!(
            "group split needs at least 2 distinct groups, found {present}"
        )));
    }

    let mut order: Vec<usize> = (0..n_groups).filter(|&g| sizes[g] > 0).collect();
    order.shuffle(rng);

    let mut chosen: Option<Vec<bool>> = None;
    for offset in 0..order.len() {
        let mut is_test = vec![false; n_groups];
        let mut test_rows = 0;
        let mut taken = 0;
        for &g in order.iter().cycle().skip(offset).take(order.len() - 1) {
            if test_rows >= config.n_test {
                break;
            }
            is_test[g] = true;
            test_rows += sizes[g];
            taken += 1;
        }
        if test_rows >= config.n_test && taken < order.len() && n_rows - test_rows >= config.n_train
        {
            chosen = Some(is_test);
            break;
        }
    }
    let Some(is_test) = chosen else {
        let listing: Vec<String> = order
            .iter()
            .map(|&g| format!("{}={}", names[g], sizes[g]))
            .collect();
        return Err(Error::Partition(format!(
            "no group partition leaves {} test rows and {} training rows (group sizes: {})",
            config.n_test,
            config.n_train,
            listing.join(", ")
        )));
    };

    let (test_pool, train_pool): (Vec<usize>, Vec<usize>) =
        (0..n_rows).partition(|&i| is_test[group_of[i]]);
    let test = sample_from(&test_pool, config.n_test, rng);
    let train = sample_from(&train_pool, config.n_train, rng);
    Ok((train, test))
}

fn sample_from<R: Rng>(pool: &[usize], k: usize, rng: &mut R) -> Vec<usize> {
    index::sample(rng, pool.len(), k)
        .into_iter()
        .map(|p| pool[p])
        .collect()
}
