//! Train/test splitting strategies for datasets with low representativeness,
//! a permutation-based train/test similarity diagnostic, tree-ensemble
//! baselines and an experiment harness comparing them.

pub mod data;
pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod learners;
pub mod matrix;
pub mod metrics;
pub mod rng;
pub mod split;
pub mod synth;

pub use data::{
    parse_dataset, standardize, ClassLabel, Dataset, FeatureVector, IngestOptions, Row,
    StandardizationParams, CSV_HEADER, N_PREDICTORS, PREDICTOR_NAMES,
};
pub use diagnostics::{pca_fit, pca_project, similarity_diagnostic, PcaModel, SimilarityReport};
pub use error::{Error, Result};
pub use harness::{run_experiment, summarize, ExperimentConfig, ExperimentReport, ReportRow};
pub use learners::{
    downsample, forest_fit, gbt_fit, ForestModel, ForestParams, GbtModel, GbtParams, Learner, Model,
};
pub use matrix::Matrix;
pub use metrics::{compute_metrics, confusion, ConfusionMatrix, MetricsRecord};
pub use split::{
    cluster_labels, clustering_split, dissimilarity_split, informed_split, kmeans_fit,
    monte_carlo_split, split, Aggregation, SplitConfig, SplitPair, Strategy,
};
pub use synth::{generate_synthetic, SynthConfig};
