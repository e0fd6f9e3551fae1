//! Fixtures shared by the criterion benchmarks in `benches/`.

use splitlab::{
    downsample, generate_synthetic, split, Dataset, Matrix, SplitConfig, Strategy, SynthConfig,
};

pub fn corpus() -> Dataset {
    generate_synthetic(&SynthConfig::default_layout(), 7).expect("built-in layout is valid")
}

/// Downsampled training rows of a Monte Carlo split, as fed to the learners.
pub fn learner_input(ds: &Dataset, seed: u64) -> (Matrix, Vec<bool>) {
    let config = SplitConfig {
        seed,
        strategy: Strategy::MonteCarlo,
        ..Default::default()
    };
    let pair = split(ds, &config, 0).expect("default sizes fit the corpus");
    let labels = ds.labels_of(&pair.train_indices);
    let keep = downsample(&labels, seed).expect("both classes present");
    let rows: Vec<usize> = keep.iter().map(|&i| pair.train_indices[i]).collect();
    let y = keep.iter().map(|&i| labels[i].is_positive()).collect();
    (ds.predictors_of(&rows), y)
}

/// Full train and test predictors of a Monte Carlo split.
pub fn diagnostic_input(ds: &Dataset, seed: u64) -> (Matrix, Matrix) {
    let config = SplitConfig {
        seed,
        ..Default::default()
    };
    let pair = split(ds, &config, 0).expect("default sizes fit the corpus");
    (
        ds.predictors_of(&pair.train_indices),
        ds.predictors_of(&pair.test_indices),
    )
}
