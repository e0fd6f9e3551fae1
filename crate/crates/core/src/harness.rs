//! Repeated split / train / evaluate experiment and its flat-file reports.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::diagnostics::{similarity_diagnostic, SimilarityReport};
use crate::error::{Error, Result};
use crate::learners::{downsample, Learner};
use crate::metrics::{compute_metrics, confusion, MetricsRecord};
use crate::split::{split, Aggregation, SplitConfig, SplitPair, Strategy};

pub const REPORT_CSV_HEADER: &str =
    "strategy,learner,repeat,seed,sensitivity,specificity,balanced_accuracy,f1,similarity_fraction,status";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub n_train: usize,
    pub n_test: usize,
    pub repeats: usize,
    /// Repeat `i` uses seed `seed + i` (wrapping).
    pub seed: u64,
    pub strategies: Vec<Strategy>,
    pub learners: Vec<Learner>,
    pub n_clusters: usize,
    pub aggregation: Aggregation,
    pub dissim_seed_size: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_train: 2000,
            n_test: 1000,
            repeats: 25,
            seed: 0,
            strategies: Strategy::ALL.to_vec(),
            learners: Learner::ALL.to_vec(),
            n_clusters: 10,
            aggregation: Aggregation::MeanDistance,
            dissim_seed_size: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn repeat_seed(&self, repeat: usize) -> u64 {
        self.seed.wrapping_add(repeat as u64)
    }

    pub fn split_config(&self, strategy: Strategy, repeat: usize) -> SplitConfig {
        SplitConfig {
            n_train: self.n_train,
            n_test: self.n_test,
            seed: self.repeat_seed(repeat),
            strategy,
            aggregation: self.aggregation,
            n_clusters: self.n_clusters,
            dissim_seed_size: self.dissim_seed_size,
        }
    }

    /// Checks everything that would make every cell of the run fail.
    pub fn check_preconditions(&self, dataset: &Dataset) -> Result<()> {
        if self.repeats < 1 {
            return Err(Error::Config("repeats must be >= 1".into()));
        }
        if self.strategies.is_empty() || self.learners.is_empty() {
            return Err(Error::Config(
                "at least one strategy and one learner are required".into(),
            ));
        }
        self.split_config(self.strategies[0], 0)
            .validate(dataset.len())?;
        if !dataset.has_both_classes() {
            return Err(Error::Degenerate(
                "the dataset must contain both Botnet and Normal rows".into(),
            ));
        }
        if self.strategies.contains(&Strategy::Informed) {
            if let Some(i) = dataset.first_missing_group() {
                return Err(Error::Partition(format!(
                    "informed split requires a capture id on every row; data row {} has none",
                    i + 1
                )));
            }
            if dataset.groups().len() < 2 {
                return Err(Error::Partition(
                    "informed split requires at least 2 distinct capture ids".into(),
                ));
            }
        }
        if self.strategies.contains(&Strategy::Clustering) && dataset.len() < self.n_clusters {
            return Err(Error::Config(format!(
                "{} clusters requested for {} rows",
                self.n_clusters,
                dataset.len()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub strategy: Strategy,
    pub learner: Learner,
    pub repeat: usize,
    pub seed: u64,
    pub metrics: MetricsRecord,
    pub similarity_fraction: Option<f64>,
    /// `ok`, or `failed: <stage>: <reason>`.
    pub status: String,
}

impl ReportRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub median: f64,
    pub iqr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub strategy: Strategy,
    pub learner: Learner,
    /// Per-metric median and interquartile range over defined values.
    pub metrics: BTreeMap<String, Stat>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategySimilarity {
    pub strategy: Strategy,
    pub report: SimilarityReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
    pub similarity: Vec<StrategySimilarity>,
    pub summary: Vec<CellSummary>,
}

impl ExperimentReport {
    pub fn cell(&self, strategy: Strategy, learner: Learner) -> Option<&CellSummary> {
        self.summary
            .iter()
            .find(|c| c.strategy == strategy && c.learner == learner)
    }

    pub fn stat(&self, strategy: Strategy, learner: Learner, metric: &str) -> Option<Stat> {
        self.cell(strategy, learner)?.metrics.get(metric).copied()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{REPORT_CSV_HEADER}")?;
        let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                r.strategy,
                r.learner,
                r.repeat,
                r.seed,
                fmt(r.metrics.sensitivity),
                fmt(r.metrics.specificity),
                fmt(r.metrics.balanced_accuracy),
                fmt(r.metrics.f1),
                fmt(r.similarity_fraction),
                r.status.replace([',', '\n'], ";"),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `report.csv`, `report.json` and `summary.json` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut csv = Vec::new();
        self.write_csv(&mut csv)?;
        fs::write(dir.join("report.csv"), csv)?;
        fs::write(
            dir.join("report.json"),
            serde_json::to_string_pretty(self)? + "\n",
        )?;
        fs::write(
            dir.join("summary.json"),
            serde_json::to_string_pretty(&self.summary)? + "\n",
        )?;
        Ok(())
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Median and interquartile range; `None` for an empty slice.
pub fn median_iqr(values: &[f64]) -> Option<Stat> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(Stat {
        median: quantile_sorted(&v, 0.5),
        iqr: quantile_sorted(&v, 0.75) - quantile_sorted(&v, 0.25),
    })
}

pub const SUMMARY_METRICS: [&str; 5] = [
    "sensitivity",
    "specificity",
    "balanced_accuracy",
    "f1",
    "similarity_fraction",
];

fn metric_value(row: &ReportRow, metric: &str) -> Option<f64> {
    match metric {
        "sensitivity" => row.metrics.sensitivity,
        "specificity" => row.metrics.specificity,
        "balanced_accuracy" => row.metrics.balanced_accuracy,
        "f1" => row.metrics.f1,
        "similarity_fraction" => row.similarity_fraction,
        _ => None,
    }
}

/// Per-(strategy, learner) medians and IQRs, in first-appearance order of the
/// rows. Metrics with no defined value in a cell are left out with a warning.
pub fn summarize(rows: &[ReportRow]) -> Vec<CellSummary> {
    let mut keys: Vec<(Strategy, Learner)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.strategy, r.learner)) {
            keys.push((r.strategy, r.learner));
        }
    }
    keys.into_iter()
        .map(|(strategy, learner)| {
            let cell: Vec<&ReportRow> = rows
                .iter()
                .filter(|r| r.strategy == strategy && r.learner == learner)
                .collect();
            let mut metrics = BTreeMap::new();
            for m in SUMMARY_METRICS {
                let values: Vec<f64> = cell.iter().filter_map(|r| metric_value(r, m)).collect();
                match median_iqr(&values) {
                    Some(s) => {
                        metrics.insert(m.to_string(), s);
                    }
                    None => {
                        warn!("{strategy}/{learner}: no defined {m} values, omitted from summary")
                    }
                }
            }
            CellSummary {
                strategy,
                learner,
                metrics,
            }
        })
        .collect()
}

fn failed(stage: &str, e: &Error) -> String {
    format!("failed: {stage}: {e}")
}

fn run_cell(
    dataset: &Dataset,
    config: &ExperimentConfig,
    strategy: Strategy,
    repeat: usize,
) -> Vec<ReportRow> {
    let seed = config.repeat_seed(repeat);
    let row = |learner, metrics, similarity_fraction, status: String| ReportRow {
        strategy,
        learner,
        repeat,
        seed,
        metrics,
        similarity_fraction,
        status,
    };
    let all_failed = |status: String| -> Vec<ReportRow> {
        config
            .learners
            .iter()
            .map(|&l| row(l, MetricsRecord::default(), None, status.clone()))
            .collect()
    };

    let pair: SplitPair = match split(dataset, &config.split_config(strategy, repeat), repeat) {
        Ok(p) => p,
        Err(e) => return all_failed(failed("split", &e)),
    };
    let train_x = dataset.predictors_of(&pair.train_indices);
    let test_x = dataset.predictors_of(&pair.test_indices);
    let train_y = dataset.labels_of(&pair.train_indices);
    let test_y = dataset.labels_of(&pair.test_indices);

    let (similarity, diag_status) = match similarity_diagnostic(&train_x, &test_x, seed) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(failed("diagnostic", &e))),
    };

    let balanced = match downsample(&train_y, seed) {
        Ok(b) => b,
        Err(e) => {
            return config
                .learners
                .iter()
                .map(|&l| {
                    row(
                        l,
                        MetricsRecord::default(),
                        similarity,
                        failed("downsample", &e),
                    )
                })
                .collect()
        }
    };
    let fit_x = train_x.select_rows(&balanced);
    let fit_y: Vec<bool> = balanced.iter().map(|&i| train_y[i].is_positive()).collect();

    config
        .learners
        .iter()
        .map(|&learner| {
            let evaluated = learner
                .fit(&fit_x, &fit_y, seed)
                .and_then(|m| m.predict(&test_x))
                .and_then(|pred| confusion(&test_y, &pred));
            match evaluated {
                Ok(cm) => row(
                    learner,
                    compute_metrics(&cm),
                    similarity,
                    diag_status.clone().unwrap_or_else(|| "ok".into()),
                ),
                Err(e) => row(
                    learner,
                    MetricsRecord::default(),
                    similarity,
                    failed("learner", &e),
                ),
            }
        })
        .collect()
}

/// Runs every (strategy, repeat) cell, in parallel, and assembles the report
/// ordered by strategy, learner, then repeat. Cell failures become rows with a
/// `failed: ...` status.
pub fn run_experiment(dataset: &Dataset, config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.check_preconditions(dataset)?;
    let cells: Vec<(usize, Strategy, usize)> = config
        .strategies
        .iter()
        .enumerate()
        .flat_map(|(si, &s)| (0..config.repeats).map(move |r| (si, s, r)))
        .collect();
    let results: Vec<Vec<ReportRow>> = cells
        .par_iter()
        .map(|&(_, s, r)| run_cell(dataset, config, s, r))
        .collect();

    let mut rows: Vec<ReportRow> = results.into_iter().flatten().collect();
    let strategy_pos = |s: Strategy| config.strategies.iter().position(|&x| x == s);
    let learner_pos = |l: Learner| config.learners.iter().position(|&x| x == l);
    rows.sort_by_key(|r| (strategy_pos(r.strategy), learner_pos(r.learner), r.repeat));

    for r in rows.iter().filter(|r| !r.is_ok()) {
        warn!(
            "{} repeat {} ({}): {}",
            r.strategy, r.repeat, r.learner, r.status
        );
    }

    let mut similarity = Vec::new();
    for &s in &config.strategies {
        let Some(first) = config.learners.first() else {
            continue;
        };
        let fractions: Vec<f64> = rows
            .iter()
            .filter(|r| r.strategy == s && r.learner == *first)
            .filter_map(|r| r.similarity_fraction)
            .collect();
        if let Ok(report) = SimilarityReport::from_fractions(fractions) {
            similarity.push(StrategySimilarity {
                strategy: s,
                report,
            });
        }
    }

    let summary = summarize(&rows);
    Ok(ExperimentReport {
        config: config.clone(),
        rows,
        similarity,
        summary,
    })
}
