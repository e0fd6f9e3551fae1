//! Seeded generator for labelled flow datasets built from spherical Gaussian
//! mixtures, one mixture per capture.
//!
//! The default layout mirrors the shape of a botnet-detection corpus with
//! nineteen captures: normal traffic concentrated in a few overlapping
//! components shared by every capture, botnet traffic spread over many
//! components, several botnet captures confined to a single component.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{ClassLabel, Dataset, FeatureVector, Row, N_PREDICTORS};
use crate::error::{Error, Result};
use crate::rng::rng_for;

/// Gaussian draws are truncated at this many standard deviations per coordinate.
pub const TRUNCATION_SIGMAS: f64 = 4.0;

const GENERATOR_STREAM: u64 = 0x5359_4e54;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub label: ClassLabel,
    pub mean: [f64; N_PREDICTORS],
    pub std_dev: f64,
    /// Relative share of the capture's rows.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaptureSpec {
    pub name: String,
    /// Class the capture was recorded for; it may still contain rows of the other class.
    pub kind: ClassLabel,
    pub rows: usize,
    pub components: Vec<ComponentSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub captures: Vec<CaptureSpec>,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        for kind in [ClassLabel::Botnet, ClassLabel::Normal] {
            let n = self.captures.iter().filter(|c| c.kind == kind).count();
            if n < 2 {
                return Err(Error::Config(format!(
                    "at least 2 {kind} captures are required, got {n}"
                )));
            }
        }
        for c in &self.captures {
            if c.name.is_empty() || c.name.contains(',') {
                return Err(Error::Config(format!(
                    "capture name {:?} must be non-empty and comma-free",
                    c.name
                )));
            }
            if c.components.is_empty() {
                return Err(Error::Config(format!(
                    "capture {} has no mixture components",
                    c.name
                )));
            }
            if c.rows == 0 {
                return Err(Error::Config(format!("capture {} has no rows", c.name)));
            }
            for comp in &c.components {
                if !(comp.std_dev.is_finite() && comp.std_dev >= 0.0)
                    || !(comp.weight.is_finite() && comp.weight > 0.0)
                    || comp.mean.iter().any(|m| !m.is_finite())
                {
                    return Err(Error::Config(format!(
                        "capture {} has a component with invalid parameters",
                        c.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn total_rows(&self) -> usize {
        self.captures.iter().map(|c| c.rows).sum()
    }

    /// Nineteen captures (14 botnet, 5 normal), 20866 rows of which 19271 are
    /// Botnet and 1595 Normal.
    pub fn default_layout() -> Self {
        layout::default_layout()
    }
}

/// Splits `total` rows across components proportionally to their weights
/// (largest remainder, ties to the earlier component).
pub fn allocate_rows(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let ideal: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = ideal.iter().map(|x| x.floor() as usize).collect();
    let mut left = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = ideal[a] - ideal[a].floor();
        let rb = ideal[b] - ideal[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for i in order {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

/// Row count per component: capture rows are first split between the two
/// labels by total weight, then among each label's components.
fn component_counts(capture: &CaptureSpec) -> Vec<usize> {
    let comps = &capture.components;
    let labels = [ClassLabel::Botnet, ClassLabel::Normal];
    let label_weights: Vec<f64> = labels
        .iter()
        .map(|l| {
            comps
                .iter()
                .filter(|c| c.label == *l)
                .map(|c| c.weight)
                .sum()
        })
        .collect();
    let per_label = allocate_rows(capture.rows, &label_weights);
    let mut counts = vec![0; comps.len()];
    for (l, &n) in labels.iter().zip(&per_label) {
        let idx: Vec<usize> = (0..comps.len()).filter(|&i| comps[i].label == *l).collect();
        if idx.is_empty() {
            continue;
        }
        let w: Vec<f64> = idx.iter().map(|&i| comps[i].weight).collect();
        for (&i, c) in idx.iter().zip(allocate_rows(n, &w)) {
            counts[i] = c;
        }
    }
    counts
}

/// Draws a dataset from `config`. Pure function of `(config, seed)`.
pub fn generate_synthetic(config: &SynthConfig, seed: u64) -> Result<Dataset> {
    config.validate()?;
    let mut rng = rng_for(seed, GENERATOR_STREAM);
    let mut rows = Vec::with_capacity(config.total_rows());
    for capture in &config.captures {
        let counts = component_counts(capture);
        let mut block = Vec::with_capacity(capture.rows);
        for (comp, &n) in capture.components.iter().zip(&counts) {
            for _ in 0..n {
                let mut x = [0.0; N_PREDICTORS];
                for (v, mu) in x.iter_mut().zip(&comp.mean) {
                    let z = loop {
                        let z: f64 = rng.sample(StandardNormal);
                        if z.abs() <= TRUNCATION_SIGMAS {
                            break z;
                        }
                    };
                    *v = (mu + comp.std_dev * z).clamp(0.0, 1.0);
                }
                block.push(Row {
                    features: FeatureVector(x),
                    label: comp.label,
                    group: capture.name.clone(),
                });
            }
        }
        block.shuffle(&mut rng);
        rows.extend(block);
    }
    Dataset::new(rows)
}

mod layout {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const LAYOUT_SEED: u64 = 19;

    const TOTAL_NORMAL: usize = 1595;

    const NORMAL_CAPTURE_ROWS: [usize; 5] = [265, 232, 214, 190, 164];
    const BOTNET_CAPTURE_ROWS: [usize; 14] = [
        2650, 2310, 2080, 1905, 1760, 1590, 1420, 1310, 1120, 990, 860, 720, 610, 476,
    ];
    /// Botnet captures confined to a single component of their own.
    const NARROW_CAPTURES: [usize; 5] = [1, 4, 7, 10, 13];

    const N_CORES: usize = 10;
    const CORE_SD: f64 = 0.05;
    const NARROW_SD: f64 = 0.04;
    const NORMAL_SD: f64 = 0.05;
    /// Distance between a normal component and the botnet core it borders.
    const NORMAL_OFFSET: f64 = 0.16;
    const DIFFUSE_SD: f64 = 0.22;
    /// Share of rows drawn from the diffuse component, per class.
    const DIFFUSE_BOTNET: f64 = 0.02;
    const DIFFUSE_NORMAL: f64 = 0.15;

    fn point(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> [f64; N_PREDICTORS] {
        let mut p = [0.0; N_PREDICTORS];
        for v in p.iter_mut() {
            *v = rng.random_range(lo..hi);
        }
        p
    }

    fn offset(rng: &mut ChaCha8Rng, c: &[f64; N_PREDICTORS], dist: f64) -> [f64; N_PREDICTORS] {
        let dir: Vec<f64> = (0..N_PREDICTORS)
            .map(|_| rng.sample(StandardNormal))
            .collect();
        let norm = dir.iter().map(|d: &f64| d * d).sum::<f64>().sqrt();
        let mut p = *c;
        for (v, d) in p.iter_mut().zip(&dir) {
            *v = (*v + dist * d / norm).clamp(0.05, 0.95);
        }
        p
    }

    fn component(
        label: ClassLabel,
        mean: [f64; N_PREDICTORS],
        std_dev: f64,
        weight: f64,
    ) -> ComponentSpec {
        ComponentSpec {
            label,
            mean,
            std_dev,
            weight,
        }
    }

    pub(super) fn default_layout() -> SynthConfig {
        let mut rng = ChaCha8Rng::seed_from_u64(LAYOUT_SEED);
        let cores: Vec<_> = (0..N_CORES).map(|_| point(&mut rng, 0.15, 0.85)).collect();
        let private_means: Vec<_> = (0..BOTNET_CAPTURE_ROWS.len())
            .map(|_| point(&mut rng, 0.15, 0.85))
            .collect();
        let normal_means: Vec<_> = (0..NORMAL_CAPTURE_ROWS.len())
            .map(|i| offset(&mut rng, &cores[i], NORMAL_OFFSET))
            .collect();
        let centre = [0.5; N_PREDICTORS];

        let mut captures = Vec::new();
        for (i, &rows) in NORMAL_CAPTURE_ROWS.iter().enumerate() {
            let concentrated = (1.0 - DIFFUSE_NORMAL) / normal_means.len() as f64;
            let mut components: Vec<ComponentSpec> = normal_means
                .iter()
                .map(|m| component(ClassLabel::Normal, *m, NORMAL_SD, concentrated))
                .collect();
            components.push(component(
                ClassLabel::Normal,
                centre,
                DIFFUSE_SD,
                DIFFUSE_NORMAL,
            ));
            captures.push(CaptureSpec {
                name: format!("normal-{:02}", i + 1),
                kind: ClassLabel::Normal,
                rows,
                components,
            });
        }

        let normal_in_normal: usize = NORMAL_CAPTURE_ROWS.iter().sum();
        let background = TOTAL_NORMAL - normal_in_normal;
        let background_counts = allocate_rows(
            background,
            &BOTNET_CAPTURE_ROWS
                .iter()
                .map(|&r| r as f64)
                .collect::<Vec<_>>(),
        );

        for (i, &rows) in BOTNET_CAPTURE_ROWS.iter().enumerate() {
            let n_normal = background_counts[i] as f64;
            let n_botnet = rows as f64 - n_normal;
            let mut components = Vec::new();
            let home = if NARROW_CAPTURES.contains(&i) {
                components.push(component(
                    ClassLabel::Botnet,
                    private_means[i],
                    NARROW_SD,
                    n_botnet,
                ));
                i % normal_means.len()
            } else {
                let picks: Vec<usize> = (0..2).map(|k| (i + 3 * k) % N_CORES).collect();
                let share = n_botnet * (1.0 - DIFFUSE_BOTNET) / (picks.len() + 1) as f64;
                for &c in &picks {
                    components.push(component(ClassLabel::Botnet, cores[c], CORE_SD, share));
                }
                components.push(component(
                    ClassLabel::Botnet,
                    private_means[i],
                    CORE_SD,
                    share,
                ));
                components.push(component(
                    ClassLabel::Botnet,
                    centre,
                    DIFFUSE_SD,
                    n_botnet * DIFFUSE_BOTNET,
                ));
                picks
                    .iter()
                    .copied()
                    .find(|&c| c < normal_means.len())
                    .unwrap_or(i % normal_means.len())
            };
            // the capture's own benign traffic sits next to one of its cores
            components.push(component(
                ClassLabel::Normal,
                normal_means[home],
                NORMAL_SD,
                n_normal,
            ));
            captures.push(CaptureSpec {
                name: format!("botnet-{:02}", i + 1),
                kind: ClassLabel::Botnet,
                rows,
                components,
            });
        }
        SynthConfig { captures }
    }
}
