mod common;

use std::collections::BTreeSet;

use splitlab::{cluster_labels, split, Dataset, SplitConfig, SplitPair, Strategy};

fn config(strategy: Strategy, seed: u64) -> SplitConfig {
    SplitConfig {
        strategy,
        seed,
        ..Default::default()
    }
}

fn groups_of(idx: &[usize], key: &dyn Fn(usize) -> String) -> BTreeSet<String> {
    idx.iter().map(|&i| key(i)).collect()
}

fn assert_valid(ds: &Dataset, pair: &SplitPair) {
    assert_eq!(pair.train_indices.len(), 2000);
    assert_eq!(pair.test_indices.len(), 1000);
    pair.check(ds.len()).unwrap();
    let train: BTreeSet<_> = pair.train_indices.iter().collect();
    assert!(pair.test_indices.iter().all(|i| !train.contains(i)));
}

#[test]
fn every_strategy_on_the_synthetic_corpus() {
    let ds = common::synthetic();
    for strategy in Strategy::ALL {
        for seed in 0..3 {
            let cfg = config(strategy, seed);
            let pair = split(&ds, &cfg, seed as usize).unwrap();
            assert_valid(&ds, &pair);
            assert_eq!(
                pair,
                split(&ds, &cfg, seed as usize).unwrap(),
                "{strategy} not deterministic"
            );

            let key: Box<dyn Fn(usize) -> String> = match strategy {
                Strategy::Informed => Box::new(|i| ds.rows()[i].group.clone()),
                Strategy::Clustering => {
                    let labels = cluster_labels(&ds, &cfg).unwrap();
                    Box::new(move |i| labels[i].to_string())
                }
                _ => continue,
            };
            let a = groups_of(&pair.train_indices, &key);
            let b = groups_of(&pair.test_indices, &key);
            assert!(
                a.is_disjoint(&b),
                "{strategy} seed {seed}: groups {:?}",
                a.intersection(&b)
            );
        }
    }
}

#[test]
fn seeds_change_the_split() {
    let ds = common::synthetic();
    for strategy in [
        Strategy::MonteCarlo,
        Strategy::Dissimilarity,
        Strategy::Informed,
    ] {
        let a = split(&ds, &config(strategy, 1), 0).unwrap();
        let b = split(&ds, &config(strategy, 2), 0).unwrap();
        assert_ne!(a.test_indices, b.test_indices, "{strategy}");
    }
}

#[test]
fn dissimilar_test_rows_sit_further_from_train() {
    let ds = common::synthetic();
    let mean_dist = |pair: &SplitPair| {
        let train = ds.predictors_of(&pair.train_indices);
        let centre: Vec<f64> = (0..train.n_cols())
            .map(|j| train.column(j).iter().sum::<f64>() / train.n_rows() as f64)
            .collect();
        let test = ds.predictors_of(&pair.test_indices);
        test.rows()
            .map(|r| common::oracles::dist(r, &centre))
            .sum::<f64>()
            / test.n_rows() as f64
    };
    let mc = split(&ds, &config(Strategy::MonteCarlo, 4), 0).unwrap();
    let dis = split(&ds, &config(Strategy::Dissimilarity, 4), 0).unwrap();
    assert_eq!(mc.train_indices, dis.train_indices);
    assert!(mean_dist(&dis) > mean_dist(&mc));
}

#[test]
fn split_pairs_survive_json() {
    let ds = common::synthetic();
    let pair = split(&ds, &config(Strategy::Informed, 9), 3).unwrap();
    let back = SplitPair::from_json(&pair.to_json().unwrap()).unwrap();
    assert_eq!(pair, back);
}

#[test]
fn oversized_requests_are_rejected() {
    let ds = common::synthetic();
    let cfg = SplitConfig {
        n_train: 20000,
        n_test: 1000,
        ..Default::default()
    };
    assert!(split(&ds, &cfg, 0).is_err());
}
