use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use splitlab::split::greedy_dissimilar;
use splitlab::{kmeans_fit, split, Aggregation, SplitConfig, Strategy};
use splitlab_bench::corpus;

fn strategies(c: &mut Criterion) {
    let ds = corpus();
    let mut group = c.benchmark_group("split");
    group.sample_size(10);
    for strategy in Strategy::ALL {
        let config = SplitConfig {
            strategy,
            seed: 3,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(strategy), &config, |b, cfg| {
            b.iter(|| split(&ds, cfg, 0).unwrap())
        });
    }
    group.finish();
}

fn greedy(c: &mut Criterion) {
    let ds = corpus();
    let z = ds.column_stats().apply(&ds.predictors()).unwrap();
    let reference = z.select_rows(&(0..2000).collect::<Vec<_>>());
    let mut group = c.benchmark_group("greedy_dissimilar");
    group.sample_size(10);
    for n in [2000, 8000] {
        let cands = z.select_rows(&(2000..2000 + n).collect::<Vec<_>>());
        group.bench_with_input(BenchmarkId::new("select_500_of", n), &cands, |b, cands| {
            b.iter(|| {
                greedy_dissimilar(cands, &reference, 500, Aggregation::MeanDistance, 1).unwrap()
            })
        });
    }
    group.finish();
}

fn kmeans(c: &mut Criterion) {
    let ds = corpus();
    let z = ds.column_stats().apply(&ds.predictors()).unwrap();
    let mut group = c.benchmark_group("kmeans");
    group.sample_size(10);
    for k in [5, 10, 20] {
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, &k| {
            b.iter(|| kmeans_fit(&z, k, 1).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, strategies, greedy, kmeans);
criterion_main!(benches);
