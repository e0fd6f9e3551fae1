use criterion::{criterion_group, criterion_main, Criterion};
use splitlab::{forest_fit, gbt_fit, similarity_diagnostic, ForestParams, GbtParams, Learner};
use splitlab_bench::{corpus, diagnostic_input, learner_input};

fn fitting(c: &mut Criterion) {
    let ds = corpus();
    let (x, y) = learner_input(&ds, 5);
    let mut group = c.benchmark_group("fit");
    group.sample_size(20);
    group.bench_function("random_forest", |b| {
        b.iter(|| forest_fit(&x, &y, &ForestParams::default()).unwrap())
    });
    group.bench_function("gradient_boosting", |b| {
        b.iter(|| gbt_fit(&x, &y, &GbtParams::default()).unwrap())
    });
    group.finish();

    let (_, test) = diagnostic_input(&ds, 5);
    let mut group = c.benchmark_group("predict_1000");
    for learner in Learner::ALL {
        let model = learner.fit(&x, &y, 1).unwrap();
        group.bench_function(learner.as_str(), |b| {
            b.iter(|| model.predict_proba(&test).unwrap())
        });
    }
    group.finish();
}

fn diagnostic(c: &mut Criterion) {
    let ds = corpus();
    let (train, test) = diagnostic_input(&ds, 5);
    let mut group = c.benchmark_group("similarity_diagnostic");
    group.sample_size(10);
    group.bench_function("2000_vs_1000", |b| {
        b.iter(|| similarity_diagnostic(&train, &test, 1).unwrap())
    });
    group.finish();
}

criterion_group!(benches, fitting, diagnostic);
criterion_main!(benches);
