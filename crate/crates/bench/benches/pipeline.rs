//! Benchmarks for the hot paths: SGD training, the inner regression
//! solvers, implicit labeling, and a full evaluation pass.

use criterion::{criterion_group, criterion_main, Criterion};

use newsrec_bench::{click_corpus, rating_corpus, regression_problem, RATING_SCALE};
use newsrec_core::corpus::{sessionize, time_based_split};
use newsrec_core::diversity_glm::{elastic_net_cd, irls_lp};
use newsrec_core::metrics::{evaluate_run, EvalOptions};
use newsrec_core::sampling::build_implicit_training;
use newsrec_core::temporal_mf::{train_decay, train_sgd, MfConfig, TrainExample};

fn bench_sgd_training(c: &mut Criterion) {
    let dataset = rating_corpus();
    let examples = TrainExample::from_ratings(&dataset.interactions);
    let config = MfConfig {
        n_factors: 16,
        epochs: 5,
        rating_bounds: Some(RATING_SCALE),
        ..MfConfig::default()
    };
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    group.bench_function("sgd_20k_interactions_5_epochs", |b| {
        b.iter(|| train_sgd(&config, &examples, &dataset.catalog).unwrap())
    });
    group.finish();
}

fn bench_regression_solvers(c: &mut Criterion) {
    let (x, y) = regression_problem(500, 50);
    let mut group = c.benchmark_group("solvers");
    group.bench_function("elastic_net_cd_500x50", |b| {
        b.iter(|| elastic_net_cd(&x, &y, 0.1, 0.5, 1e-8, 500).unwrap())
    });
    group.bench_function("irls_lp_500x50", |b| {
        b.iter(|| irls_lp(&x, &y, 1.5, 0.1, 1e-6, 25).unwrap())
    });
    group.finish();
}

fn bench_implicit_sampling(c: &mut Criterion) {
    let dataset = click_corpus();
    let split = time_based_split(&dataset.interactions, 0.8).unwrap();
    let sessions = sessionize(&split.train, 1800);
    let mut group = c.benchmark_group("sampling");
    group.bench_function("implicit_labeling_4_negatives", |b| {
        b.iter(|| build_implicit_training(&sessions, &split.train, 4, 0, true))
    });
    group.finish();
}

fn bench_evaluation(c: &mut Criterion) {
    let dataset = rating_corpus();
    let split = time_based_split(&dataset.interactions, 0.8).unwrap();
    let model = train_decay(&split.train, split.split_timestamp, 86_400.0 * 7.0).unwrap();
    let opts = EvalOptions {
        rec_timestamp: split.split_timestamp,
        ..EvalOptions::default()
    };
    let mut group = c.benchmark_group("metrics");
    group.sample_size(20);
    group.bench_function("evaluate_200_users_500_items", |b| {
        b.iter(|| {
            evaluate_run(&model, &dataset.catalog, &split.train, &split.test, &opts, None)
                .unwrap()
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_sgd_training,
    bench_regression_solvers,
    bench_implicit_sampling,
    bench_evaluation
);
criterion_main!(benches);
