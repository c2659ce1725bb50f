use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use qscramble::measure::{
    mle_estimate, monte_carlo_covariance, optimal_povm, outcome_probabilities, sample_outcomes,
    sequential_experiment,
};
use qscramble::state::encode;
use qscramble::{EncodingConfig, McExperiment, WeightMatrix};

fn estimation(c: &mut Criterion) {
    let cfg = EncodingConfig::optimal();
    let povm = optimal_povm(&cfg, &WeightMatrix::identity()).unwrap();
    let probs = outcome_probabilities(&encode(&cfg).unwrap(), &povm);
    let mut seed = 0;

    c.bench_function("sample_100k", |b| {
        b.iter(|| sample_outcomes(black_box(&probs), 100_000, 3))
    });
    c.bench_function("mle_refined", |b| {
        b.iter_batched(
            || {
                seed += 1;
                sample_outcomes(&probs, 100_000, seed).unwrap()
            },
            |counts| mle_estimate(&cfg, &povm, &counts),
            BatchSize::SmallInput,
        )
    });
}

fn experiments(c: &mut Criterion) {
    let cfg = EncodingConfig::optimal();
    let povm = optimal_povm(&cfg, &WeightMatrix::identity()).unwrap();
    let exp = McExperiment::new(cfg, povm, 10_000, 50, 1).unwrap();
    let mut group = c.benchmark_group("experiment");
    group.sample_size(10);
    group.bench_function("monte_carlo_r50", |b| b.iter(|| monte_carlo_covariance(&exp)));
    group.bench_function("sequential_r50", |b| {
        b.iter(|| sequential_experiment(&cfg, 10_000, 0.5, 50, 1))
    });
    group.finish();
}

criterion_group!(benches, estimation, experiments);
criterion_main!(benches);
