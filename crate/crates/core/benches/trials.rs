use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use uasn_cfl::experiments::{run_trials_with, AnchorSpec, Execution, ExperimentConfig};
use uasn_cfl::localization::{localize, LocalizationConfig};
use uasn_cfl::netsim::{canonical_fixture, observe, NoiseModel};
use uasn_cfl::rng::rng_from_seed;

fn trial_config() -> ExperimentConfig {
    // Dense enough that most mobiles localize, so the bench measures the estimator.
    ExperimentConfig {
        trials: 16,
        mobile_count: 20,
        anchors: AnchorSpec::Count(400),
        ..Default::default()
    }
}

pub fn bench_trials(c: &mut Criterion) {
    let config = trial_config();
    let mut group = c.benchmark_group("run_trials");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| run_trials_with(black_box(&config), Execution::Sequential).unwrap())
    });
    group.bench_function("parallel", |b| {
        b.iter(|| run_trials_with(black_box(&config), Execution::Parallel).unwrap())
    });
    group.finish();
}

pub fn bench_localize(c: &mut Criterion) {
    let fixture = canonical_fixture();
    let mobile = fixture.mobiles[0].position;
    let input = observe(&fixture, &mobile, &NoiseModel::NONE, &mut rng_from_seed(0)).unwrap();
    for m in [100, 400, 2000] {
        let cfg = LocalizationConfig {
            sample_count: m,
            ..Default::default()
        };
        c.bench_function(&format!("localize; fixture; samples: {m}"), |b| {
            let mut rng = rng_from_seed(1);
            b.iter(|| localize(black_box(&input), &cfg, &mut rng).unwrap())
        });
    }
}

criterion_group!(benches, bench_trials, bench_localize);
criterion_main!(benches);
