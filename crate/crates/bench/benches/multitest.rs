use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ebf_bench::synthetic_batch;
use ebf_core::multitest::multi_ebf;
use ebf_core::sim::run_experiment;
use ebf_core::{Scenario, ScenarioSpec};

fn mixture(c: &mut Criterion) {
    let mut g = c.benchmark_group("multi_ebf");
    g.sample_size(10);
    for m in [10, 100, 1000] {
        let batch = synthetic_batch(m, 1.0, 1);
        g.bench_with_input(BenchmarkId::from_parameter(m), &batch, |b, batch| b.iter(|| multi_ebf(batch)));
    }
    g.finish();
}

fn simulation(c: &mut Criterion) {
    let mut spec = ScenarioSpec::desk(Scenario::Random, 20_240_601);
    spec.replicates = 200;
    let mut g = c.benchmark_group("simulation");
    g.sample_size(10);
    g.bench_function("scenario 2, 200 replicates, m = 1..10", |b| b.iter(|| run_experiment(&spec)));
    g.finish();
}

criterion_group!(benches, mixture, simulation);
criterion_main!(benches);
