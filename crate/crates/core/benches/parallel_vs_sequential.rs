use std::hint::black_box;

use caratheodory::experiment::run_convergence_with;
use caratheodory::instances::exact_k_hull_distance_with;
use caratheodory::maurey::maurey_sample_with;
use caratheodory::{random_instance, Execution, ExperimentConfig, SpaceSpec, DEFAULT_CONSTANT};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn maurey(c: &mut Criterion) {
    let space = SpaceSpec::new(1.5, 16).unwrap();
    let (set, target) = random_instance(16, 200, 1, &space).unwrap();
    let ks = [1, 4, 16, 64, 256];
    let mut group = c.benchmark_group("maurey_sample");
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| maurey_sample_with(&set, &target, &space, black_box(&ks), 200, 9, exec).unwrap())
        });
    }
    group.finish();
}

fn convergence(c: &mut Criterion) {
    let config = ExperimentConfig {
        p_grid: vec![1.25, 2.0, 4.0],
        dims: vec![4, 16],
        n_points: vec![20, 100],
        k_max: 256,
        trials: 20,
        seed: 3,
        constant_c: DEFAULT_CONSTANT,
    };
    let mut group = c.benchmark_group("run_convergence");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_convergence_with(black_box(&config), exec).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let space = SpaceSpec::new(2.0, 3).unwrap();
    let (set, target) = random_instance(3, 10, 5, &space).unwrap();
    let mut group = c.benchmark_group("exact_k_hull_distance");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exact_k_hull_distance_with(&set, black_box(&target.a), &space, 3, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, maurey, convergence, oracle);
criterion_main!(benches);
