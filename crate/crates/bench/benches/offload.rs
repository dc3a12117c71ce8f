use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use d2d_offload::cost::optimal_timer;
use d2d_offload::instance::generate;
use d2d_offload::montecarlo::simulate_pair;
use d2d_offload::solvers::{evaluate_all_pairs, lagrangian_solve};
use d2d_offload::{CompletionCostFn, ContactPair, GeneratorConfig, SolverParams, TaskSpec};

fn task(deadline: u32) -> TaskSpec {
    TaskSpec {
        processing_energy: 1.0,
        bs_comm_energy: 0.5,
        deadline,
        helper_proc_cost: 1.0,
        server_proc_cost: 10.0,
        bs_comm_cost: 5.0,
        server_comm_cost: 50.0,
    }
}

fn timer(c: &mut Criterion) {
    let pair = ContactPair::new(0.7, 1.0).unwrap();
    let f = CompletionCostFn::quadratic(0.004);
    let mut group = c.benchmark_group("optimal_timer");
    for d in [6u32, 12, 24, 96] {
        let spec = task(d);
        group.bench_with_input(BenchmarkId::from_parameter(d), &spec, |b, spec| {
            b.iter(|| optimal_timer(&pair, black_box(spec), &f).unwrap())
        });
    }
    group.finish();
}

fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("solver");
    for helpers in [3usize, 7] {
        let inst = generate(&GeneratorConfig {
            helpers,
            ..GeneratorConfig::default()
        })
        .unwrap();
        group.bench_with_input(
            BenchmarkId::new("evaluate_all_pairs", helpers),
            &inst,
            |b, inst| b.iter(|| evaluate_all_pairs(black_box(inst)).unwrap()),
        );
        let table = evaluate_all_pairs(&inst).unwrap();
        let params = SolverParams::default();
        group.bench_with_input(
            BenchmarkId::new("lagrangian_solve", helpers),
            &table,
            |b, table| b.iter(|| lagrangian_solve(black_box(table), &params).unwrap()),
        );
    }
    group.finish();
}

fn simulation(c: &mut Criterion) {
    let pair = ContactPair::new(0.5, 1.0).unwrap();
    let spec = task(12);
    let f = CompletionCostFn::quadratic(0.1);
    let mut group = c.benchmark_group("simulate_pair");
    group.sample_size(20);
    group.bench_function("100k_trials", |b| {
        b.iter(|| simulate_pair(&pair, &spec, &f, 6, 100_000, black_box(1)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, timer, solver, simulation);
criterion_main!(benches);
