use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use raibfd::numerics::hermitian_eig;
use raibfd::sim::{ao_sim, effective_si_channel, rcg_minimize, AoOptions};
use raibfd::{design_raibfd, evaluate_link, optimize_ideal, waterfill, RcgOptions};
use raibfd_bench::{instance, least_squares};
use std::hint::black_box;

fn eig(c: &mut Criterion) {
    let (_, channels, d0) = instance(16, 1);
    let g = effective_si_channel(&channels, &d0).unwrap();
    let gram = g.adjoint() * &g;
    c.bench_function("hermitian_eig_8x8", |b| {
        b.iter(|| hermitian_eig(black_box(&gram)).unwrap())
    });
}

fn rcg(c: &mut Criterion) {
    let mut group = c.benchmark_group("rcg_least_squares");
    for side in [4, 8, 16] {
        let (problem, d0) = least_squares(side, 2);
        let opts = RcgOptions {
            max_iters: 100,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(side * side), &side, |b, _| {
            b.iter(|| rcg_minimize(&problem, black_box(&d0), &opts).unwrap())
        });
    }
    group.finish();
}

fn alternating_design(c: &mut Criterion) {
    let mut group = c.benchmark_group("ao_sim");
    group.sample_size(10);
    for side in [8, 16] {
        let (s, channels, d0) = instance(side, 3);
        let opts = AoOptions::default();
        group.bench_with_input(BenchmarkId::from_parameter(side * side), &side, |b, _| {
            b.iter(|| ao_sim(&channels, s.m_d, s.ris_bits, black_box(&d0), &opts).unwrap())
        });
    }
    group.finish();
}

fn link(c: &mut Criterion) {
    let (s, channels, d0) = instance(16, 4);
    let design = design_raibfd(&channels, &s, &d0, &AoOptions::default()).unwrap();
    c.bench_function("evaluate_link_enob12", |b| {
        b.iter(|| evaluate_link(&channels, &design.sim.ris, None, &design.bundle, black_box(&s)).unwrap())
    });
    c.bench_function("waterfill_3_users", |b| {
        b.iter(|| waterfill(black_box(&[0.4, 1.2, 3.0]), 1e3, 1e-9).unwrap())
    });
    let mut group = c.benchmark_group("optimize_ideal");
    group.sample_size(10);
    group.bench_function("256", |b| {
        b.iter(|| optimize_ideal(&channels, &s, black_box(&d0), &RcgOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, eig, rcg, alternating_design, link);
criterion_main!(benches);
