use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rescuescan::contacts::contact_map;
use rescuescan::stats::{mann_whitney_u, mann_whitney_u_with};
use rescuescan::{build_rescue_matrix, UTestMethod, ZAxis};
use rescuescan_bench::{backgrounds, helix_trace, protein, pssm, samples};

fn mann_whitney(c: &mut Criterion) {
    let mut g = c.benchmark_group("mann_whitney");
    for (n1, n2) in [(6, 6), (50, 50), (1000, 1000)] {
        let (a, b) = samples(n1, n2, 0.1);
        g.bench_with_input(BenchmarkId::new("auto", format!("{n1}x{n2}")), &(a, b), |bench, (a, b)| {
            bench.iter(|| mann_whitney_u(black_box(a), black_box(b)).unwrap())
        });
    }
    let (a, b) = samples(6, 6, 0.1);
    g.bench_function("normal_6x6", |bench| {
        bench.iter(|| mann_whitney_u_with(black_box(&a), black_box(&b), UTestMethod::NormalApprox).unwrap())
    });
    g.finish();
}

fn rescue_matrix(c: &mut Criterion) {
    let mut g = c.benchmark_group("rescue_matrix");
    g.sample_size(20);
    for (len, v) in [(100, 5), (300, 20)] {
        let p = protein(len);
        let scorer = pssm(&p, 16);
        let bgs = backgrounds(&p, v);
        g.bench_function(BenchmarkId::from_parameter(format!("L{len}_V{v}")), |bench| {
            bench.iter(|| build_rescue_matrix(&scorer, &p, black_box(&bgs), ZAxis::Position).unwrap())
        });
    }
    g.finish();
}

fn contacts(c: &mut Criterion) {
    let mut g = c.benchmark_group("contact_map");
    for len in [100, 500] {
        let trace = helix_trace(len);
        g.bench_with_input(BenchmarkId::from_parameter(len), &trace, |bench, t| {
            bench.iter(|| contact_map(black_box(t), len, 10.0).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, mann_whitney, rescue_matrix, contacts);
criterion_main!(benches);
