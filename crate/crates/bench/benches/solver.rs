use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use chromopt::graphs::{count_colorings_dc, turan_parts};
use chromopt::{
    brute_opt, construct_counterexample, count_colorings_multipartite, global_solve, relaxed_solve, ColoredGraph,
    SolveOptions,
};

fn solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("global_solve");
    for (q, s) in [(4, 2.5), (13, 10.0), (30, 7.3), (60, 41.5)] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("q{q}_s{s}")), &(q, s), |b, &(q, s)| {
            b.iter(|| global_solve(black_box(q), black_box(s), SolveOptions::default()).unwrap())
        });
    }
    g.finish();
    c.bench_function("brute_opt/q4_8x2000", |b| b.iter(|| brute_opt(4, black_box(2.3), 8, 2000, 1).unwrap()));
}

fn counting(c: &mut Criterion) {
    let mut g = c.benchmark_group("count_multipartite");
    for n in [50, 200, 400] {
        let parts = turan_parts(n, 5).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &parts, |b, parts| {
            b.iter(|| count_colorings_multipartite(black_box(parts), 8).unwrap())
        });
    }
    g.finish();
    let petersen = ColoredGraph::new(
        10,
        vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 5), (1, 6), (2, 7), (3, 8), (4, 9), (5, 7), (7, 9), (9, 6), (6, 8), (8, 5)],
    )
    .unwrap();
    c.bench_function("count_dc/petersen_q4", |b| b.iter(|| count_colorings_dc(black_box(&petersen), 4).unwrap()));
}

fn constructions(c: &mut Criterion) {
    c.bench_function("construct_counterexample/3400_13_1700", |b| {
        b.iter(|| construct_counterexample(black_box(3400), 13, 1700).unwrap())
    });
    c.bench_function("relaxed_solve/s7.5_k12", |b| b.iter(|| relaxed_solve(black_box(7.5), 12, 0.01).unwrap()));
}

criterion_group!(benches, solve, counting, constructions);
criterion_main!(benches);
