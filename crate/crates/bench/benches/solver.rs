use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use stochorder::risk::DEFAULT_QUANTILES;
use stochorder::{compile_report, solve_mgss, solve_zero_sum, SolverConfig};
use stochorder_bench::{gumbel_game, point_game, two_goals};

fn zero_sum(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("solve_zero_sum");
    group.sample_size(10);
    let points = point_game(&[&[3.0, 1.0], &[2.0, 4.0]]);
    group.bench_function("point_2x2", |b| b.iter(|| solve_zero_sum(black_box(&points), &cfg).unwrap()));
    for n in [2, 3] {
        let g = gumbel_game(n);
        group.bench_function(format!("gumbel_{n}x{n}"), |b| b.iter(|| solve_zero_sum(black_box(&g), &cfg).unwrap()));
    }
    group.finish();

    let g = gumbel_game(2);
    let r = solve_zero_sum(&g, &cfg).unwrap();
    c.bench_function("compile_report/gumbel_2x2", |b| {
        b.iter(|| compile_report(black_box(&g), &r, &DEFAULT_QUANTILES).unwrap())
    });
}

fn multi_goal(c: &mut Criterion) {
    let mg = two_goals();
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("solve_mgss");
    group.sample_size(10);
    group.bench_function("two_goals", |b| b.iter(|| solve_mgss(black_box(&mg), &cfg, &[0.5, 0.5]).unwrap()));
    group.finish();
}

criterion_group!(benches, zero_sum, multi_goal);
criterion_main!(benches);
