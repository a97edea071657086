use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use stochorder::moments::natural_offset;
use stochorder::{compare, mix_moments, moment_sequence, moment_sequence_at, OrderingConfig};
use stochorder_bench::{compact, gumbel};

fn moments(c: &mut Criterion) {
    let d = compact(gumbel(31.0063, 1.74346));
    let mut group = c.benchmark_group("moment_sequence");
    for k in [16, 64, 128] {
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, &k| {
            b.iter(|| moment_sequence(black_box(&d), k).unwrap())
        });
    }
    group.finish();

    let e = compact(gumbel(32.0063, 1.74346));
    let off = natural_offset(&d).max(natural_offset(&e));
    let s1 = moment_sequence_at(&d, 64, off).unwrap();
    let s2 = moment_sequence_at(&e, 64, off).unwrap();
    c.bench_function("mix_moments/2", |b| b.iter(|| mix_moments(&[&s1, &s2], black_box(&[0.3, 0.7])).unwrap()));
}

fn comparisons(c: &mut Criterion) {
    let cfg = OrderingConfig::default();
    let pairs = [
        ("shifted", gumbel(31.0063, 1.74346), gumbel(32.0063, 1.74346)),
        ("crossing", gumbel(6.27294, 2.20532), gumbel(6.19073, 2.06288)),
    ];
    for (name, a, b) in &pairs {
        let (ca, cb) = (compact(a.clone()), compact(b.clone()));
        c.bench_function(&format!("compare/{name}"), |bch| bch.iter(|| compare(black_box(&ca), black_box(&cb), &cfg)));
        c.bench_function(&format!("compare_unbounded/{name}"), |bch| {
            bch.iter(|| compare(black_box(a), black_box(b), &cfg))
        });
    }
}

criterion_group!(benches, moments, comparisons);
criterion_main!(benches);
