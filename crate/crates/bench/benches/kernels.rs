use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use shellavg_core::averages::spin_average;
use shellavg_core::counting::{expand_generating, g_closed};
use shellavg_core::numerics::ratio;
use shellavg_core::oracle::{sector_trace_f, spin_resolved_average_oracle};
use shellavg_core::parametrization::e_to_f;
use shellavg_core::wigner::{sum_rule_lhs, three_j_int};
use shellavg_core::{AomParams, Parity, ShellPair};

fn wigner(c: &mut Criterion) {
    // three_j is memoized, so after the first pass this measures the cache.
    c.bench_function("three_j_int(6 6 6; 2 -3 1)", |b| {
        b.iter(|| three_j_int(black_box(6), 6, 6, 2, -3, 1).unwrap())
    });
    c.bench_function("sum_rule_lhs f-shell scan", |b| {
        b.iter(|| {
            for m in -3..=3 {
                for mp in -3..=3 {
                    black_box(sum_rule_lhs(3, Parity::Odd, m, mp, mp, m).unwrap());
                }
            }
        })
    });
}

fn counting(c: &mut Criterion) {
    c.bench_function("expand_generating l=4", |b| {
        b.iter(|| expand_generating(black_box(4)).unwrap())
    });
    c.bench_function("g_closed l=6 N=13", |b| {
        b.iter(|| g_closed(black_box(6), 13, 1).unwrap())
    });
}

fn transforms(c: &mut Criterion) {
    let p = AomParams::uniform(ShellPair::diagonal(4), &ratio(1, 3));
    c.bench_function("e_to_f l=4", |b| b.iter(|| e_to_f(black_box(&p)).unwrap()));
}

fn oracle(c: &mut Criterion) {
    c.bench_function("sector_trace_f f^7 2M_S=1", |b| {
        b.iter(|| sector_trace_f(black_box(3), 7, 1).unwrap())
    });
    c.bench_function("spin_resolved_average_oracle d^5 2S=1", |b| {
        b.iter(|| spin_resolved_average_oracle(black_box(2), 5, 1).unwrap())
    });
    c.bench_function("spin_average f^7 2S=1", |b| {
        b.iter(|| spin_average(black_box(3), 7, 1).unwrap())
    });
}

criterion_group!(benches, wigner, counting, transforms, oracle);
criterion_main!(benches);
