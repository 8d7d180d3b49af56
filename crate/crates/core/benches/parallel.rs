use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use dutyroster_core::derive::derive;
use dutyroster_core::par::ExecMode;
use dutyroster_core::pipeline::prepare;
use dutyroster_core::scenarios::{self, random_tiny};
use dutyroster_core::solver::{exhaustive_oracle, free_decisions};

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn bench_derive(c: &mut Criterion) {
    let mut g = c.benchmark_group("derive");
    g.sample_size(10);
    for name in ["internal-medicine", "cardiology"] {
        let inst = scenarios::by_name(name).unwrap();
        for (label, mode) in MODES {
            g.bench_with_input(BenchmarkId::new(label, name), &inst, |b, inst| {
                b.iter(|| derive(black_box(inst), mode).unwrap())
            });
        }
    }
    g.finish();
}

fn bench_oracle(c: &mut Criterion) {
    // the seed with the most free assignment variables among the first hundred
    let (seed, model) = (0..100)
        .map(|s| (s, prepare(&random_tiny(s), ExecMode::Sequential).unwrap().1))
        .max_by_key(|(_, m)| free_decisions(m).unwrap_or(0))
        .unwrap();
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    for (label, mode) in MODES {
        g.bench_with_input(BenchmarkId::new(label, seed), &model, |b, m| {
            b.iter(|| exhaustive_oracle(black_box(m), mode).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench_derive, bench_oracle);
criterion_main!(benches);
