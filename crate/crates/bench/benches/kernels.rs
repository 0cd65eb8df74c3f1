use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use sumdiff_core::blowup::BlowupOptions;
use sumdiff_core::constructions;
use sumdiff_core::factorial::{log_factorial, multinomial};
use sumdiff_core::search::{enumerate_and_rank, Grid, SearchSpec};
use sumdiff_core::{convergence_sweep, entropy_ratio, maximize_alpha, OptimizerOptions};

fn entropy_kernels(c: &mut Criterion) {
    let seven = constructions::seven_point();
    let m = constructions::seven_point_reference_measure();
    c.bench_function("entropy_ratio/staircase-7", |b| {
        b.iter(|| entropy_ratio(black_box(&seven), black_box(&m)).unwrap())
    });
}

fn optimizer(c: &mut Criterion) {
    let seven = constructions::seven_point();
    let ansatz = constructions::seven_point_ansatz();
    let mut group = c.benchmark_group("maximize_alpha");
    group.sample_size(10);
    for starts in [8usize, 64] {
        let opts = OptimizerOptions {
            starts,
            ..Default::default()
        };
        group.bench_with_input(
            BenchmarkId::new("staircase-7-ansatz", starts),
            &opts,
            |b, o| b.iter(|| maximize_alpha(&seven, Some(&ansatz), o).unwrap()),
        );
    }
    group.bench_function("five-point-free", |b| {
        let five = constructions::five_point();
        let opts = OptimizerOptions {
            starts: 16,
            ..Default::default()
        };
        b.iter(|| maximize_alpha(&five, None, &opts).unwrap())
    });
    group.finish();
}

fn blowup(c: &mut Criterion) {
    let seven = constructions::seven_point();
    let m = constructions::seven_point_reference_measure();
    c.bench_function("convergence_sweep/log-only", |b| {
        b.iter(|| {
            convergence_sweep(
                &seven,
                &m,
                &[300, 3000, 30_000, 300_000],
                BlowupOptions::log_only(),
            )
            .unwrap()
        })
    });
    c.bench_function("multinomial/exact-3x1000", |b| {
        b.iter(|| multinomial(black_box(&[1000, 1000, 1000])))
    });
    c.bench_function("log_factorial", |b| {
        b.iter(|| {
            (0..2048u64)
                .map(|n| log_factorial(black_box(n * 37)))
                .sum::<f64>()
        })
    });
}

fn search(c: &mut Criterion) {
    let spec = SearchSpec {
        grid: Grid {
            width: 2,
            height: 1,
        },
        size: 4,
        slopes: vec![
            "0".parse().unwrap(),
            "1".parse().unwrap(),
            "inf".parse().unwrap(),
        ],
        budget: 1_000_000,
        optimizer: OptimizerOptions {
            starts: 8,
            ..Default::default()
        },
        structural_dedup: false,
    };
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    group.bench_function("grid-2x1-n4", |b| {
        b.iter(|| enumerate_and_rank(&spec).unwrap())
    });
    group.finish();
}

criterion_group!(benches, entropy_kernels, optimizer, blowup, search);
criterion_main!(benches);
