use std::hint::black_box;

use aztec_core::asymptotics::{product_asym_sweep, ProductSelector};
use aztec_core::correlation::{corr_limit_balanced, BalancedOptions};
use aztec_core::par::Exec;
use aztec_core::{parse_config, NumericContext};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn product_sweep(c: &mut Criterion) {
    let ctx = NumericContext::new(40).unwrap();
    let ds: Vec<u64> = (10..=16).map(|k| 1u64 << k).collect();
    let mut g = c.benchmark_group("product_sweep");
    g.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| black_box(product_asym_sweep(ProductSelector::LOdd, &ds, exec, &ctx).unwrap()))
        });
    }
    g.finish();
}

fn balanced_schedule(c: &mut Criterion) {
    let ctx = NumericContext::new(40).unwrap();
    let cfg = parse_config("h@-3 h@0 s@2 s@5").unwrap();
    let mut g = c.benchmark_group("balanced_schedule");
    g.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        let opts = BalancedOptions { exec, ..BalancedOptions::default() };
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &opts, |b, opts| {
            b.iter(|| black_box(corr_limit_balanced(&cfg, opts, &ctx).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, product_sweep, balanced_schedule);
criterion_main!(benches);
