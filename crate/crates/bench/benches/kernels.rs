use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fracinv_core::forward::{boundary_flux_table, SourceSampling};
use fracinv_core::inversion::ForwardModel;
use fracinv_core::specfun::{bessel_j, MittagLeffler};
use fracinv_core::{build_basis, MeasurementSchedule, PolarGrid, StarShape, TimeGrid, TrigPoly};

fn shape() -> StarShape {
    StarShape::new(TrigPoly::new(1.2, vec![0.1, 0.0], vec![0.0, 0.1]).unwrap()).unwrap()
}

fn mittag_leffler(c: &mut Criterion) {
    let mut g = c.benchmark_group("mittag_leffler");
    for alpha in [0.1, 0.5, 0.9] {
        let ml = MittagLeffler::new(alpha, 1.0).unwrap();
        // series, asymptotic and integral regimes
        let zs: Vec<f64> = (0..64).map(|i| -0.05 * 1.15f64.powi(i)).collect();
        g.bench_with_input(BenchmarkId::from_parameter(alpha), &zs, |b, zs| {
            b.iter(|| zs.iter().map(|&z| ml.eval(black_box(z)).unwrap()).sum::<f64>())
        });
    }
    g.finish();
}

fn bessel(c: &mut Criterion) {
    let xs: Vec<f64> = (1..=64).map(|i| 0.7 * i as f64).collect();
    c.bench_function("bessel_j/orders_0_to_7", |b| {
        b.iter(|| {
            let mut s = 0.0;
            for &x in &xs {
                for m in 0..8 {
                    s += bessel_j(m, black_box(x)).unwrap();
                }
            }
            s
        })
    });
}

fn forward_map(c: &mut Criterion) {
    let basis = build_basis(2000.0).unwrap();
    let schedule = MeasurementSchedule::uniform(0.0, 1.0, 1e-3).unwrap();
    let angles = [0.75 * std::f64::consts::PI, 55.0 * std::f64::consts::PI / 32.0];
    let model = ForwardModel::new(&basis, 0.9, &schedule, &angles).unwrap();
    let q = shape();
    c.bench_function("forward_map/evaluate", |b| b.iter(|| model.evaluate(black_box(&q)).unwrap()));
    c.bench_function("forward_map/jacobian_m4", |b| {
        b.iter(|| model.jacobian(black_box(&q), 4).unwrap())
    });
}

fn finite_differences(c: &mut Criterion) {
    let mut g = c.benchmark_group("fd_solve_50_steps");
    g.sample_size(10);
    let q = shape();
    for (l, k) in [(50, 64), (100, 128)] {
        let grid = PolarGrid::new(l, k).unwrap();
        let tg = TimeGrid::new(0.9, 1e-3, 50).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(format!("{l}x{k}")), &grid, |b, grid| {
            b.iter(|| boundary_flux_table(&q, grid, &tg, SourceSampling::CellFraction).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, mittag_leffler, bessel, forward_map, finite_differences);
criterion_main!(benches);
