//! Benchmarks of the numerical kernels at desk scale.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};

use anacon_core::balayage::{partial_balayage, BalayageOptions};
use anacon_core::lambda1::{build_basis, minimize_sup, MinimaxOptions};
use anacon_core::transport::{sample_ball, sample_uniform, solve_assignment};
use anacon_core::{boundary_samples, rasterize, DomainSpec, MeasureDensity};

fn bench_poisson(c: &mut Criterion) {
    let dom = Arc::new(rasterize::<2>(&DomainSpec::ball(2, &[0.0, 0.0], 1.0), 96).unwrap());
    let rhs = MeasureDensity::uniform(dom.clone(), 2.0).unwrap();
    c.bench_function("poisson_disk_96", |b| {
        b.iter(|| anacon_core::solve_dirichlet_poisson(&dom, &rhs, &Default::default()).unwrap())
    });
}

fn bench_balayage(c: &mut Criterion) {
    let dom = Arc::new(rasterize::<2>(&DomainSpec::ball(2, &[0.0, 0.0], 4.0), 96).unwrap());
    let nu = MeasureDensity::uniform(dom.clone(), 2.0).unwrap();
    let mu = MeasureDensity::new(
        dom.clone(),
        vec![0.0; dom.len()],
        vec![([0.0, 0.0], 2.0 * std::f64::consts::PI)],
    )
    .unwrap();
    let opts = BalayageOptions {
        omega: None,
        ..Default::default()
    };
    c.bench_function("balayage_radial_96", |b| {
        b.iter(|| partial_balayage(&dom, &mu, &nu, &opts).unwrap())
    });
}

fn bench_assignment(c: &mut Criterion) {
    let spec = DomainSpec::ellipsoid(2, &[0.0, 0.0], &[0.5, 1.0]);
    let source = sample_uniform::<2>(&spec, 400, 1).unwrap();
    let target = sample_ball::<2>(&[0.0, 0.0], 0.5f64.sqrt(), 400, 2);
    c.bench_function("assignment_400", |b| {
        b.iter(|| solve_assignment(&source, &target).unwrap())
    });
}

fn bench_minimax(c: &mut Criterion) {
    let spec = DomainSpec::ellipsoid(2, &[0.0, 0.0], &[0.5, 1.0]);
    let basis = build_basis::<2>(&spec, 6).unwrap();
    let samples = boundary_samples::<2>(&spec, 512).unwrap();
    let mut dense = boundary_samples::<2>(&spec, 2048).unwrap();
    dense.extend_from_slice(&samples);
    c.bench_function("minimax_ellipse_d6", |b| {
        b.iter(|| minimize_sup(&basis, &samples, &dense, &MinimaxOptions::default()).unwrap())
    });
}

criterion_group!(
    benches,
    bench_poisson,
    bench_balayage,
    bench_assignment,
    bench_minimax
);
criterion_main!(benches);
