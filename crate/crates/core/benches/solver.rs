//! Hot-path benchmarks: the multiplier application, the fiber projection,
//! and the full residual + descent-direction step.

use criterion::{criterion_group, criterion_main, Criterion};
use nehari_fs::grid::{Field, FracOrder, TorusGrid};
use nehari_fs::model::{GammaWeight, Nonlinearity, Potential, Problem};
use nehari_fs::{energy, nehari, spectral};
use std::hint::black_box;

fn soliton_problem() -> Problem {
    let g = TorusGrid::new(1, 40, 64).unwrap();
    Problem::new(
        g.clone(),
        FracOrder::new(2.0).unwrap(),
        Potential::constant(g.clone(), 1.0).unwrap(),
        GammaWeight::zero(g.clone(), 3.0).unwrap(),
        Nonlinearity::pure_power(g, 4.0).unwrap(),
    )
    .unwrap()
}

fn soliton_field(prob: &Problem) -> Field {
    let c = prob.grid().center()[0];
    Field::from_fn(prob.grid().clone(), move |x| 2f64.sqrt() / (x[0] - c).cosh())
}

fn bench_frac_laplacian(c: &mut Criterion) {
    let prob = soliton_problem();
    let u = soliton_field(&prob);
    let alpha = FracOrder::new(1.5).unwrap();
    u.spectrum(); // warm the cache so the multiplier itself is measured
    c.bench_function("frac_laplacian n=2560", |b| {
        b.iter(|| black_box(spectral::frac_laplacian(black_box(&u), alpha)))
    });
}

fn bench_projection(c: &mut Criterion) {
    let prob = soliton_problem();
    let u = soliton_field(&prob).scale(0.37);
    c.bench_function("nehari projection n=2560", |b| {
        b.iter(|| black_box(nehari::project_default(black_box(&u), &prob).unwrap()))
    });
}

fn bench_descent_direction(c: &mut Criterion) {
    let prob = soliton_problem();
    let u = soliton_field(&prob);
    c.bench_function("residual + e_gradient n=2560", |b| {
        b.iter(|| {
            let r = energy::residual(black_box(&u), &prob);
            black_box(energy::e_gradient(&r.field, &prob, 1e-3, 16))
        })
    });
}

criterion_group!(
    benches,
    bench_frac_laplacian,
    bench_projection,
    bench_descent_direction
);
criterion_main!(benches);
