use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use wpme_bench::{bumpy, far_grid, norm_grid, solver_grid, workhorse};
use wpme_core::norms::norm_1r;
use wpme_core::profiles::{shoot_profile, ExplicitFamily, ShootOptions};
use wpme_core::solver::{step_implicit, BcValue, SolverOptions};

fn bench_implicit_step(c: &mut Criterion) {
    let params = workhorse();
    let grid = solver_grid(&params);
    let fam = ExplicitFamily::new(&params, 1.0, 1.0 / 6.0).unwrap();
    let state = fam.datum(&grid);
    let bc = BcValue::Dirichlet(fam.value(grid.r_max(), 1e-3).unwrap());
    let opts = SolverOptions::default();
    c.bench_function("implicit_step_m400", |b| {
        b.iter(|| step_implicit(&params, black_box(&state), 1e-3, &bc, &opts).unwrap())
    });
}

fn bench_shooting(c: &mut Criterion) {
    let params = workhorse();
    let grid = far_grid(&params);
    let opts = ShootOptions::default();
    c.bench_function("shoot_profile_m800", |b| {
        b.iter(|| shoot_profile(&params, black_box(1.0), 1.0, &grid, &opts).unwrap())
    });
}

fn bench_growth_norm(c: &mut Criterion) {
    let params = workhorse();
    let grid = norm_grid(&params);
    let f = bumpy(&grid);
    c.bench_function("norm_1r_m2000", |b| b.iter(|| norm_1r(black_box(&f), 2.0, 1.0).unwrap()));
}

criterion_group!(benches, bench_implicit_step, bench_shooting, bench_growth_norm);
criterion_main!(benches);
