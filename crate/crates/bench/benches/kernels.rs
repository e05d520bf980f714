use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use radshock::evolve::{elliptic_solve, initial_state, stable_dt, step, DecayOptions, Perturbation};
use radshock::model::{ModelSystem, ShockTriple};
use radshock::profile::solve_profile;
use radshock_bench::{hamer_profile, hamer_solver};

fn profile(c: &mut Criterion) {
    let m = ModelSystem::hamer();
    let s = ShockTriple::hamer(0.2);
    c.bench_function("profile_hamer_0.2", |b| b.iter(|| solve_profile(&m, &s, None, 1e-12).unwrap()));
}

fn evans(c: &mut Criterion) {
    let s = hamer_solver(0.2);
    let l = Complex64::new(1e-2, 5e-2);
    c.bench_function("evans_pair_hamer_0.2", |b| b.iter(|| s.evans_pair(black_box(l)).unwrap()));
    let xs: Vec<f64> = (0..101).map(|i| -10.0 + 0.2 * i as f64).collect();
    c.bench_function("resolvent_kernel_hamer_0.2", |b| {
        b.iter(|| s.resolvent_kernel(black_box(Complex64::new(1e-4, 0.0)), -1.0, &xs).unwrap())
    });
}

fn simulation(c: &mut Criterion) {
    let rhs: Vec<f64> = (0..8001).map(|i| (0.01 * i as f64).sin()).collect();
    c.bench_function("elliptic_solve_8001", |b| b.iter(|| elliptic_solve(0.05, black_box(&rhs))));
    let p = hamer_profile(0.2);
    let s = initial_state(&p, &Perturbation::standard(), &DecayOptions::default());
    let dt = stable_dt(&p.model, &s);
    c.bench_function("ssp_rk3_step_8001", |b| b.iter(|| step(black_box(&s), &p.model, dt).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = profile, evans, simulation
}
criterion_main!(benches);
