use std::time::Instant;

use proptest::prelude::*;

use radshock::linalg::{eig_real, RMat, RVec};
use radshock::model::{
    check_coupling, check_lax_and_gnl, check_rankine_hugoniot, check_structure, fd_jacobian, find_compensator,
    gnl_value, sample_states, ModelSystem, ShockTriple,
};

fn euler() -> (ModelSystem, ShockTriple) {
    let m = ModelSystem::euler_rad(5.0 / 3.0);
    let s = ShockTriple::euler(&m, 0.05).unwrap();
    (m, s)
}

#[test]
fn burgers_rankine_hugoniot() {
    let m = ModelSystem::hamer();
    assert_eq!(check_rankine_hugoniot(&m, &ShockTriple::hamer(0.2)).unwrap(), 0.0);
    let (e, s) = euler();
    assert!(check_rankine_hugoniot(&e, &s).unwrap() < 1e-10);
}

proptest! {
    #[test]
    fn trivial_jump_has_no_residual(u in -1.0f64..1.0, s in -3.0f64..3.0) {
        let m = ModelSystem::hamer();
        let mut sh = ShockTriple::new(vec![u], vec![u], 1);
        sh.s = s;
        prop_assert_eq!(check_rankine_hugoniot(&m, &sh).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_burgers_shocks_satisfy_rh(eps in 1e-3f64..1.0) {
        prop_assert!(check_rankine_hugoniot(&ModelSystem::hamer(), &ShockTriple::hamer(eps)).unwrap() < 1e-16);
    }
}

#[test]
fn burgers_lax_and_gnl() {
    let m = ModelSystem::hamer();
    let sh = ShockTriple::hamer(0.2);
    let states = sample_states(&m, &sh, 20, 1);
    let r = check_lax_and_gnl(&m, &sh, &states).unwrap();
    assert!(r.lax_ok);
    assert!((r.gnl_witness - 1.0).abs() < 1e-8);
    let rev = ShockTriple::new(vec![-0.1], vec![0.1], 1);
    assert!(!check_lax_and_gnl(&m, &rev, &states).unwrap().lax_ok);
}

#[test]
fn euler_gnl_matches_gamma_law_formula() {
    let (m, sh) = euler();
    let gamma: f64 = 5.0 / 3.0;
    for u in [&sh.u_minus, &sh.u_plus] {
        let (rho, v) = (u[0], u[1] / u[0]);
        let p = (gamma - 1.0) * (u[2] - 0.5 * rho * v * v);
        let c = (gamma * p / rho).sqrt();
        // r = (rho, -c, rho c^2) in (rho, v, p), mapped to conservative variables
        let rc = RVec::from_column_slice(&[
            rho,
            v * rho - rho * c,
            rho * c * c / (gamma - 1.0) + 0.5 * v * v * rho - rho * v * c,
        ]);
        let oracle = 0.5 * (gamma + 1.0) * c / rc.norm();
        let got = gnl_value(&m, u, 1).unwrap();
        assert!((got.abs() - oracle).abs() < 1e-6 * oracle, "{got} vs {oracle}");
    }
}

#[test]
fn coupling_witnesses() {
    let sh = ShockTriple::hamer(0.2);
    let m = ModelSystem::hamer();
    let states = sample_states(&m, &sh, 30, 3);
    let r = check_coupling(&m, &sh, &states).unwrap();
    assert!((r.witness - 1.0).abs() < 1e-12);
    assert!((r.h3_minus - 1.0).abs() < 1e-12 && (r.h3_plus - 1.0).abs() < 1e-12);
    let z = ModelSystem::hamer_uncoupled();
    assert_eq!(check_coupling(&z, &sh, &states).unwrap().witness, 0.0);
}

#[test]
fn euler_principal_diffusion_positive() {
    let (m, sh) = euler();
    let r = check_coupling(&m, &sh, &[sh.u_minus.clone()]).unwrap();
    // independent evaluation with a finite-difference gradient of g
    let u = &sh.u_minus;
    let e = eig_real(&m.jacobian_f(u)).unwrap();
    let b = fd_jacobian(|v| RVec::from_element(1, m.g(v)), u, 1);
    let lb: RMat = m.l_vec() * b;
    let oracle = (e.left.row(0) * lb * e.right.column(0))[(0, 0)];
    assert!(r.h3_minus > 0.0);
    assert!((r.h3_minus - oracle).abs() < 1e-6 * oracle.abs(), "{} vs {oracle}", r.h3_minus);
}

#[test]
fn jacobians_match_finite_differences() {
    for (m, sh) in [(ModelSystem::hamer(), ShockTriple::hamer(0.2)), euler()] {
        for u in sample_states(&m, &sh, 100, 11) {
            let a = m.jacobian_f(&u);
            let afd = fd_jacobian(|v| m.flux(v), &u, m.n);
            assert!((&a - &afd).norm() <= 1e-6 * a.norm());
            let b = m.jacobian_b(&u).transpose();
            let bfd = fd_jacobian(|v| RVec::from_element(1, m.g(v)), &u, 1);
            assert!((&b - &bfd).norm() <= 1e-6 * b.norm());
        }
    }
}

#[test]
fn scalar_compensator_is_trivial() {
    let m = ModelSystem::hamer();
    let sh = ShockTriple::hamer(0.1);
    let c = find_compensator(&m, &sample_states(&m, &sh, 20, 2), 2).unwrap();
    assert!(c.params.is_empty());
    assert!((c.theta - 1.0).abs() < 1e-12);
}

#[test]
fn euler_compensator_beats_grid_search() {
    let (m, sh) = euler();
    let states = sample_states(&m, &sh, 40, 5);
    let c = find_compensator(&m, &states, 5).unwrap();
    let k = c.k();
    assert_eq!((&k + k.transpose()).norm(), 0.0);
    assert!(c.theta > 0.0);
    assert!(c.params.iter().any(|p| *p != 0.0));
    let data: Vec<(RMat, RMat)> =
        states.iter().map(|u| (m.jacobian_f(u), m.symmetrizer(u).unwrap() * m.lb(u))).collect();
    let theta = |k: &RMat| {
        data.iter()
            .map(|(a, d)| {
                let s = k * a + d;
                let s = (&s + s.transpose()) * 0.5;
                s.symmetric_eigenvalues().min()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let scale = c.params.iter().fold(0.0f64, |a, p| a.max(p.abs())) * 2.0;
    let mut best = f64::NEG_INFINITY;
    let n = 16;
    for i in 0..=n {
        for j in 0..=n {
            for l in 0..=n {
                let g = |t: usize| scale * (2.0 * t as f64 / n as f64 - 1.0);
                let mut k = RMat::zeros(3, 3);
                k[(0, 1)] = g(i);
                k[(0, 2)] = g(j);
                k[(1, 2)] = g(l);
                let k = &k - k.transpose();
                best = best.max(theta(&k));
            }
        }
    }
    assert!(c.theta >= best * (1.0 - 1e-3) || c.theta >= best - 1e-12, "{} vs grid {best}", c.theta);
}

#[test]
fn structure_reports() {
    let start = Instant::now();
    let cases =
        [(ModelSystem::hamer(), ShockTriple::hamer(0.1)), (ModelSystem::hamer(), ShockTriple::hamer(0.2)), euler()];
    for (m, sh) in &cases {
        let r = check_structure(m, sh, 42).unwrap();
        for h in ["S0", "S1", "S2", "H0", "H1", "H2", "H3"] {
            assert_eq!(r.get(h).unwrap().pass, Some(true), "{} {h}: {:?}", m.name, r.get(h));
        }
        assert!(r.kawashima_theta > 0.0);
        assert_eq!(r, check_structure(m, sh, 42).unwrap());
    }
    let mutant = check_structure(&ModelSystem::hamer_uncoupled(), &ShockTriple::hamer(0.2), 42).unwrap();
    assert_eq!(mutant.failures(), vec!["S2".to_string()]);
    assert!(start.elapsed().as_secs_f64() < 10.0);
}
