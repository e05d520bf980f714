use radshock::linalg::{c, CMat, C64};
use radshock::model::{ModelSystem, ShockTriple};
use radshock::profile::{endpoint_exponents, solve_profile};
use radshock::spectral::{Side, SpectralFrame};

fn mx(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn frame(eps: f64) -> SpectralFrame {
    let prof = solve_profile(&ModelSystem::hamer(), &ShockTriple::hamer(eps), None, 1e-12).unwrap();
    SpectralFrame::new(prof).unwrap()
}

#[test]
fn hamer_mode_counts() {
    let f = frame(0.2);
    for lam in [C64::new(0.01, 0.0), C64::new(1e-4, 0.3), C64::new(0.0, -0.05), C64::new(2.0, 1.0)] {
        assert_eq!(f.mode_counts(lam).unwrap(), (2, 1, 1, 2), "lambda = {lam}");
    }
    assert_eq!(f.k_plus(), 1);
    assert_eq!(f.k_minus(), 1);
}

#[test]
fn euler_mode_counts() {
    let model = ModelSystem::euler_rad(1.4);
    let shock = ShockTriple::euler(&model, 0.05).unwrap();
    let p = shock.p;
    let prof = solve_profile(&model, &shock, None, 1e-12).unwrap();
    let f = SpectralFrame::new(prof).unwrap();
    let n = 3;
    let want = (p + 1, n - p + 1, p, n - p + 2);
    assert_eq!(f.mode_counts(c(0.01)).unwrap(), want);
    assert_eq!(f.mode_counts(C64::new(0.0, 0.02)).unwrap(), want);
}

#[test]
fn slow_exponent_follows_transport_speed() {
    let eps = 0.2;
    let f = frame(eps);
    for side in [Side::Minus, Side::Plus] {
        let a = f.end_state(side)[0];
        let lam = 1e-5;
        let m = f.asymptotic_modes(side, c(lam)).unwrap();
        let slow = m.mu.iter().min_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap()).unwrap();
        let want = -lam / a;
        assert!((slow.re - want).abs() < 1e-3 * want.abs(), "{side:?}: {slow} vs {want}");
    }
}

#[test]
fn fast_exponents_at_zero_match_endpoint_relation() {
    let f = frame(0.1);
    for side in [Side::Minus, Side::Plus] {
        let u = f.end_state(side).to_vec();
        let (slow, fast) = endpoint_exponents(&f.profile.model, &u).unwrap();
        let m = f.asymptotic_modes(side, c(0.0)).unwrap();
        let has = |z: f64| m.mu.iter().any(|mu| (mu.re - z).abs() < 1e-9 && mu.im.abs() < 1e-9);
        assert!(has(slow) && has(fast), "{side:?} {:?}", m.mu);
        assert!(has(0.0));
    }
}

#[test]
fn system_is_affine_in_lambda() {
    let f = frame(0.2);
    let x = 0.7;
    let a0 = f.a_mat(x, c(0.0));
    let l1 = C64::new(0.3, -0.2);
    let a1 = f.a_mat(x, l1);
    let d = &a1 - &a0;
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j && i < 1 { -l1 } else { c(0.0) };
            assert!((d[(i, j)] - want).norm() < 1e-14);
        }
    }
}

#[test]
fn flux_form_matches_theta_form() {
    // V = Theta W gives M = (Theta' + AA) Theta^{-1}
    let f = frame(0.2);
    let lam = C64::new(0.01, 0.02);
    for x in [-3.0, -0.4, 0.5, 2.0] {
        let h = 1e-5;
        let tp = (f.theta(x + h) - f.theta(x - h)) / (2.0 * h);
        let th = f.theta(x).try_inverse().unwrap();
        let want = (tp.map(c) + f.a_mat(x, lam)) * th.map(c);
        let got = f.flux_coefficients(x).at(lam);
        let err = mx(&(&got - &want));
        assert!(err < 1e-6 * mx(&want), "x = {x}: {err:e}");
    }
}

#[test]
fn decaying_projection_is_a_projection_of_right_rank() {
    let f = frame(0.2);
    for lam in [c(0.0), c(0.01), C64::new(0.0, 0.1), C64::new(-1e-4, 1e-3)] {
        for (side, k) in [(Side::Plus, f.k_plus()), (Side::Minus, f.k_minus())] {
            let (p, _) = f.decaying_projection(side, lam).unwrap();
            let p2: CMat = &p * &p;
            assert!(mx(&(&p2 - &p)) < 1e-9, "{lam} {side:?}");
            let tr = p.trace();
            assert!((tr - c(k as f64)).norm() < 1e-9);
        }
    }
}

#[test]
fn seed_columns_are_invariant() {
    let f = frame(0.2);
    let lam = C64::new(0.002, 0.01);
    for side in [Side::Plus, Side::Minus] {
        let (y, _) = f.seed_columns(side, lam).unwrap();
        let a = f.asymptotic_matrix(side, lam);
        let (p, _) = f.decaying_projection(side, lam).unwrap();
        let ay = &a * &y;
        let back = &p * &ay;
        assert!(mx(&(&ay - &back)) < 1e-10 * mx(&ay).max(1.0));
    }
}

#[test]
fn alpha0_is_large_for_weak_shocks() {
    let f = frame(0.2);
    let a = f.alpha0(c(0.0)).unwrap();
    assert!(a.re > 50.0, "{a}");
    let g = frame(0.1);
    assert!(g.alpha0(c(0.0)).unwrap().re > 2.0 * a.re);
}
