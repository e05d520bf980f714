use std::f64::consts::PI;

use radshock::evans::{EvansOptions, EvansSolver};
use radshock::greenfn::{
    contour_rule, e_k, e_k_y, errfn_derivative_decay, excited_term, fit_envelope, green_report, inverse_laplace,
    low_freq_green_grid, ExcitedTerm, GreenOptions,
};
use radshock::linalg::{c, C64};
use radshock::model::{ModelSystem, ShockTriple};
use radshock::numerics::composite_gauss;
use radshock::profile::solve_profile;
use radshock::spectral::SpectralFrame;

fn hamer02() -> EvansSolver {
    let prof = solve_profile(&ModelSystem::hamer(), &ShockTriple::hamer(0.2), None, 1e-12).unwrap();
    EvansSolver::new(SpectralFrame::new(prof).unwrap(), &EvansOptions::default()).unwrap()
}

#[test]
fn errfn_reference_values() {
    // erf(0.5), erf(1.5)
    assert!((radshock::numerics::errfn(0.5) - 0.5 * (1.0 + 0.520_499_877_813_046_5)).abs() < 1e-15);
    assert!((radshock::numerics::errfn(-1.5) - 0.5 * (1.0 - 0.966_105_146_475_310_7)).abs() < 1e-15);
}

#[test]
fn errfn_kernel_limits() {
    for &(y, a, beta) in &[(-1.0, 0.1, 1.0), (-5.0, 0.3, 0.5), (-0.2, 1.0, 2.0)] {
        assert!(e_k(y, 1e-6, a, beta).abs() < 1e-6);
        assert!((e_k(y, 1e9, a, beta) - 1.0).abs() < 1e-6);
    }
}

#[test]
fn errfn_kernel_matches_gaussian_integral() {
    let (a, beta): (f64, f64) = (0.2, 0.7);
    for &(y, t) in &[(-3.0f64, 2.0f64), (-1.0, 10.0), (-8.0, 40.0)] {
        let s = (4.0 * beta * t).sqrt();
        let lo = (y - a * t) / s;
        let hi = (y + a * t) / s;
        let oracle = composite_gauss(|z| (-z * z).exp(), lo, hi, 10, 40) / PI.sqrt();
        assert!((e_k(y, t, a, beta) - oracle).abs() < 1e-12);
        let h = 1e-5;
        let fd = (e_k(y + h, t, a, beta) - e_k(y - h, t, a, beta)) / (2.0 * h);
        assert!((e_k_y(y, t, a, beta) - fd).abs() < 1e-8);
    }
}

#[test]
fn errfn_derivative_scalings() {
    // t^{-1/2} once a t dominates sqrt(4 beta t)
    let ts = [16.0, 64.0, 256.0, 1024.0];
    let (norms, slope) = errfn_derivative_decay(1.0, 1.0, &ts);
    assert!((slope + 0.5).abs() < 0.1, "{slope}");
    for (l1, _) in norms {
        assert!(l1 <= 2.0 + 1e-9);
    }
}

#[test]
fn contour_rule_integrates_polynomials_and_poles() {
    let (r, big_r) = (4e-4, 0.4);
    let rule = contour_rule(r, big_r, 96).unwrap();
    let delta = 0.5 * r;
    let start = c(delta);
    let end = C64::new(0.0, big_r);
    let sum = |f: &dyn Fn(C64) -> C64| -> C64 { rule.nodes.iter().zip(&rule.weights).map(|(&l, &w)| w * f(l)).sum() };
    // the path runs from delta to iR (upper half)
    let sq = sum(&|l| l * l);
    let exact = (end.powi(3) - start.powi(3)) / 3.0;
    assert!((sq - exact).norm() < 1e-10 * exact.norm());
    let inv = sum(&|l| 1.0 / l);
    let exact = C64::new((big_r / delta).ln(), 0.5 * PI);
    assert!((inv - exact).norm() < 1e-10 * exact.norm());
}

#[test]
fn inverse_laplace_of_simple_pole() {
    let (r, big_r) = (4e-4, 0.4);
    let rule = contour_rule(r, big_r, 256).unwrap();
    let si = |z: f64| composite_gauss(|s| if s == 0.0 { 1.0 } else { s.sin() / s }, 0.0, z, 10, 200);
    for t in [1.0, 10.0, 50.0] {
        let got = inverse_laplace(&rule, |j| 1.0 / rule.nodes[j], t);
        let exact = 0.5 + si(big_r * t) / PI;
        assert!((got - exact).abs() < 1e-8, "t {t}: {got} vs {exact}");
    }
}

#[test]
fn envelope_fit_recovers_gaussian() {
    let xs: Vec<f64> = (0..401).map(|i| -100.0 + 0.5 * i as f64).collect();
    let (t, center): (f64, f64) = (20.0, 3.0);
    let d: Vec<f64> = xs.iter().map(|x| 0.7 / t.sqrt() * (-(x - center).powi(2) / (3.0 * t)).exp()).collect();
    let (cc, m) = fit_envelope(&xs, &d, t, center).unwrap();
    assert!((cc - 0.7).abs() < 0.01 * 0.7, "{cc}");
    assert!((m - 3.0).abs() < 0.01 * 3.0, "{m}");
    for (x, v) in xs.iter().zip(&d) {
        assert!(
            cc / t.sqrt() * (-(x - center).powi(2) / (m * t)).exp() >= v * (1.0 - 1e-9) || *v < 1e-3 * 0.7 / t.sqrt()
        );
    }
}

#[test]
fn scalar_excited_term() {
    let s = hamer02();
    let ex = ExcitedTerm::new(&s).unwrap();
    assert!((ex.beta_minus - 1.0).abs() < 1e-12);
    let shock = &s.frame.profile.shock;
    let jump = shock.u_plus[0] - shock.u_minus[0];
    assert_eq!(ex.incoming_minus.len(), 1);
    let (a, w) = ex.incoming_minus[0];
    assert!((a - shock.u_minus[0]).abs() < 1e-12);
    assert!((w - 1.0 / jump).abs() < 1e-10);
    // all mass ends up in the shift of the profile
    let xs: Vec<f64> = (0..4001).map(|i| -200.0 + 0.1 * i as f64).collect();
    let mass: f64 = xs
        .windows(2)
        .map(|p| 0.05 * (excited_term(&s, &ex, p[0], 1e9, -3.0) + excited_term(&s, &ex, p[1], 1e9, -3.0)))
        .sum();
    assert!((mass - 1.0).abs() < 1e-3, "{mass}");
}

#[test]
fn low_frequency_green_function_hamer() {
    let s = hamer02();
    let mut o = GreenOptions::standard(0.2);
    o.ys = vec![-5.0];
    o.ts = vec![0.1, 50.0];
    o.samples = 64;
    let rep = green_report(&s, &o).unwrap();
    let small_t = rep.samples_grid.iter().filter(|g| g.t == 0.1).map(|g| g.gi.abs()).fold(0.0, f64::max);
    assert!(small_t <= rep.contour_length * rep.max_kernel * (0.5 * o.r * 0.1).exp() / PI);
    assert!(rep.mass_bound[0] < 2.0);
    let fit = rep.envelopes.iter().find(|e| e.t == 50.0).unwrap();
    assert!(fit.c.is_finite() && fit.m.is_finite() && fit.c > 0.0 && fit.m > 0.0);
    // doubling the contour samples
    o.samples = 128;
    let fine = green_report(&s, &o).unwrap();
    let fit2 = fine.envelopes.iter().find(|e| e.t == 50.0).unwrap();
    assert!((fit2.c - fit.c).abs() < 0.2 * fit2.c);
    assert!((fit2.m - fit.m).abs() < 0.2 * fit2.m);
    let peak = fine.samples_grid.iter().map(|g| g.gi.abs()).fold(0.0, f64::max);
    for (a, b) in rep.samples_grid.iter().zip(&fine.samples_grid) {
        assert!((a.gi - b.gi).abs() < 1e-3 * peak);
    }
}

#[test]
fn kernel_is_conjugate_symmetric() {
    let s = hamer02();
    let xs: Vec<f64> = (0..41).map(|i| -10.0 + 0.5 * i as f64).collect();
    let l = C64::new(1e-3, 0.05);
    let a = s.resolvent_kernel(l, -5.0, &xs).unwrap();
    let b = s.resolvent_kernel(l.conj(), -5.0, &xs).unwrap();
    let peak = a.re_values.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    for i in 0..xs.len() {
        for k in 0..a.re_values[i].len() {
            assert!((a.re_values[i][k] - b.re_values[i][k]).abs() < 1e-8 * peak);
            assert!((a.im_values[i][k] + b.im_values[i][k]).abs() < 1e-8 * peak);
        }
    }
    // so the assembled transform has no imaginary part to discard
    let g = low_freq_green_grid(&s, &[0.0], &[10.0], &[-5.0], 4e-4, 0.4, 32).unwrap();
    assert!(g.gi[0][0][0].is_finite());
}
