mod common;

use common::shooting_gap;
use radshock::model::{ModelSystem, ShockTriple};
use radshock::profile::{decay_rate, solve_profile, Profile};

fn hamer(eps: f64) -> Profile {
    solve_profile(&ModelSystem::hamer(), &ShockTriple::hamer(eps), None, 1e-12).expect("profile")
}

#[test]
fn hamer_profile_matches_shooting_oracle() {
    let prof = hamer(0.2);
    let (worst, compared) = shooting_gap(&prof);
    assert!(compared > 3000, "only {compared} grid nodes compared");
    assert!(worst <= 1e-7, "sup-norm difference {worst:.3e}");
}

#[test]
fn hamer_first_integral_and_sonic_values() {
    let eps = 0.2;
    let prof = hamer(eps);
    assert!(prof.first_integral_residual() <= 1e-8, "{}", prof.first_integral_residual());
    let i = prof.sonic_index;
    assert_eq!(prof.grid[i], 0.0);
    assert!(prof.u[i][0].abs() < 1e-9, "U(0) = {}", prof.u[i][0]);
    assert!((prof.q[i] - 0.005).abs() < 1e-9, "Q(0) = {}", prof.q[i]);
}

#[test]
fn hamer_far_field_and_tails() {
    let eps = 0.2;
    let prof = hamer(eps);
    let m = prof.grid.len() - 1;
    assert!((prof.u[0][0] - 0.1).abs() <= 1e-6 * eps);
    assert!((prof.u[m][0] + 0.1).abs() <= 1e-6 * eps);
    assert!(prof.q[0].abs() <= 1e-6 * eps * eps);
    assert!(prof.q[m].abs() <= 1e-6 * eps * eps);
    assert!((prof.eta_fit / prof.eta - 1.0).abs() < 0.1, "{} vs {}", prof.eta_fit, prof.eta);
}

#[test]
fn decay_rate_scales_linearly_in_amplitude() {
    let e1 = decay_rate(&hamer(0.1));
    let e2 = decay_rate(&hamer(0.2));
    let e4 = decay_rate(&hamer(0.4));
    assert!((e1 / e2 - 0.5).abs() < 0.125, "{}", e1 / e2);
    assert!((e2 / e4 - 0.5).abs() < 0.125, "{}", e2 / e4);
}

#[test]
fn sonic_slope_is_negative_and_small() {
    let eps = 0.2;
    let prof = hamer(eps);
    let s = prof.sonic_slope();
    // U'^2 + U' + eps^2/8 = 0, small root
    let exact = (-1.0 + (1.0 - 0.5 * eps * eps).sqrt()) / 2.0;
    assert!((s - exact).abs() < 1e-8 * exact.abs().max(1.0), "{s} vs {exact}");
}

#[test]
fn degenerate_shock_rejected() {
    let r = solve_profile(&ModelSystem::hamer(), &ShockTriple::new(vec![0.1], vec![0.1], 1), None, 1e-12);
    assert!(r.is_err());
}

#[test]
fn a_p_decreases_through_the_sonic_point() {
    let prof = hamer(0.1);
    for w in prof.u.windows(2) {
        assert!(w[1][0] <= w[0][0] + 1e-15);
    }
}

#[test]
fn euler_profile_is_monotone_and_conserves_first_integral() {
    let model = ModelSystem::euler_rad(1.4);
    let shock = ShockTriple::euler(&model, 0.05).unwrap();
    let prof = solve_profile(&model, &shock, None, 1e-12).expect("euler profile");
    assert!(prof.first_integral_residual() <= 1e-8);
    let a0 = model.char_speed(&prof.u[prof.sonic_index], 1).unwrap();
    assert!(a0.abs() < 1e-8, "a_1(U(0)) = {a0}");
    assert!(prof.sonic_slope() < 0.0);
}
