use radshock_bench::{hamer_profile, hamer_solver};

#[test]
fn fixtures_build() {
    let p = hamer_profile(0.2);
    assert!(p.first_integral_residual() < 1e-8);
    let s = hamer_solver(0.2);
    assert_eq!(s.dim(), 3);
}
