use std::sync::OnceLock;

use radshock::evans::winding::{scan, small_circle, Circle};
use radshock::evans::{
    check_low_frequency_slope, check_proportionality, winding, EvansOptions, EvansSolver, EvansValue,
};
use radshock::linalg::{c, CMat, C64};
use radshock::model::{ModelSystem, ShockTriple};
use radshock::profile::solve_profile;
use radshock::spectral::{Side, SpectralFrame};

fn hamer(eps: f64) -> EvansSolver {
    let prof = solve_profile(&ModelSystem::hamer(), &ShockTriple::hamer(eps), None, 1e-12).unwrap();
    EvansSolver::new(SpectralFrame::new(prof).unwrap(), &EvansOptions::default()).unwrap()
}

fn hamer02() -> &'static EvansSolver {
    static S: OnceLock<EvansSolver> = OnceLock::new();
    S.get_or_init(|| hamer(0.2))
}

fn euler005() -> &'static EvansSolver {
    static S: OnceLock<EvansSolver> = OnceLock::new();
    S.get_or_init(|| {
        let model = ModelSystem::euler_rad(1.4);
        let shock = ShockTriple::euler(&model, 0.05).unwrap();
        let prof = solve_profile(&model, &shock, None, 1e-12).unwrap();
        EvansSolver::new(SpectralFrame::new(prof).unwrap(), &EvansOptions::default()).unwrap()
    })
}

#[test]
fn scalar_sonic_exponent() {
    let s = hamer02();
    let ux = s.frame.profile.eval(0.0).ux[0];
    for l in [c(0.0), c(3e-3), C64::new(1e-2, -0.02)] {
        let expected = (l + c(1.0 + ux)) / ux.abs();
        let a = s.singular_exponent(l).unwrap();
        assert!((a - expected).norm() < 1e-6 * expected.norm(), "{a} vs {expected}");
        let sp = s.local_basis(l).unwrap();
        assert!((sp.alpha0 - expected).norm() < 1e-6 * expected.norm());
    }
}

#[test]
fn frobenius_series_residuals_shrink() {
    let s = hamer02();
    let sp = s.local_basis(c(1e-3)).unwrap();
    for i in 0..=sp.n() + 1 {
        let r1 = sp.series_residual(i, s.x0);
        let r2 = sp.series_residual(i, 0.5 * s.x0);
        assert!(r1 < 1e-8, "series {i}: {r1:e}");
        assert!(r2 < r1 || r2 < 1e-13, "series {i}: {r2:e} !< {r1:e}");
    }
}

#[test]
fn double_crossing_is_identity() {
    let s = hamer02();
    let sp = s.local_basis(C64::new(2e-3, 1e-3)).unwrap();
    let d = s.dim();
    let cols = CMat::from_fn(d, 2, |i, j| C64::new((i + 2 * j) as f64 * 0.3 + 0.1, 0.2 * j as f64 - 0.1 * i as f64));
    let there = s.cross_singularity(&sp, &cols, Side::Plus).unwrap();
    let back = s.cross_singularity(&sp, &there, Side::Minus).unwrap();
    assert!((back - &cols).norm() < 1e-9 * cols.norm());
}

#[test]
fn fast_mode_connection_is_one() {
    let s = hamer02();
    let sp = s.local_basis(c(1e-3)).unwrap();
    let m = s.connection_constant(&sp).unwrap();
    assert!((m - c(1.0)).norm() < 1e-9, "{m}");
}

#[test]
fn conjugate_symmetry() {
    let s = hamer02();
    let l = C64::new(0.01, 0.05);
    let (a, _) = s.evans_pair(l).unwrap();
    let (b, _) = s.evans_pair(l.conj()).unwrap();
    let (va, vb) = (a.value(), b.value());
    assert!((va - vb.conj()).norm() < 1e-7 * va.norm(), "{va} {vb}");
}

#[test]
fn translational_zero_at_origin() {
    let s = hamer02();
    let d0 = s.evans_d(c(0.0), Side::Minus).unwrap().value();
    let dd = s.derivative_at_zero(Side::Minus, 0.0).unwrap();
    assert!(d0.norm() < 1e-8 * dd.norm() * s.scale(), "D(0) = {d0}, D'(0) = {dd}");
    assert!(dd.norm() > 1e-6 * s.scale());
}

fn synthetic(l: C64, f: impl Fn(C64) -> C64) -> EvansValue {
    EvansValue::new(l, Side::Minus, f(l), 0.0)
}

#[test]
fn scan_counts_synthetic_zeros() {
    let circle = small_circle(0.1);
    let sq = scan(&circle, 32, |l| Ok(vec![synthetic(l, |z| z * z)])).unwrap();
    assert_eq!(sq.winding[0], 2);
    let off = Circle { center: c(0.5), radius: 0.1 };
    let none = scan(&off, 32, |l| Ok(vec![synthetic(l, |z| z * z)])).unwrap();
    assert_eq!(none.winding[0], 0);
    // a zero close to the contour forces refinement
    let near = scan(&circle, 8, |l| Ok(vec![synthetic(l, |z| z - C64::new(0.099, 0.0))])).unwrap();
    assert_eq!(near.winding[0], 1);
    assert!(near.refinements > 0);
}

#[test]
fn scan_is_scale_aware() {
    let circle = small_circle(1.0);
    let scaled = scan(&circle, 64, |l| Ok(vec![EvansValue::new(l, Side::Minus, l, 300.0 * l.re)])).unwrap();
    assert_eq!(scaled.winding[0], 1);
}

#[test]
fn low_frequency_slope_hamer() {
    let r = check_low_frequency_slope(hamer02()).unwrap();
    assert!(r.mismatch < 0.05, "{r:?}");
    assert!(r.halving_change < 0.05);
}

#[test]
fn abel_identity_and_connection_constant() {
    let s = hamer02();
    let r = check_proportionality(s).unwrap();
    let m = C64::new(r.m[0], r.m[1]);
    let m_kp = C64::new(r.m_kp[0], r.m_kp[1]);
    let m_abel = C64::new(r.m_abel[0], r.m_abel[1]);
    assert!((m - m_kp).norm() < 0.01 * m_kp.norm(), "{m} vs {m_kp}");
    assert!((m - m_abel).norm() < 1e-6 * m.norm(), "{m} vs {m_abel}");
}

#[test]
fn proportionality_residual_is_quadratic_for_euler() {
    let s = euler005();
    let r = check_proportionality(s).unwrap();
    assert!(r.residual_order >= 1.8, "{r:?}");
    let m = C64::new(r.m[0], r.m[1]);
    let m_abel = C64::new(r.m_abel[0], r.m_abel[1]);
    assert!((m - m_abel).norm() < 0.01 * m.norm());
}

#[test]
fn resolvent_pole_is_profile_derivative() {
    let s = hamer02();
    let xs: Vec<f64> = (0..=200).map(|i| -20.0 + 0.2 * i as f64).collect();
    for f in [1e-3, 1e-4] {
        let lam = f * s.scale();
        let k = s.resolvent_kernel(c(lam), -1.0, &xs).unwrap();
        assert!(k.jump_error < 1e-8, "jump {:e}", k.jump_error);
        assert!(k.sonic_mismatch < 1e-6, "sonic {:e}", k.sonic_mismatch);
        let col = k.column(0);
        let (mut num, mut na, mut nb) = (0.0, 0.0, 0.0);
        for (i, &x) in xs.iter().enumerate() {
            let p = s.frame.profile.eval(x);
            let w = [p.ux[0], p.p, -p.q];
            for j in 0..3 {
                let a = col[i][j].re * lam;
                num += a * w[j];
                na += a * a;
                nb += w[j] * w[j];
            }
        }
        let corr = num.abs() / (na.sqrt() * nb.sqrt());
        assert!(corr >= 0.98, "lambda {lam:e}: {corr}");
    }
}

#[test]
fn resolvent_mirror_source() {
    let s = hamer02();
    let xs: Vec<f64> = (0..=80).map(|i| -8.0 + 0.2 * i as f64).collect();
    let k = s.resolvent_kernel(C64::new(1e-3, 2e-3), 1.5, &xs).unwrap();
    assert!(k.jump_error < 1e-8);
    assert!(k.sonic_mismatch < 1e-6);
    assert!(s.resolvent_kernel(c(1e-3), 0.5 * s.x0, &xs).is_err());
}

#[test]
fn winding_hamer() {
    let s = hamer02();
    let eps: f64 = 0.2;
    let rep = winding(s, 1e-2 * eps * eps, 2.0 * eps, 256).unwrap();
    assert_eq!(rep.winding_minus, 0);
    assert_eq!(rep.circle_winding_minus, 1);
    assert!(rep.certified);
    let json = serde_json::to_value(&rep).unwrap();
    assert!(json.get("R").is_some() && json.get("dD0").is_some());
}
