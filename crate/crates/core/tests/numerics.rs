mod common;

use std::f64::consts::PI;

use proptest::prelude::*;

use common::picard_oracle;
use radshock::linalg::{c, CMat, CVec, RMat, C64};
use radshock::numerics::{
    accumulate_argument, eigenprojection, integrate, integrate_fixed, kato_transport, riccati_reduce, OdeOptions,
    ThetaBlocks,
};

fn ones() -> ThetaBlocks {
    let o = RMat::from_element(1, 1, 1.0);
    ThetaBlocks { t11: o.clone(), t12: o.clone(), t21: o.clone(), t22: o }
}

fn scalar(v: f64) -> RMat {
    RMat::from_element(1, 1, v)
}

#[test]
fn exponential_rotation() {
    let traj =
        integrate(|_, y: &[C64], dy: &mut [C64]| dy[0] = C64::i() * y[0], 0.0, PI, &[c(1.0)], &OdeOptions::default())
            .unwrap();
    let (y, ls) = traj.eval(PI);
    assert!((y[0] * ls.exp() + 1.0).norm() < 1e-9);
    let flat = integrate(|_, _: &[f64], dy: &mut [f64]| dy[0] = 0.0, 0.0, 5.0, &[2.5], &OdeOptions::default()).unwrap();
    assert_eq!(flat.last().0[0], 2.5);
}

#[test]
fn matrix_exponential_closed_form() {
    // A = [[a, 1], [0, a]]: e^{Ax} = e^{ax} [[1, x], [0, 1]]
    let a = C64::new(-0.3, 0.7);
    let x1 = 2.0;
    let f = |_: f64, y: &[C64], dy: &mut [C64]| {
        dy[0] = a * y[0] + y[1];
        dy[1] = a * y[1];
    };
    let y0 = [C64::new(0.2, -1.0), C64::new(1.5, 0.5)];
    let traj = integrate(f, 0.0, x1, &y0, &OdeOptions::default()).unwrap();
    let (y, ls) = traj.eval(x1);
    let e = (a * x1).exp();
    let exact = [e * (y0[0] + y0[1] * x1), e * y0[1]];
    for k in 0..2 {
        assert!((y[k] * ls.exp() - exact[k]).norm() < 1e-9);
    }
}

#[test]
fn fixed_step_order_is_five() {
    let f = |x: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0] * (1.0 + x.cos());
    let exact = (-(2.0 + 2f64.sin())).exp();
    let errs: Vec<f64> =
        [10, 20, 40].iter().map(|&n| (integrate_fixed(f, 0.0, 2.0, &[1.0], n)[0] - exact).abs()).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 5.0).abs() < 0.5, "{errs:?}");
    }
}

#[test]
fn dense_output_hits_requested_points() {
    let traj =
        integrate(|_, y: &[f64], dy: &mut [f64]| dy[0] = y[0], 0.0, 3.0, &[1.0], &OdeOptions::default()).unwrap();
    for x in [0.3, 1.0, 2.2] {
        let (y, ls) = traj.eval(x);
        assert!((y[0] * ls.exp() - x.exp()).abs() < 1e-7 * x.exp());
    }
}

fn family(l: C64) -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0) + l, l * 0.5, c(0.3), c(-1.0) - l * l])
}

#[test]
fn kato_constant_family() {
    let m = CMat::from_row_slice(2, 2, &[c(2.0), c(1.0), c(0.0), c(-1.0)]);
    let v = CVec::from_vec(vec![c(1.0), c(0.0)]);
    let path = [c(0.0), C64::new(0.5, 0.2), c(1.0)];
    let fr = kato_transport(|_| m.clone(), &path, c(2.0), &v, 8).unwrap();
    for w in &fr.vectors {
        assert!((w - &v).norm() < 1e-12);
    }
}

#[test]
fn kato_diagonal_stays_on_axis() {
    let path = [c(-0.5), c(0.0), c(0.8)];
    let v = CVec::from_vec(vec![c(1.0), c(0.0)]);
    let fr =
        kato_transport(|l| CMat::from_row_slice(2, 2, &[l, c(0.0), c(0.0), c(2.0)]), &path, c(-0.5), &v, 16).unwrap();
    for w in &fr.vectors {
        assert!(w[1].norm() < 1e-12 && (w[0] - 1.0).norm() < 1e-12);
    }
}

#[test]
fn kato_loop_round_trip() {
    let n = 24;
    let path: Vec<C64> = (0..=n).map(|k| C64::from_polar(0.4, 2.0 * PI * k as f64 / n as f64)).collect();
    let (mu, p, _) = eigenprojection(&family(path[0]), c(1.4)).unwrap();
    let v: CVec = p.column(0).into_owned();
    let fr = kato_transport(family, &path, mu, &v, 16).unwrap();
    let end = fr.vectors.last().unwrap();
    assert!((end - &fr.vectors[0]).norm() < 1e-8 * v.norm(), "{}", (end - &fr.vectors[0]).norm());
    // every transported vector is an eigenvector
    for (k, w) in fr.vectors.iter().enumerate() {
        let m = family(fr.path[k]);
        let res = (&m * w - w * fr.values[k]).norm();
        assert!(res < 1e-10 * w.norm(), "{res:e}");
    }
}

fn circle(n: usize, f: impl Fn(C64) -> C64) -> Vec<C64> {
    (0..n).map(|k| f(C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))).collect()
}

#[test]
fn argument_counts() {
    assert_eq!(accumulate_argument(&circle(64, |l| l)).unwrap().winding, 1);
    assert_eq!(accumulate_argument(&circle(64, |l| l * l - 0.25)).unwrap().winding, 2);
    assert_eq!(accumulate_argument(&circle(64, |_| C64::new(0.3, -2.0))).unwrap().winding, 0);
    assert!(accumulate_argument(&[c(1.0), c(-1.0)]).is_err());
}

proptest! {
    #[test]
    fn argument_is_parametrization_invariant(warp in 0.0f64..0.9, phase in 0.0f64..6.28, extra in 0usize..64) {
        let n = 96 + extra;
        let f = |l: C64| (l - 0.3) * (l + C64::new(0.1, 0.4)) * (l - 2.0);
        let vals: Vec<C64> = (0..n)
            .map(|k| {
                let s = 2.0 * PI * k as f64 / n as f64;
                let t = s + warp * s.sin() + phase;
                f(C64::from_polar(1.0, t))
            })
            .collect();
        prop_assert_eq!(accumulate_argument(&vals).unwrap().winding, 2);
    }
}

#[test]
fn riccati_unperturbed_is_zero() {
    let r = riccati_reduce(|_| scalar(1.0), |_| scalar(-1.0), |_| 0.0, |_| ones(), (-20.0, 20.0), 101).unwrap();
    assert!(r.phi2_sup == 0.0);
}

#[test]
fn riccati_constant_blocks_match_picard() {
    let r = riccati_reduce(|_| scalar(1.0), |_| scalar(-1.0), |_| 0.1, |_| ones(), (-20.0, 20.0), 4001).unwrap();
    assert!(r.phi2_sup <= 0.1);
    let oracle = picard_oracle(&r.xs);
    let err = r.phi2.iter().zip(&oracle).map(|(p, o)| (p[(0, 0)] - o).abs()).fold(0.0, f64::max);
    assert!(err < 1e-6, "{err:e}");
    assert!(r.invariance_residual < 1e-8);
}

fn varying(scale: f64) -> radshock::numerics::RiccatiReduction {
    let m1 = |x: f64| RMat::from_row_slice(2, 2, &[1.0 + 0.3 * x.tanh(), 0.2, -0.2, 1.5]);
    riccati_reduce(
        m1,
        |_| scalar(-1.0),
        move |x: f64| scale * (1.0 + 0.5 * (0.7 * x).sin()) * (-0.01 * x * x).exp(),
        |_| ThetaBlocks {
            t11: RMat::identity(2, 2),
            t12: RMat::from_element(2, 1, 1.0),
            t21: RMat::from_element(1, 2, 1.0),
            t22: scalar(0.5),
        },
        (-20.0, 20.0),
        801,
    )
    .unwrap()
}

#[test]
fn riccati_sup_and_pointwise_bounds() {
    let r = varying(0.05);
    assert!(r.ratio_sup <= 0.1);
    assert!(r.phi2_sup <= 1.5 * r.ratio_sup, "{} vs {}", r.phi2_sup, r.ratio_sup);
    assert!(r.constant <= 1.5);
    assert!(r.pointwise_constant <= 1.5, "{}", r.pointwise_constant);
    assert!(r.invariance_residual < 1e-8);
}

#[test]
fn riccati_bound_is_linear_in_delta() {
    let a = varying(0.02);
    let b = varying(0.04);
    let slope = (b.phi2_sup / a.phi2_sup).ln() / 2f64.ln();
    assert!((slope - 1.0).abs() < 0.1, "{slope}");
}
