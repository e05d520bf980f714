//! Invariant-graph reduction for block systems W' = (M + delta*Theta) W with
//! a spectral gap between the blocks M1 (dominant) and M2.

use nalgebra::SymmetricEigen;

use super::ode::{integrate, OdeOptions};
use crate::error::{Error, Result};
use crate::linalg::RMat;

#[derive(Debug, Clone)]
pub struct ThetaBlocks {
    pub t11: RMat,
    pub t12: RMat,
    pub t21: RMat,
    pub t22: RMat,
}

#[derive(Debug, Clone)]
pub struct RiccatiReduction {
    pub xs: Vec<f64>,
    pub phi2: Vec<RMat>,
    pub eta_gap: Vec<f64>,
    pub delta: Vec<f64>,
    pub delta_sup: f64,
    /// sup over the grid of delta / eta
    pub ratio_sup: f64,
    pub phi2_sup: f64,
    /// sup|Phi2| / sup(delta/eta)
    pub constant: f64,
    /// the comparison function int e^{-int eta} delta
    pub pointwise: Vec<f64>,
    /// max over the grid of |Phi2(x)| / pointwise(x)
    pub pointwise_constant: f64,
    /// reduced flow on the graph, M1 + delta (Theta11 + Theta12 Phi2)
    pub flow1: Vec<RMat>,
    /// change of Phi2 under a tighter re-integration
    pub invariance_residual: f64,
}

fn sym_extreme(m: &RMat, largest: bool) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    let ev = SymmetricEigen::new(s).eigenvalues;
    if largest {
        ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    } else {
        ev.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

fn solve_graph<M1, M2, D, T>(
    m1: &M1,
    m2: &M2,
    delta: &D,
    theta: &T,
    span: (f64, f64),
    k1: usize,
    k2: usize,
    rtol: f64,
) -> Result<super::ode::Trajectory<f64>>
where
    M1: Fn(f64) -> RMat,
    M2: Fn(f64) -> RMat,
    D: Fn(f64) -> f64,
    T: Fn(f64) -> ThetaBlocks,
{
    let n = k2 * k1;
    let rhs = |x: f64, y: &[f64], dy: &mut [f64]| {
        let phi = RMat::from_column_slice(k2, k1, &y[..n]);
        let a = m1(x);
        let b = m2(x);
        let d = delta(x);
        let th = theta(x);
        let out = &b * &phi - &phi * &a + (&th.t21 + &th.t22 * &phi - &phi * &th.t11 - &phi * &th.t12 * &phi) * d;
        dy[..n].copy_from_slice(out.as_slice());
        let eta = sym_extreme(&a, false) - sym_extreme(&b, true);
        dy[n] = -eta * y[n] + d;
    };
    let y0 = vec![0.0; n + 1];
    integrate(rhs, span.0, span.1, &y0, &OdeOptions::tol(rtol, rtol * 1e-2))
}

/// Integrate the graph equation from Phi2(x_span.0) = 0 and certify the
/// sup bound. `samples` output nodes are spread uniformly over the span.
pub fn riccati_reduce<M1, M2, D, T>(
    m1: M1,
    m2: M2,
    delta: D,
    theta: T,
    span: (f64, f64),
    samples: usize,
) -> Result<RiccatiReduction>
where
    M1: Fn(f64) -> RMat,
    M2: Fn(f64) -> RMat,
    D: Fn(f64) -> f64,
    T: Fn(f64) -> ThetaBlocks,
{
    let a0 = m1(span.0);
    let b0 = m2(span.0);
    let (k1, k2) = (a0.nrows(), b0.nrows());
    let n = k1 * k2;
    let traj = solve_graph(&m1, &m2, &delta, &theta, span, k1, k2, 1e-11)?;
    let fine = solve_graph(&m1, &m2, &delta, &theta, span, k1, k2, 1e-13)?;
    let samples = samples.max(2);
    let mut r = RiccatiReduction {
        xs: Vec::with_capacity(samples),
        phi2: Vec::with_capacity(samples),
        eta_gap: Vec::with_capacity(samples),
        delta: Vec::with_capacity(samples),
        delta_sup: 0.0,
        ratio_sup: 0.0,
        phi2_sup: 0.0,
        constant: 0.0,
        pointwise: Vec::with_capacity(samples),
        pointwise_constant: 0.0,
        flow1: Vec::with_capacity(samples),
        invariance_residual: 0.0,
    };
    for i in 0..samples {
        let x = span.0 + (span.1 - span.0) * i as f64 / (samples - 1) as f64;
        let (y, _) = traj.eval(x);
        let (yf, _) = fine.eval(x);
        let phi = RMat::from_column_slice(k2, k1, &y[..n]);
        let phif = RMat::from_column_slice(k2, k1, &yf[..n]);
        r.invariance_residual = r.invariance_residual.max((&phi - &phif).norm());
        let a = m1(x);
        let b = m2(x);
        let eta = sym_extreme(&a, false) - sym_extreme(&b, true);
        if eta <= 0.0 {
            return Err(Error::InvalidInput(format!("no spectral gap at x = {x}")));
        }
        let d = delta(x);
        let th = theta(x);
        r.flow1.push(&a + (&th.t11 + &th.t12 * &phi) * d);
        r.delta_sup = r.delta_sup.max(d.abs());
        r.ratio_sup = r.ratio_sup.max(d.abs() / eta);
        let pn = phi.norm();
        r.phi2_sup = r.phi2_sup.max(pn);
        if y[n] > 0.0 {
            r.pointwise_constant = r.pointwise_constant.max(pn / y[n]);
        }
        r.pointwise.push(y[n]);
        r.xs.push(x);
        r.phi2.push(phi);
        r.eta_gap.push(eta);
        r.delta.push(d);
    }
    if r.ratio_sup > 0.0 {
        r.constant = r.phi2_sup / r.ratio_sup;
        if r.phi2_sup > 10.0 * r.ratio_sup {
            return Err(Error::GapViolation { sup: r.phi2_sup, bound: 10.0 * r.ratio_sup });
        }
    } else if r.phi2_sup > 0.0 {
        return Err(Error::GapViolation { sup: r.phi2_sup, bound: 0.0 });
    }
    Ok(r)
}
