//! Low-frequency structure of the Evans functions: the order-one zero at
//! lambda = 0 and the proportionality of D+ and D-.

use serde::{Deserialize, Serialize};

use super::{EvansSolver, SingularPointData};
use crate::error::{Error, Result};
use crate::linalg::{c, CVec, C64};
use crate::numerics::{composite_gauss, line_fit};
use crate::spectral::Side;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlopeReport {
    pub lambdas: Vec<f64>,
    /// fitted D-(lambda) ~ slope * lambda
    pub slope: [f64; 2],
    pub predicted: [f64; 2],
    pub mismatch: f64,
    pub kappa_plus: f64,
    pub kappa_minus: f64,
    pub gamma: f64,
    pub delta: f64,
    pub det_a: f64,
    /// relative change of the fitted slope when the samples are halved
    pub halving_change: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProportionalityReport {
    pub m: [f64; 2],
    pub m_kp: [f64; 2],
    /// Liouville value of D+/D- at the smallest sample
    pub m_abel: [f64; 2],
    pub lambdas: Vec<f64>,
    pub residuals: Vec<f64>,
    pub residual_order: f64,
    /// max |D+ - m D-| / |D+| over the samples
    pub relative_residual: f64,
}

fn pair_of(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Scalar multiple k with v ~ k w in the least-squares sense; returns
/// (k, relative misfit).
fn proportionality(v: &CVec, w: &CVec) -> (C64, f64) {
    let k = w.dotc(v) / c(w.norm_squared());
    let res = (v - w * k).norm() / v.norm();
    (k, res)
}

impl EvansSolver {
    /// Profile derivative (U_x, P, -Q) in flux variables at x.
    fn profile_derivative_flux(&self, x: f64) -> CVec {
        let n = self.frame.n;
        let pt = self.frame.profile.eval(x);
        let au = self.frame.profile.model.jacobian_f(&pt.u) * crate::linalg::RVec::from_column_slice(&pt.ux);
        let mut v = CVec::zeros(n + 2);
        for i in 0..n {
            v[i] = c(au[i]);
        }
        v[n] = c(pt.p);
        v[n + 1] = c(-pt.q);
        v
    }

    /// Liouville factor relating D+ to D-:
    /// D+/D- = -exp(int_{-1}^{1} (tr M - (alpha0+1)/x) dx) det A(U(-1)) / det A(U(1)).
    pub fn abel_ratio(&self, sp: &SingularPointData, lambda: C64) -> C64 {
        let x0 = self.x0;
        let shift = sp.alpha0 + c(1.0);
        let frame = &self.frame;
        let integrand = |x: f64| -> C64 { frame.flux_coefficients(x).at(lambda).trace() - shift / x };
        let mut total = c(0.0);
        for (a, b) in [(-1.0, -x0), (x0, 1.0)] {
            let re = composite_gauss(|x| integrand(x).re, a, b, 10, 64);
            let im = composite_gauss(|x| integrand(x).im, a, b, 10, 64);
            total += C64::new(re, im);
        }
        // (tr R(x) - tr R(0))/x on [-x0, x0]: odd powers integrate to zero
        for (j, r) in sp.r.iter().enumerate().skip(1) {
            if j % 2 == 1 {
                total += r.trace() * c(2.0 * x0.powi(j as i32) / j as f64);
            }
        }
        -total.exp() * c(self.det_a_at(-1.0) / self.det_a_at(1.0))
    }

    pub(crate) fn det_a_at(&self, y: f64) -> f64 {
        self.frame.profile.model.jacobian_f(&self.frame.profile.eval(y).u).determinant()
    }
}

fn fit_through_origin(lams: &[f64], ds: &[C64]) -> C64 {
    let num: C64 = lams.iter().zip(ds).map(|(l, d)| d * *l).sum();
    let den: f64 = lams.iter().map(|l| l * l).sum();
    num / den
}

/// Compare the fitted slope of D-(lambda) at 0 with kappa kappa' gamma
/// Delta / det A(U(-1)) (scalar systems).
pub fn check_low_frequency_slope(solver: &EvansSolver) -> Result<SlopeReport> {
    let frame = &solver.frame;
    if frame.n != 1 {
        return Err(Error::InvalidInput("the low-frequency slope check is implemented for scalar models".into()));
    }
    let scale = solver.scale();
    let lambdas: Vec<f64> = [1e-4, 3e-4, 1e-3].iter().map(|f| f * scale).collect();
    let values = |ls: &[f64]| -> Result<Vec<C64>> {
        ls.iter().map(|&l| solver.evans_d(c(l), Side::Minus).map(|v| v.value())).collect()
    };
    let ds = values(&lambdas)?;
    let slope = fit_through_origin(&lambdas, &ds);
    let half: Vec<f64> = lambdas.iter().map(|l| 0.5 * l).collect();
    let slope_half = fit_through_origin(&half, &values(&half)?);

    let zero = c(0.0);
    let plus = solver.decaying_wedge(Side::Plus, zero, &[1.0])?;
    let minus = solver.decaying_wedge(Side::Minus, zero, &[-1.0])?;
    let (kp, res_p) = proportionality(&plus[0].v, &solver.profile_derivative_flux(1.0));
    let (km, res_m) = proportionality(&minus[0].v, &solver.profile_derivative_flux(-1.0));
    if res_p > 1e-5 || res_m > 1e-5 {
        return Err(Error::InvalidInput(format!(
            "decaying solutions at lambda = 0 are not parallel to the profile derivative ({res_p:e}, {res_m:e})"
        )));
    }
    let kappa_plus = (kp * plus[0].log_scale.exp()).re;
    let kappa_minus = (km * minus[0].log_scale.exp()).re;
    let sp = solver.local_basis(zero)?;
    let fast = solver.fast_mode(&sp, zero, Side::Minus, -1.0)?;
    let n = frame.n;
    let pt = frame.profile.eval(-1.0);
    let fq = (fast.v[n] * fast.log_scale.exp()).re;
    let fp = (fast.v[n + 1] * fast.log_scale.exp()).re;
    let gamma = pt.p * fp + pt.q * fq;
    let delta = frame.profile.shock.u_minus[0] - frame.profile.shock.u_plus[0];
    let det_a = solver.det_a_at(-1.0);
    let predicted = c(kappa_plus * kappa_minus * gamma * delta / det_a);
    let mismatch = (slope - predicted).norm() / predicted.norm();
    Ok(SlopeReport {
        lambdas,
        slope: pair_of(slope),
        predicted: pair_of(predicted),
        mismatch,
        kappa_plus,
        kappa_minus,
        gamma,
        delta,
        det_a,
        halving_change: (slope_half - slope).norm() / slope.norm(),
    })
}

/// Fit D+ = m D- at the smallest sample and measure the order of
/// |D+ - m D-| over lambda in [1e-4, 1e-2] scale.
pub fn check_proportionality(solver: &EvansSolver) -> Result<ProportionalityReport> {
    let scale = solver.scale();
    let lambdas: Vec<f64> = (0..9).map(|k| scale * 1e-4 * 10f64.powf(k as f64 * 0.25)).collect();
    let pairs: Vec<(C64, C64)> =
        lambdas.iter().map(|&l| solver.evans_pair(c(l)).map(|(m, p)| (m.value(), p.value()))).collect::<Result<_>>()?;
    let m = pairs[0].1 / pairs[0].0;
    if m.norm() < 1e-10 {
        return Err(Error::InvalidInput("D+ / D- vanishes".into()));
    }
    let residuals: Vec<f64> = pairs.iter().map(|(dm, dp)| (dp - m * dm).norm()).collect();
    let relative_residual = pairs.iter().zip(&residuals).map(|((_, dp), r)| r / dp.norm()).fold(0.0, f64::max);
    let xs: Vec<f64> = lambdas[1..].iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = residuals[1..].iter().map(|r| r.max(1e-300).ln()).collect();
    let residual_order = line_fit(&xs, &ys).slope;
    let sp = solver.local_basis(c(lambdas[0]))?;
    let m_kp = solver.connection_constant(&sp)?;
    let m_abel = solver.abel_ratio(&sp, c(lambdas[0]));
    Ok(ProportionalityReport {
        m: pair_of(m),
        m_kp: pair_of(m_kp),
        m_abel: pair_of(m_abel),
        lambdas,
        residuals,
        residual_order,
        relative_residual,
    })
}
