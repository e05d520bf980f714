//! Frobenius solutions at the sonic point.
//!
//! In flux variables V = (A u, q, p) the eigenvalue system reads
//! x V' = R(x, lambda) V with R analytic,
//!
//! ```text
//! R = [ -(lambda + LB) E   0   x L ]
//!     [        B E         0   -x  ]      E(x) = x A(U(x))^{-1}.
//!     [         0         -x    0  ]
//! ```
//!
//! R(0) has rank one: the indicial exponents are 0 (n+1 times) and
//! alpha0 + 1. The fast solution is x |x|^alpha0 G(x) with G analytic.

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec, RMat, RVec, C64};
use crate::numerics::{chebyshev_nodes, taylor_fit};
use crate::spectral::SpectralFrame;

/// Taylor coefficients of E(x) and B(x)^T E(x) at the sonic point.
#[derive(Debug, Clone)]
pub struct SonicTaylor {
    pub x0: f64,
    pub e: Vec<RMat>,
    pub be: Vec<RVec>,
    pub l: RVec,
}

const FIT_NODES: usize = 32;
const FIT_DEGREE: usize = 14;

impl SonicTaylor {
    pub fn new(frame: &SpectralFrame, x0: f64) -> Self {
        let n = frame.n;
        let model = &frame.profile.model;
        let xs = chebyshev_nodes(FIT_NODES, -x0, x0);
        let mut e_samples = vec![vec![0.0; xs.len()]; n * n];
        let mut be_samples = vec![vec![0.0; xs.len()]; n];
        for (k, &x) in xs.iter().enumerate() {
            let u = frame.profile.eval(x).u;
            let ainv = model.jacobian_f(&u).try_inverse().expect("A invertible off the sonic point");
            let e = ainv * x;
            let be = e.transpose() * model.jacobian_b(&u);
            for i in 0..n {
                for j in 0..n {
                    e_samples[i * n + j][k] = e[(i, j)];
                }
                be_samples[i][k] = be[i];
            }
        }
        let ec: Vec<Vec<f64>> = e_samples.iter().map(|s| taylor_fit(&xs, s, FIT_DEGREE, x0)).collect();
        let bc: Vec<Vec<f64>> = be_samples.iter().map(|s| taylor_fit(&xs, s, FIT_DEGREE, x0)).collect();
        let e = (0..=FIT_DEGREE).map(|d| RMat::from_fn(n, n, |i, j| ec[i * n + j][d])).collect();
        let be = (0..=FIT_DEGREE).map(|d| RVec::from_fn(n, |i, _| bc[i][d])).collect();
        SonicTaylor { x0, e, be, l: model.l_vec() }
    }

    pub fn n(&self) -> usize {
        self.l.len()
    }

    /// Coefficient R_j of x^j in R(x, lambda).
    pub fn r_coeff(&self, j: usize, lambda: C64) -> CMat {
        let n = self.n();
        let mut r = CMat::zeros(n + 2, n + 2);
        if j < self.e.len() {
            let e = &self.e[j];
            let be = &self.be[j];
            for i in 0..n {
                for k in 0..n {
                    r[(i, k)] = -lambda * e[(i, k)] - c(self.l[i] * be[k]);
                }
                r[(n, i)] = c(be[i]);
            }
        }
        if j == 1 {
            for i in 0..n {
                r[(i, n + 1)] = c(self.l[i]);
            }
            r[(n, n + 1)] = c(-1.0);
            r[(n + 1, n)] = c(-1.0);
        }
        r
    }
}

/// Local solutions at the sonic point for one lambda.
#[derive(Debug, Clone)]
pub struct SingularPointData {
    pub x0: f64,
    pub alpha0: C64,
    /// coefficients of G(x) = sum V_m x^m; the fast solution is x |x|^alpha0 G
    pub fast_series: Vec<CVec>,
    /// n+1 analytic solutions, each as coefficient vectors in x
    pub slow_series: Vec<Vec<CVec>>,
    pub ap_prime0: f64,
    pub(crate) r: Vec<CMat>,
}

fn eval_series(coef: &[CVec], x: f64) -> CVec {
    let mut out = coef[coef.len() - 1].clone();
    for m in (0..coef.len() - 1).rev() {
        out = out * c(x) + &coef[m];
    }
    out
}

fn eval_series_derivative(coef: &[CVec], x: f64) -> CVec {
    let mut out = CVec::zeros(coef[0].len());
    for m in (1..coef.len()).rev() {
        out = out * c(x) + &coef[m] * c(m as f64);
    }
    out
}

fn solve_shifted(r0: &CMat, shift: C64, rhs: &CVec) -> Result<CVec> {
    let d = r0.nrows();
    let m = CMat::identity(d, d) * shift - r0;
    let sv = m.clone().singular_values();
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin < 1e-10 {
        return Err(Error::NearResonance(smin));
    }
    m.lu().solve(rhs).ok_or(Error::NearResonance(0.0))
}

/// Frobenius series of order `order` at the sonic point.
pub fn local_basis(
    taylor: &SonicTaylor,
    frame: &SpectralFrame,
    lambda: C64,
    order: usize,
) -> Result<SingularPointData> {
    let n = taylor.n();
    let d = n + 2;
    let r: Vec<CMat> = (0..=order).map(|j| taylor.r_coeff(j, lambda)).collect();
    let r0 = &r[0];
    let alpha0 = r0.trace() - c(1.0);
    if alpha0.re <= 0.0 {
        return Err(Error::Degeneracy {
            hypothesis: "H2".into(),
            detail: format!("Re alpha0 = {} is not positive", alpha0.re),
        });
    }
    for m in 0..=order + 1 {
        if (alpha0 - c(m as f64)).norm() <= 0.05 {
            return Err(Error::Resonance { alpha0: alpha0.re, m });
        }
    }

    // rank one: R0 = v rho^T with rho proportional to l_p on the A u block
    let mut col = 0;
    for j in 0..n {
        if r0.column(j).norm() > r0.column(col).norm() {
            col = j;
        }
    }
    let mut v0: CVec = r0.column(col).into_owned();
    let e0 = &taylor.e[0];
    let mut row = 0;
    for i in 0..n {
        if e0.row(i).norm() > e0.row(row).norm() {
            row = i;
        }
    }
    let mut rho = CVec::zeros(d);
    for j in 0..n {
        rho[j] = c(e0[(row, j)]);
    }
    let rn = rho.norm();
    rho /= c(rn);
    // normalize the fast vector by its rho component
    let s = rho.dot(&v0);
    v0 /= s;

    let mut fast = vec![v0];
    for m in 1..=order {
        let mut rhs = CVec::zeros(d);
        for j in 1..=m {
            rhs += &r[j] * &fast[m - j];
        }
        fast.push(solve_shifted(r0, alpha0 + c(1.0 + m as f64), &rhs)?);
    }

    // kernel of R0: q and p slots plus the A u directions annihilated by rho
    let (_, right, _) = frame.diagonalizers(0.0)?;
    let mut kernel: Vec<CVec> = Vec::with_capacity(n + 1);
    for j in 0..n {
        if j == frame.p - 1 {
            continue;
        }
        let mut w = CVec::zeros(d);
        for i in 0..n {
            w[i] = c(right[(i, j)]);
        }
        let t = rho.dot(&w);
        w -= &rho.conjugate() * t;
        kernel.push(w);
    }
    for k in [n, n + 1] {
        let mut w = CVec::zeros(d);
        w[k] = c(1.0);
        kernel.push(w);
    }
    let mut slow = Vec::with_capacity(n + 1);
    for w0 in kernel {
        let mut s = vec![w0];
        for m in 1..=order {
            let mut rhs = CVec::zeros(d);
            for j in 1..=m {
                rhs += &r[j] * &s[m - j];
            }
            s.push(solve_shifted(r0, c(m as f64), &rhs)?);
        }
        slow.push(s);
    }
    Ok(SingularPointData { x0: taylor.x0, alpha0, fast_series: fast, slow_series: slow, ap_prime0: frame.ap_prime0, r })
}

impl SingularPointData {
    pub fn n(&self) -> usize {
        self.slow_series.len() - 1
    }

    /// G(x); the fast solution is x |x|^alpha0 G(x).
    pub fn fast_g(&self, x: f64) -> CVec {
        eval_series(&self.fast_series, x)
    }

    pub fn slow(&self, i: usize, x: f64) -> CVec {
        eval_series(&self.slow_series[i], x)
    }

    /// Columns (slow_1, ..., slow_{n+1}, G) at x.
    pub fn local_matrix(&self, x: f64) -> CMat {
        let d = self.n() + 2;
        let mut z = CMat::zeros(d, d);
        for i in 0..d - 1 {
            z.set_column(i, &self.slow(i, x));
        }
        z.set_column(d - 1, &self.fast_g(x));
        z
    }

    fn r_at(&self, x: f64) -> CMat {
        let mut out = self.r[self.r.len() - 1].clone();
        for m in (0..self.r.len() - 1).rev() {
            out = out * c(x) + &self.r[m];
        }
        out
    }

    /// Relative residual of x V' = R V for the truncated slow series i
    /// (i = n+1 selects the fast solution, through x G' = (R - alpha0 - 1) G).
    pub fn series_residual(&self, i: usize, x: f64) -> f64 {
        let rx = self.r_at(x);
        if i <= self.n() {
            let v = self.slow(i, x);
            let dv = eval_series_derivative(&self.slow_series[i], x);
            ((dv * c(x)) - &rx * &v).norm() / v.norm()
        } else {
            let g = self.fast_g(x);
            let dg = eval_series_derivative(&self.fast_series, x);
            let lhs = dg * c(x) + &g * (self.alpha0 + c(1.0));
            (lhs - &rx * &g).norm() / g.norm()
        }
    }
}
