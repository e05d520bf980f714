//! Eigenvalue system around the profile.
//!
//! With W = (u, q, p) the linearized equations read
//!
//! ```text
//! (A u)' = -(lambda + LB) u + L p,   q' = B u - p,   p' = -q,
//! ```
//!
//! i.e. Theta W' = AA(x, lambda) W with Theta = diag(A, 1, 1). Away from
//! the sonic point the flux variables V = Theta W satisfy the regular
//! system V' = M(x, lambda) V, which is what the Evans code integrates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, eig, eig_real, to_complex, CMat, RMat, C64};
use crate::profile::Profile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Minus => -1.0,
            Side::Plus => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeClass {
    SlowStable,
    SlowUnstable,
    FastStable,
    FastUnstable,
}

#[derive(Debug, Clone)]
pub struct AsymptoticModes {
    pub side: Side,
    pub lambda: C64,
    /// sorted by real part
    pub mu: Vec<C64>,
    /// eigenvectors as columns, same order as `mu`
    pub v: CMat,
    pub class: Vec<ModeClass>,
}

impl AsymptoticModes {
    pub fn stable_count(&self) -> usize {
        self.class.iter().filter(|c| matches!(c, ModeClass::SlowStable | ModeClass::FastStable)).count()
    }
    pub fn unstable_count(&self) -> usize {
        self.mu.len() - self.stable_count()
    }
}

/// Coefficient maps of the eigenvalue problem for one profile.
#[derive(Debug, Clone)]
pub struct SpectralFrame {
    pub profile: Profile,
    pub n: usize,
    pub p: usize,
    /// amplitude-based reference scale eps^2
    pub scale: f64,
    /// a_p'(0) < 0
    pub ap_prime0: f64,
    ref_plus: CMat,
    ref_minus: CMat,
}

/// Blocks of M(x, lambda) = m0 + lambda m1 in flux variables.
#[derive(Debug, Clone)]
pub struct FluxCoefficients {
    pub m0: CMat,
    pub m1: CMat,
}

impl FluxCoefficients {
    pub fn at(&self, lambda: C64) -> CMat {
        &self.m0 + &self.m1 * lambda
    }
}

pub fn assemble(profile: &Profile) -> Result<SpectralFrame> {
    SpectralFrame::new(profile.clone())
}

impl SpectralFrame {
    pub fn new(profile: Profile) -> Result<Self> {
        let n = profile.n();
        let p = profile.shock.p;
        let eps = profile.epsilon();
        let ap_prime0 = profile.sonic_slope();
        if !(ap_prime0 < 0.0) {
            return Err(Error::Degeneracy { hypothesis: "H2".into(), detail: format!("a_p'(0) = {ap_prime0}") });
        }
        let mut frame = SpectralFrame {
            profile,
            n,
            p,
            scale: eps * eps,
            ap_prime0,
            ref_plus: CMat::zeros(0, 0),
            ref_minus: CMat::zeros(0, 0),
        };
        let lref = c(frame.scale);
        frame.ref_plus = frame.mode_vectors(Side::Plus, lref)?;
        frame.ref_minus = frame.mode_vectors(Side::Minus, lref)?;
        Ok(frame)
    }

    pub fn dim(&self) -> usize {
        self.n + 2
    }

    /// Number of columns decaying at +infinity (Phi+) and at -infinity (Phi-).
    pub fn k_plus(&self) -> usize {
        self.n - self.p + 1
    }
    pub fn k_minus(&self) -> usize {
        self.p
    }

    pub fn end_state(&self, side: Side) -> &[f64] {
        match side {
            Side::Minus => &self.profile.shock.u_minus,
            Side::Plus => &self.profile.shock.u_plus,
        }
    }

    pub fn theta(&self, x: f64) -> RMat {
        let n = self.n;
        let a = self.profile.model.jacobian_f(&self.profile.eval(x).u);
        let mut t = RMat::identity(n + 2, n + 2);
        t.view_mut((0, 0), (n, n)).copy_from(&a);
        t
    }

    /// d/dx A(U(x)) by a directional difference along U_x.
    fn a_prime(&self, u: &[f64], ux: &[f64]) -> RMat {
        let h = 1e-6 * (1.0 + u.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        let nrm = ux.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nrm == 0.0 {
            return RMat::zeros(self.n, self.n);
        }
        let up: Vec<f64> = u.iter().zip(ux).map(|(a, d)| a + h * d / nrm).collect();
        let um: Vec<f64> = u.iter().zip(ux).map(|(a, d)| a - h * d / nrm).collect();
        let m = &self.profile.model;
        (m.jacobian_f(&up) - m.jacobian_f(&um)) * (nrm / (2.0 * h))
    }

    /// AA(x, lambda) of Theta W' = AA W, W = (u, q, p).
    pub fn a_mat(&self, x: f64, lambda: C64) -> CMat {
        let n = self.n;
        let pt = self.profile.eval(x);
        let model = &self.profile.model;
        let lb = model.lb(&pt.u);
        let ap = self.a_prime(&pt.u, &pt.ux);
        let b = model.jacobian_b(&pt.u);
        let l = model.l_vec();
        let mut m = CMat::zeros(n + 2, n + 2);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = c(-lb[(i, j)] - ap[(i, j)]);
            }
            m[(i, i)] -= lambda;
            m[(i, n + 1)] = c(l[i]);
            m[(n, i)] = c(b[i]);
        }
        m[(n, n + 1)] = c(-1.0);
        m[(n + 1, n)] = c(-1.0);
        m
    }

    /// Flux-variable coefficients at x (x away from the sonic point).
    pub fn flux_coefficients(&self, x: f64) -> FluxCoefficients {
        let u = self.profile.eval(x).u;
        self.flux_coefficients_at_state(&u)
    }

    pub fn flux_coefficients_at_state(&self, u: &[f64]) -> FluxCoefficients {
        let n = self.n;
        let model = &self.profile.model;
        let a = model.jacobian_f(u);
        let ainv = a.try_inverse().unwrap_or_else(|| RMat::from_element(n, n, f64::NAN));
        let lb = model.lb(u);
        let b = model.jacobian_b(u);
        let l = model.l_vec();
        let top = -(&lb * &ainv);
        let bai = b.transpose() * &ainv;
        let mut m0 = CMat::zeros(n + 2, n + 2);
        let mut m1 = CMat::zeros(n + 2, n + 2);
        for i in 0..n {
            for j in 0..n {
                m0[(i, j)] = c(top[(i, j)]);
                m1[(i, j)] = c(-ainv[(i, j)]);
            }
            m0[(i, n + 1)] = c(l[i]);
            m0[(n, i)] = c(bai[(0, i)]);
        }
        m0[(n, n + 1)] = c(-1.0);
        m0[(n + 1, n)] = c(-1.0);
        FluxCoefficients { m0, m1 }
    }

    /// Limiting matrix AA_pm(lambda) of W' = AA_pm W in (u, q, p).
    pub fn asymptotic_matrix(&self, side: Side, lambda: C64) -> CMat {
        let n = self.n;
        let u = self.end_state(side);
        let model = &self.profile.model;
        let ainv = to_complex(&model.jacobian_f(u).try_inverse().expect("hyperbolic endpoint"));
        let lb = to_complex(&model.lb(u));
        let b = model.jacobian_b(u);
        let l = model.l_vec().map(c);
        let shifted = &lb + CMat::identity(n, n) * lambda;
        let top = -(&ainv * shifted);
        let al = &ainv * l;
        let mut m = CMat::zeros(n + 2, n + 2);
        m.view_mut((0, 0), (n, n)).copy_from(&top);
        for i in 0..n {
            m[(i, n + 1)] = al[i];
            m[(n, i)] = c(b[i]);
        }
        m[(n, n + 1)] = c(-1.0);
        m[(n + 1, n)] = c(-1.0);
        m
    }

    /// Analytic-continuation test "Re mu < 0" for each exponent. For
    /// Re lambda >= 0 this is the sign of Re mu; for Re lambda < 0 the n
    /// slow exponents are labeled by the sign of a_j = -lambda/mu.
    fn negative_branch(&self, lambda: C64, mu: &[C64]) -> Result<Vec<bool>> {
        let n = self.n;
        if lambda.re >= 0.0 && lambda.norm() > 0.0 {
            let mut out = Vec::with_capacity(mu.len());
            for m in mu {
                if m.re.abs() < 1e-13 * m.norm().max(1.0) {
                    return Err(Error::ConsistentSplitting { re: lambda.re, im: lambda.im });
                }
                out.push(m.re < 0.0);
            }
            return Ok(out);
        }
        let mut idx: Vec<usize> = (0..mu.len()).collect();
        idx.sort_by(|&a, &b| mu[a].norm().partial_cmp(&mu[b].norm()).unwrap());
        let mut out: Vec<bool> = mu.iter().map(|m| m.re < 0.0).collect();
        for &i in idx.iter().take(n) {
            if lambda.norm() > 0.0 && mu[i].norm() > 0.0 {
                out[i] = (-lambda / mu[i]).re > 0.0;
            }
        }
        Ok(out)
    }

    pub fn asymptotic_modes(&self, side: Side, lambda: C64) -> Result<AsymptoticModes> {
        let m = self.asymptotic_matrix(side, lambda);
        let e = eig(&m)?;
        let mut idx: Vec<usize> = (0..e.values.len()).collect();
        idx.sort_by(|&a, &b| e.values[a].re.partial_cmp(&e.values[b].re).unwrap());
        let mu: Vec<C64> = idx.iter().map(|&i| e.values[i]).collect();
        let v = CMat::from_fn(m.nrows(), m.nrows(), |r, col| e.right[(r, idx[col])]);
        let lam = if lambda.norm() == 0.0 { c(1e-8 * self.scale) } else { lambda };
        let neg = if lambda.norm() == 0.0 {
            // label the coalesced slow exponents through a nearby real lambda
            let shifted = self.asymptotic_modes(side, lam)?;
            mu.iter()
                .map(|m| {
                    let j = (0..shifted.mu.len())
                        .min_by(|&a, &b| (shifted.mu[a] - m).norm().partial_cmp(&(shifted.mu[b] - m).norm()).unwrap())
                        .unwrap();
                    matches!(shifted.class[j], ModeClass::SlowStable | ModeClass::FastStable)
                })
                .collect()
        } else {
            self.negative_branch(lambda, &mu)?
        };
        let mut order: Vec<usize> = (0..mu.len()).collect();
        order.sort_by(|&a, &b| mu[a].norm().partial_cmp(&mu[b].norm()).unwrap());
        let mut slow = vec![false; mu.len()];
        for &i in order.iter().take(self.n) {
            slow[i] = true;
        }
        let class = (0..mu.len())
            .map(|i| match (slow[i], neg[i]) {
                (true, true) => ModeClass::SlowStable,
                (true, false) => ModeClass::SlowUnstable,
                (false, true) => ModeClass::FastStable,
                (false, false) => ModeClass::FastUnstable,
            })
            .collect();
        Ok(AsymptoticModes { side, lambda, mu, v, class })
    }

    /// (dim U+, dim S+, dim U-, dim S-) counted by the sign of Re mu.
    pub fn mode_counts(&self, lambda: C64) -> Result<(usize, usize, usize, usize)> {
        let p = self.asymptotic_modes(Side::Plus, lambda)?;
        let m = self.asymptotic_modes(Side::Minus, lambda)?;
        Ok((p.unstable_count(), p.stable_count(), m.unstable_count(), m.stable_count()))
    }

    /// Selection of the modes decaying toward the far field on `side`.
    fn decaying(side: Side, neg: bool) -> bool {
        match side {
            Side::Plus => neg,
            Side::Minus => !neg,
        }
    }

    fn projection_raw(&self, side: Side, lambda: C64) -> Result<(CMat, C64)> {
        let m = self.asymptotic_matrix(side, lambda);
        let e = eig(&m)?;
        let neg = self.negative_branch(lambda, &e.values)?;
        let d = m.nrows();
        let mut p = CMat::zeros(d, d);
        let mut tr = c(0.0);
        let want = match side {
            Side::Plus => self.k_plus(),
            Side::Minus => self.k_minus(),
        };
        let mut count = 0;
        for j in 0..d {
            if Self::decaying(side, neg[j]) {
                p += e.right.column(j) * e.left.row(j);
                tr += e.values[j];
                count += 1;
            }
        }
        if count != want {
            return Err(Error::ConsistentSplitting { re: lambda.re, im: lambda.im });
        }
        Ok((p, tr))
    }

    /// Spectral projection onto the decaying subspace on `side`, analytic in
    /// lambda, and the sum of the selected exponents. At lambda = 0 the slow
    /// exponents coalesce at 0; their limiting eigenvectors are (r_j, 0, B r_j)
    /// with r_j the eigenvectors of A, labeled by the sign of a_j.
    pub fn decaying_projection(&self, side: Side, lambda: C64) -> Result<(CMat, C64)> {
        if lambda.norm() >= 1e-12 * self.scale {
            return self.projection_raw(side, lambda);
        }
        let n = self.n;
        let d = n + 2;
        let u = self.end_state(side);
        let model = &self.profile.model;
        let ea = eig_real(&model.jacobian_f(u))?;
        let b = model.jacobian_b(u);
        let m = self.asymptotic_matrix(side, c(0.0));
        let e = eig(&m)?;
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| e.values[j].norm().partial_cmp(&e.values[i].norm()).unwrap());
        let mut basis = CMat::zeros(d, d);
        let mut neg = vec![false; d];
        let mut mu = vec![c(0.0); d];
        for (k, &i) in order.iter().take(2).enumerate() {
            basis.set_column(k, &e.right.column(i));
            neg[k] = e.values[i].re < 0.0;
            mu[k] = e.values[i];
        }
        for j in 0..n {
            let r = ea.right.column(j);
            for i in 0..n {
                basis[(i, 2 + j)] = c(r[i]);
            }
            basis[(n + 1, 2 + j)] = c(b.dot(&r));
            neg[2 + j] = ea.values[j] > 0.0;
        }
        let inv = basis.clone().try_inverse().ok_or_else(|| Error::Degeneracy {
            hypothesis: "H1".into(),
            detail: "asymptotic eigenbasis at lambda = 0 not complete".into(),
        })?;
        let mut p = CMat::zeros(d, d);
        let mut tr = c(0.0);
        for k in 0..d {
            if Self::decaying(side, neg[k]) {
                p += basis.column(k) * inv.row(k);
                tr += mu[k];
            }
        }
        Ok((p, tr))
    }

    fn mode_vectors(&self, side: Side, lambda: C64) -> Result<CMat> {
        let m = self.asymptotic_matrix(side, lambda);
        let e = eig(&m)?;
        let neg = self.negative_branch(lambda, &e.values)?;
        let cols: Vec<usize> = (0..m.nrows()).filter(|&j| Self::decaying(side, neg[j])).collect();
        Ok(CMat::from_fn(m.nrows(), cols.len(), |r, k| e.right[(r, cols[k])]))
    }

    /// Seed columns at the far field: the projection of a fixed reference
    /// basis, so the span is analytic in lambda.
    pub fn seed_columns(&self, side: Side, lambda: C64) -> Result<(CMat, C64)> {
        let (p, tr) = self.decaying_projection(side, lambda)?;
        let r = match side {
            Side::Plus => &self.ref_plus,
            Side::Minus => &self.ref_minus,
        };
        Ok((p * r, tr))
    }

    /// L_p, R_p diagonalizing A(U(x)): L_p A R_p = diag(a_1, ..., a_n).
    pub fn diagonalizers(&self, x: f64) -> Result<(RMat, RMat, Vec<f64>)> {
        let a = self.profile.model.jacobian_f(&self.profile.eval(x).u);
        let e = eig_real(&a)?;
        Ok((e.left, e.right, e.values))
    }

    /// Frobenius exponent at the sonic point:
    /// alpha0 = (lambda + l_p LB r_p + a_p'(0)) / |a_p'(0)|.
    pub fn alpha0(&self, lambda: C64) -> Result<C64> {
        let u0 = self.profile.sonic_state();
        let e = eig_real(&self.profile.model.jacobian_f(&u0))?;
        let k = self.p - 1;
        let lbr = (e.left.row(k) * self.profile.model.lb(&u0) * e.right.column(k))[(0, 0)];
        let s = self.ap_prime0.abs();
        Ok((lambda + c(lbr + self.ap_prime0)) / s)
    }

    /// l_p LB r_p at the sonic state.
    pub fn sonic_coupling(&self) -> Result<f64> {
        let u0 = self.profile.sonic_state();
        let e = eig_real(&self.profile.model.jacobian_f(&u0))?;
        let k = self.p - 1;
        Ok((e.left.row(k) * self.profile.model.lb(&u0) * e.right.column(k))[(0, 0)])
    }
}
