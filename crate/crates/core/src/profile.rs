//! Stationary shock profile (U, Q) of
//!
//! ```text
//! f(U)_x + L Q_x = 0,    -Q_xx + Q + g(U)_x = 0,
//! ```
//!
//! with the sonic point a_p(U(0)) = 0 placed at x = 0.
//!
//! Each half is integrated in a desingularized time s with dx/ds = det A(U),
//! starting on the slow unstable direction at the endpoint and running into
//! the sonic node, where s -> infinity while x converges.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{RMat, RVec};
use crate::model::{ModelSystem, ShockTriple};
use crate::numerics::{bisect, chebyshev_nodes, integrate, line_fit, taylor_fit, OdeOptions, Trajectory};

const TAYLOR_NODES: usize = 32;
const TAYLOR_DEG: usize = 16;
const START_OFFSET: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Profile {
    pub model: ModelSystem,
    pub shock: ShockTriple,
    pub grid: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub ux: Vec<Vec<f64>>,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub eta: f64,
    pub eta_fit: f64,
    pub sonic_index: usize,
    pub first_integral_const: Vec<f64>,
    pub half_length: f64,
    /// matching radius of the sonic-point series
    pub x0: f64,
    /// local polynomial representation on |x| <= taylor_h
    pub taylor_h: f64,
    pub taylor_u: Vec<Vec<f64>>,
    pub taylor_q: Vec<f64>,
    pub taylor_p: Vec<f64>,
}

/// Profile state at a point.
#[derive(Debug, Clone)]
pub struct ProfilePoint {
    pub u: Vec<f64>,
    pub ux: Vec<f64>,
    pub q: f64,
    pub p: f64,
}

pub fn adjugate(a: &RMat) -> RMat {
    let n = a.nrows();
    if n == 1 {
        return RMat::from_element(1, 1, 1.0);
    }
    RMat::from_fn(n, n, |i, j| {
        let minor = a.clone().remove_row(j).remove_column(i);
        let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        s * minor.determinant()
    })
}

/// Slow exponent of the linearized profile ODE at an endpoint. Only the
/// (Q, P) block is nontrivial: mu^2 + c mu - 1 = 0 with c = B A^{-1} L.
pub fn endpoint_exponents(model: &ModelSystem, u: &[f64]) -> Result<(f64, f64)> {
    let a = model.jacobian_f(u);
    let ainv_l = a
        .clone()
        .lu()
        .solve(&model.l_vec())
        .ok_or_else(|| Error::Degeneracy { hypothesis: "H1".into(), detail: "sonic endpoint".into() })?;
    let c = model.jacobian_b(u).dot(&ainv_l);
    let d = (c * c + 4.0).sqrt();
    let (r1, r2) = ((-c + d) / 2.0, (-c - d) / 2.0);
    // slow root first
    if r1.abs() <= r2.abs() {
        Ok((r1, r2))
    } else {
        Ok((r2, r1))
    }
}

fn newton_first_integral(model: &ModelSystem, target: &RVec, guess: &[f64]) -> Result<Vec<f64>> {
    let mut v = RVec::from_column_slice(guess);
    for _ in 0..60 {
        let r = model.flux(v.as_slice()) - target;
        if r.norm() < 1e-16 * (1.0 + target.norm()) {
            break;
        }
        let dv = model
            .jacobian_f(v.as_slice())
            .lu()
            .solve(&r)
            .ok_or_else(|| Error::ProfileBranch("singular Newton step".into()))?;
        v -= dv;
    }
    if (model.flux(v.as_slice()) - target).norm() > 1e-12 * (1.0 + target.norm()) {
        return Err(Error::ProfileBranch("first-integral Newton diverged".into()));
    }
    Ok(v.as_slice().to_vec())
}

/// Scaled variables z = (U/su, Q/sq, P/sp, x/sx).
#[derive(Clone, Copy)]
struct Scales {
    su: f64,
    sq: f64,
    sp: f64,
    sx: f64,
}

struct Branch {
    traj: Trajectory<f64>,
    sigma: f64,
    x_node: f64,
    /// slow endpoint exponent and endpoint state, for the linear tail
    mu: f64,
    end: Vec<f64>,
}

fn branch_rhs(model: &ModelSystem, sc: Scales, sigma: f64, z: &[f64], dz: &mut [f64]) {
    let n = model.n;
    let u: Vec<f64> = z[..n].iter().map(|v| v * sc.su).collect();
    let q = z[n] * sc.sq;
    let p = z[n + 1] * sc.sp;
    let a = model.jacobian_f(&u);
    let det = a.determinant();
    let du = -(adjugate(&a) * model.l_vec()) * p;
    let bdu = model.jacobian_b(&u).dot(&du);
    for i in 0..n {
        dz[i] = sigma * du[i] / sc.su;
    }
    dz[n] = sigma * det * p / sc.sq;
    dz[n + 1] = sigma * (det * q + bdu) / sc.sp;
    dz[n + 2] = sigma * det / sc.sx;
}

impl Branch {
    fn x_at(&self, i: usize, sc: Scales) -> f64 {
        self.traj.ys[i][self.traj.ys[i].len() - 1] * sc.sx - self.x_node
    }
}

fn run_branch(model: &ModelSystem, shock: &ShockTriple, left: bool, sc: Scales, tol: f64) -> Result<Branch> {
    let n = model.n;
    let (end, other) = if left { (&shock.u_minus, &shock.u_plus) } else { (&shock.u_plus, &shock.u_minus) };
    let (mu, _) = endpoint_exponents(model, end)?;
    let ok_sign = if left { mu > 0.0 } else { mu < 0.0 };
    if !ok_sign {
        return Err(Error::ProfileBranch(format!("slow endpoint exponent {mu} has the wrong sign")));
    }
    let a = model.jacobian_f(end);
    let ainv_l = a.clone().lu().solve(&model.l_vec()).unwrap();
    // eigenvector (U, Q, P) = (-A^{-1}L / mu, 1 / mu, 1)
    let dir_u = -&ainv_l / mu;
    let toward: f64 = (0..n).map(|i| -ainv_l[i] * (other[i] - end[i])).sum();
    let sgn = if toward > 0.0 { 1.0 } else { -1.0 };
    let q0 = sgn * START_OFFSET * sc.sq / mu.abs();
    let p0 = mu * q0;
    let fconst = model.flux(&shock.u_minus);
    let target = &fconst - model.l_vec() * q0;
    let guess: Vec<f64> = (0..n).map(|i| end[i] + dir_u[i] * p0).collect();
    let u0 = newton_first_integral(model, &target, &guess)?;
    let det0 = a.determinant();
    let sigma = if left { det0.signum() } else { -det0.signum() };
    let mut z0: Vec<f64> = u0.iter().map(|v| v / sc.su).collect();
    z0.push(q0 / sc.sq);
    z0.push(p0 / sc.sp);
    z0.push(0.0);

    let opts = OdeOptions::tol(tol, tol * 1e-3);
    let rate = (mu * det0).abs().max(1e-12);
    let chunk = 10.0 / rate;
    let mut traj: Option<Trajectory<f64>> = None;
    let mut s = 0.0;
    let mut z = z0;
    let a_end = model.char_speed(end, shock.p)?.abs();
    let mut slope = f64::NAN;
    for _ in 0..400 {
        let t = integrate(|_, y, dy| branch_rhs(model, sc, sigma, y, dy), s, s + chunk, &z, &opts)?;
        s = t.x_end();
        z = t.last().0.to_vec();
        traj = Some(match traj {
            None => t,
            Some(mut acc) => {
                acc.xs.extend_from_slice(&t.xs[1..]);
                acc.ys.extend_from_slice(&t.ys[1..]);
                acc.fs.extend_from_slice(&t.fs[1..]);
                acc.log_scale.extend_from_slice(&t.log_scale[1..]);
                acc.rejected += t.rejected;
                acc
            }
        });
        // remaining distance to the node from a_p and its slope in x; the
        // slope is only refreshed while a_p still changes above roundoff
        let tr = traj.as_ref().unwrap();
        let m = tr.len();
        let ua: Vec<f64> = tr.ys[m - 1][..n].iter().map(|v| v * sc.su).collect();
        let ub: Vec<f64> = tr.ys[m - 2][..n].iter().map(|v| v * sc.su).collect();
        let (aa, ab) = (model.char_speed(&ua, shock.p)?, model.char_speed(&ub, shock.p)?);
        let (xa, xb) = (tr.ys[m - 1][n + 2] * sc.sx, tr.ys[m - 2][n + 2] * sc.sx);
        if (aa - ab).abs() > 1e-9 * a_end && xa != xb {
            slope = (aa - ab) / (xa - xb);
        }
        if slope.is_finite() {
            let remaining = -aa / slope;
            let at_roundoff = aa.abs() < 1e-12 * model.jacobian_f(&ua).norm();
            if remaining.abs() < 1e-11 * sc.sx.max(1.0) || at_roundoff {
                let traj = traj.unwrap();
                return Ok(Branch { traj, sigma, x_node: xa + remaining, mu, end: end.clone() });
            }
        }
    }
    Err(Error::ProfileBranch("branch did not reach the sonic node".into()))
}

/// Accurate state at shifted position x on a branch: interpolate s(x), then
/// re-integrate from the preceding accepted step and correct to first order.
fn branch_state(model: &ModelSystem, br: &Branch, sc: Scales, x: f64, tol: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = model.n;
    let tr = &br.traj;
    let m = tr.len();
    let first = br.x_at(0, sc);
    let incr = br.x_at(m - 1, sc) > first;
    let before = |i: usize| if incr { br.x_at(i, sc) <= x } else { br.x_at(i, sc) >= x };
    if !before(0) {
        // beyond the start the deviation from the endpoint is a pure slow mode
        let z = &tr.ys[0];
        let fac = (br.mu * (x - first)).exp();
        let mut state = vec![0.0; n + 2];
        let mut deriv = vec![0.0; n + 2];
        for i in 0..n {
            let dev = (z[i] * sc.su - br.end[i]) * fac;
            state[i] = br.end[i] + dev;
            deriv[i] = br.mu * dev;
        }
        state[n] = z[n] * sc.sq * fac;
        state[n + 1] = z[n + 1] * sc.sp * fac;
        deriv[n] = state[n + 1];
        deriv[n + 1] = br.mu * state[n + 1];
        return Ok((state, deriv));
    }
    let (mut lo, mut hi) = (0usize, m - 1);
    if before(hi) {
        lo = hi - 1;
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if before(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let xs_of = |s: f64| tr.eval(s).0[n + 2] * sc.sx - br.x_node - x;
    let s_star = bisect(xs_of, tr.xs[lo], tr.xs[hi], 1e-15 * tr.xs[hi].abs().max(1.0)).unwrap_or(tr.xs[hi]);
    let opts = OdeOptions::tol(tol * 1e-2, tol * 1e-5);
    let t = integrate(|_, y, dy| branch_rhs(model, sc, br.sigma, y, dy), tr.xs[lo], s_star, &tr.ys[lo], &opts)?;
    let z = t.last().0.to_vec();
    let mut dz = vec![0.0; n + 3];
    branch_rhs(model, sc, br.sigma, &z, &mut dz);
    let dxds = dz[n + 2] * sc.sx;
    let miss = x - (z[n + 2] * sc.sx - br.x_node);
    let mut state = vec![0.0; n + 2];
    let mut deriv = vec![0.0; n + 2];
    for i in 0..n {
        deriv[i] = dz[i] * sc.su / dxds;
        state[i] = z[i] * sc.su + deriv[i] * miss;
    }
    deriv[n] = dz[n] * sc.sq / dxds;
    deriv[n + 1] = dz[n + 1] * sc.sp / dxds;
    state[n] = z[n] * sc.sq + deriv[n] * miss;
    state[n + 1] = z[n + 1] * sc.sp + deriv[n + 1] * miss;
    Ok((state, deriv))
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn poly_deriv(c: &[f64], x: f64) -> f64 {
    c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, &a)| acc * x + k as f64 * a)
}

/// Uniform grid on [-X, X] with `nodes` points, refined eightfold on |x| <= r.
pub fn profile_grid(half_length: f64, nodes: usize, refine_radius: f64) -> Vec<f64> {
    let h = 2.0 * half_length / (nodes - 1) as f64;
    let mut g = Vec::with_capacity(nodes + 64);
    for i in 0..nodes {
        let x = -half_length + h * i as f64;
        let x = if i == nodes / 2 && nodes % 2 == 1 { 0.0 } else { x };
        g.push(x);
        if i + 1 < nodes {
            let xn = -half_length + h * (i + 1) as f64;
            if x.abs().max(xn.abs()) <= refine_radius + h {
                for k in 1..8 {
                    g.push(x + h * k as f64 / 8.0);
                }
            }
        }
    }
    g
}

pub fn solve_profile(model: &ModelSystem, shock: &ShockTriple, half_length: Option<f64>, tol: f64) -> Result<Profile> {
    let n = model.n;
    let eps = shock.epsilon;
    if eps <= 0.0 {
        return Err(Error::InvalidInput("degenerate shock: u+ = u-".into()));
    }
    model.check_domain(&shock.u_minus)?;
    model.check_domain(&shock.u_plus)?;
    let (mu_m, _) = endpoint_exponents(model, &shock.u_minus)?;
    let (mu_p, _) = endpoint_exponents(model, &shock.u_plus)?;
    let eta = mu_m.abs().min(mu_p.abs());
    let big_x = half_length.unwrap_or(16.0 / eta);
    let sc = Scales { su: eps, sq: eps * eps, sp: eps * eps * eta, sx: 1.0 / eta };

    let left = run_branch(model, shock, true, sc, tol)?;
    let right = run_branch(model, shock, false, sc, tol)?;
    let state_at = |x: f64| -> Result<(Vec<f64>, Vec<f64>)> {
        if x < 0.0 {
            branch_state(model, &left, sc, x, tol)
        } else {
            branch_state(model, &right, sc, x, tol)
        }
    };

    let x0 = 0.05 * (1.0f64).min(1.0 / eta);
    let th = 2.0 * x0;
    let cheb = chebyshev_nodes(TAYLOR_NODES, -th, th);
    let samples: Vec<(Vec<f64>, Vec<f64>)> = cheb.iter().map(|&x| state_at(x)).collect::<Result<_>>()?;
    let fit = |k: usize| taylor_fit(&cheb, &samples.iter().map(|s| s.0[k]).collect::<Vec<_>>(), TAYLOR_DEG, th);
    let taylor_u: Vec<Vec<f64>> = (0..n).map(fit).collect();
    let taylor_q = fit(n);
    let taylor_p = fit(n + 1);

    let grid = profile_grid(big_x, 4001, 10.0 * x0);
    let rows: Vec<Result<(Vec<f64>, Vec<f64>)>> = grid
        .par_iter()
        .map(|&x| {
            if x.abs() < th {
                let st: Vec<f64> = taylor_u.iter().chain([&taylor_q, &taylor_p]).map(|c| poly_eval(c, x)).collect();
                let dv: Vec<f64> = taylor_u.iter().chain([&taylor_q, &taylor_p]).map(|c| poly_deriv(c, x)).collect();
                Ok((st, dv))
            } else {
                state_at(x)
            }
        })
        .collect();
    let mut u = Vec::with_capacity(grid.len());
    let mut ux = Vec::with_capacity(grid.len());
    let mut q = Vec::with_capacity(grid.len());
    let mut p = Vec::with_capacity(grid.len());
    for r in rows {
        let (st, dv) = r?;
        u.push(st[..n].to_vec());
        ux.push(dv[..n].to_vec());
        q.push(st[n]);
        p.push(st[n + 1]);
    }
    let sonic_index = grid.iter().position(|&x| x == 0.0).unwrap_or(grid.len() / 2);

    let mut prof = Profile {
        model: model.clone(),
        shock: shock.clone(),
        grid,
        u,
        ux,
        q,
        p,
        eta,
        eta_fit: f64::NAN,
        sonic_index,
        first_integral_const: model.flux(&shock.u_minus).as_slice().to_vec(),
        half_length: big_x,
        x0,
        taylor_h: th,
        taylor_u,
        taylor_q,
        taylor_p,
    };

    let far = prof.far_field_error();
    if far > 1e-6 * eps {
        return Err(Error::DomainTooSmall(format!("far-field error {far:.3e} exceeds 1e-6 eps")));
    }
    prof.check_monotone()?;
    let fit_eta = prof.fitted_decay()?;
    prof.eta_fit = fit_eta;
    if (fit_eta / eta - 1.0).abs() > 0.2 {
        return Err(Error::ProfileRejected(format!("fitted decay {fit_eta:.4e} vs linearized {eta:.4e}")));
    }
    Ok(prof)
}

impl Profile {
    pub fn n(&self) -> usize {
        self.model.n
    }

    pub fn epsilon(&self) -> f64 {
        self.shock.epsilon
    }

    fn locate(&self, x: f64) -> usize {
        let g = &self.grid;
        match g.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(g.len() - 2),
            Err(i) => i.saturating_sub(1).min(g.len() - 2),
        }
    }

    /// State at x: local polynomial near the sonic point, cubic Hermite on
    /// the grid elsewhere, constant far-field states outside [-X, X].
    pub fn eval(&self, x: f64) -> ProfilePoint {
        let n = self.n();
        if x.abs() <= self.x0 {
            return ProfilePoint {
                u: self.taylor_u.iter().map(|c| poly_eval(c, x)).collect(),
                ux: self.taylor_u.iter().map(|c| poly_deriv(c, x)).collect(),
                q: poly_eval(&self.taylor_q, x),
                p: poly_eval(&self.taylor_p, x),
            };
        }
        if x <= -self.half_length || x >= self.half_length {
            let u = if x < 0.0 { self.shock.u_minus.clone() } else { self.shock.u_plus.clone() };
            return ProfilePoint { u, ux: vec![0.0; n], q: 0.0, p: 0.0 };
        }
        let i = self.locate(x);
        let (xa, xb) = (self.grid[i], self.grid[i + 1]);
        let h = xb - xa;
        let t = (x - xa) / h;
        let (h00, h10, h01, h11) = (
            2.0 * t.powi(3) - 3.0 * t * t + 1.0,
            t.powi(3) - 2.0 * t * t + t,
            -2.0 * t.powi(3) + 3.0 * t * t,
            t.powi(3) - t * t,
        );
        let (d00, d10, d01, d11) = (
            (6.0 * t * t - 6.0 * t) / h,
            3.0 * t * t - 4.0 * t + 1.0,
            (-6.0 * t * t + 6.0 * t) / h,
            3.0 * t * t - 2.0 * t,
        );
        let mut u = vec![0.0; n];
        let mut ux = vec![0.0; n];
        for k in 0..n {
            let (ya, yb, da, db) = (self.u[i][k], self.u[i + 1][k], self.ux[i][k], self.ux[i + 1][k]);
            u[k] = h00 * ya + h10 * h * da + h01 * yb + h11 * h * db;
            ux[k] = d00 * ya + d10 * da + d01 * yb + d11 * db;
        }
        // Q' = P, P' = Q + B U'
        let bq = |j: usize| self.q[j] + self.model.jacobian_b(&self.u[j]).dot(&RVec::from_column_slice(&self.ux[j]));
        let q = h00 * self.q[i] + h10 * h * self.p[i] + h01 * self.q[i + 1] + h11 * h * self.p[i + 1];
        let p = h00 * self.p[i] + h10 * h * bq(i) + h01 * self.p[i + 1] + h11 * h * bq(i + 1);
        ProfilePoint { u, ux, q, p }
    }

    /// d/dx a_p(U(x)) at the sonic point (negative for a Lax shock).
    pub fn sonic_slope(&self) -> f64 {
        let h = 1e-3 * self.x0;
        let ap = |x: f64| self.model.char_speed(&self.eval(x).u, self.shock.p).unwrap_or(f64::NAN);
        (ap(h) - ap(-h)) / (2.0 * h)
    }

    pub fn sonic_state(&self) -> Vec<f64> {
        self.taylor_u.iter().map(|c| c[0]).collect()
    }

    /// max over nodes of |f(U) + L Q - f(u-)|, scaled by |f(u-)| + 1.
    pub fn first_integral_residual(&self) -> f64 {
        let c = RVec::from_column_slice(&self.first_integral_const);
        let scale = c.norm() + 1.0;
        let l = self.model.l_vec();
        self.u.iter().zip(&self.q).map(|(u, &q)| (self.model.flux(u) + &l * q - &c).amax() / scale).fold(0.0, f64::max)
    }

    pub fn far_field_error(&self) -> f64 {
        let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let m = self.grid.len() - 1;
        d(&self.u[0], &self.shock.u_minus).max(d(&self.u[m], &self.shock.u_plus))
    }

    fn check_monotone(&self) -> Result<()> {
        let mut prev = f64::INFINITY;
        for (i, u) in self.u.iter().enumerate() {
            let a = self.model.char_speed(u, self.shock.p)?;
            if a > prev + 1e-14 * self.epsilon() {
                return Err(Error::ProfileRejected(format!("a_p not decreasing at x = {}", self.grid[i])));
            }
            prev = prev.min(a);
        }
        Ok(())
    }

    /// Log-linear decay fit of |U - u±| over the tails, minimum of the two sides.
    fn fitted_decay(&self) -> Result<f64> {
        let big_x = self.half_length;
        let mut rates = Vec::new();
        for side in [-1.0, 1.0] {
            let end = if side < 0.0 { &self.shock.u_minus } else { &self.shock.u_plus };
            let (mut xs, mut ls) = (Vec::new(), Vec::new());
            for (x, u) in self.grid.iter().zip(&self.u) {
                let ax = x * side;
                if ax >= 0.3 * big_x && ax <= 0.8 * big_x {
                    let d: f64 = u.iter().zip(end).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    if d > 0.0 {
                        xs.push(ax);
                        ls.push(d.ln());
                    }
                }
            }
            if xs.len() < 10 {
                return Err(Error::ProfileRejected("too few tail samples for the decay fit".into()));
            }
            let fit = line_fit(&xs, &ls);
            let worst =
                xs.iter().zip(&ls).map(|(x, l)| (l - (fit.intercept + fit.slope * x)).abs()).fold(0.0, f64::max);
            if worst > 0.1 {
                return Err(Error::ProfileRejected(format!("log-linear tail fit residual {worst:.3}")));
            }
            rates.push(-fit.slope);
        }
        Ok(rates.into_iter().fold(f64::INFINITY, f64::min))
    }

    /// CSV rows `x, U1..Un, Q, P, a_p`.
    pub fn csv_rows(&self) -> (Vec<String>, Vec<Vec<f64>>) {
        let n = self.n();
        let mut header = vec!["x".to_string()];
        header.extend((1..=n).map(|i| format!("U{i}")));
        header.extend(["Q".to_string(), "P".to_string(), "a_p".to_string()]);
        let rows = (0..self.grid.len())
            .map(|i| {
                let mut r = vec![self.grid[i]];
                r.extend_from_slice(&self.u[i]);
                r.push(self.q[i]);
                r.push(self.p[i]);
                r.push(self.model.char_speed(&self.u[i], self.shock.p).unwrap_or(f64::NAN));
                r
            })
            .collect();
        (header, rows)
    }
}

/// Decay rate of the profile: the slowest endpoint exponent.
pub fn decay_rate(profile: &Profile) -> f64 {
    profile.eta
}
