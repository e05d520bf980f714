//! Direct simulation of
//!
//! ```text
//! u_t + f(u)_x + L q_x = 0,    -q_xx + q = -g(u)_x,
//! ```
//!
//! by MUSCL finite volumes (minmod slopes, local Lax-Friedrichs flux,
//! SSP-RK3), with q recomputed by a tridiagonal solve at every stage.
//! Shock location is tracked by L2 fitting of shifted profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::eig_real;
use crate::model::ModelSystem;
use crate::numerics::{golden_section, line_fit};
use crate::profile::Profile;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimState {
    pub x: Vec<f64>,
    pub h: f64,
    pub n: usize,
    /// node-major: u[i * n + k]
    pub u: Vec<f64>,
    pub q: Vec<f64>,
    pub t: f64,
    pub cfl: f64,
    pub u_left: Vec<f64>,
    pub u_right: Vec<f64>,
}

impl SimState {
    pub fn new(
        x: Vec<f64>,
        u: Vec<f64>,
        n: usize,
        u_left: Vec<f64>,
        u_right: Vec<f64>,
        cfl: f64,
        model: &ModelSystem,
    ) -> Self {
        let h = x[1] - x[0];
        let mut s = SimState { x, h, n, u, q: Vec::new(), t: 0.0, cfl, u_left, u_right };
        s.q = elliptic_solve(h, &s.elliptic_rhs(model));
        s
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.u[i * self.n..(i + 1) * self.n]
    }

    /// -g(u)_x by centered differences, far-field states outside.
    pub fn elliptic_rhs(&self, model: &ModelSystem) -> Vec<f64> {
        elliptic_rhs(model, &self.u, self.n, self.h, &self.u_left, &self.u_right)
    }

    /// max |(-q'' + q - rhs)_i| for the discrete operator.
    pub fn elliptic_residual(&self, model: &ModelSystem) -> f64 {
        let rhs = self.elliptic_rhs(model);
        let m = self.q.len();
        let h2 = self.h * self.h;
        (0..m)
            .map(|i| {
                let l = if i == 0 { 0.0 } else { self.q[i - 1] };
                let r = if i + 1 == m { 0.0 } else { self.q[i + 1] };
                ((2.0 * self.q[i] - l - r) / h2 + self.q[i] - rhs[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// h sum of u, per component.
    pub fn mass(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.h * (0..self.len()).map(|i| self.u[i * self.n + k]).sum::<f64>()).collect()
    }
}

pub fn uniform_grid(half: f64, nodes: usize) -> Vec<f64> {
    let h = 2.0 * half / (nodes - 1) as f64;
    (0..nodes).map(|i| -half + h * i as f64).collect()
}

fn elliptic_rhs(model: &ModelSystem, u: &[f64], n: usize, h: f64, ul: &[f64], ur: &[f64]) -> Vec<f64> {
    let m = u.len() / n;
    let g: Vec<f64> = (0..m).map(|i| model.g(&u[i * n..(i + 1) * n])).collect();
    let (gl, gr) = (model.g(ul), model.g(ur));
    (0..m)
        .map(|i| {
            let a = if i == 0 { gl } else { g[i - 1] };
            let b = if i + 1 == m { gr } else { g[i + 1] };
            -(b - a) / (2.0 * h)
        })
        .collect()
}

/// Solve -q'' + q = rhs with q = 0 beyond both ends (Thomas algorithm).
pub fn elliptic_solve(h: f64, rhs: &[f64]) -> Vec<f64> {
    let m = rhs.len();
    let off = -1.0 / (h * h);
    let diag = 2.0 / (h * h) + 1.0;
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    c[0] = off / diag;
    d[0] = rhs[0] / diag;
    for i in 1..m {
        let den = diag - off * c[i - 1];
        c[i] = off / den;
        d[i] = (rhs[i] - off * d[i - 1]) / den;
    }
    let mut q = vec![0.0; m];
    q[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        q[i] = d[i] - c[i] * q[i + 1];
    }
    q
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

pub fn max_speed(model: &ModelSystem, u: &[f64]) -> f64 {
    let a = model.jacobian_f(u);
    if a.nrows() == 1 {
        return a[(0, 0)].abs();
    }
    eig_real(&a).map(|e| e.values.iter().map(|v| v.abs()).fold(0.0, f64::max)).unwrap_or(f64::INFINITY)
}

/// Semi-discrete right-hand side; returns (du/dt, q).
fn rhs(model: &ModelSystem, s: &SimState, u: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = s.n;
    let m = u.len() / n;
    let h = s.h;
    for i in 0..m {
        if !model.in_domain(&u[i * n..(i + 1) * n]) {
            return Err(Error::SimulationDomain(i));
        }
    }
    let q = elliptic_solve(h, &elliptic_rhs(model, u, n, h, &s.u_left, &s.u_right));
    // cell value with two constant ghost cells on each side
    let cell = |i: isize, k: usize| -> f64 {
        if i < 0 {
            s.u_left[k]
        } else if i as usize >= m {
            s.u_right[k]
        } else {
            u[i as usize * n + k]
        }
    };
    let slope = |i: isize, k: usize| minmod(cell(i, k) - cell(i - 1, k), cell(i + 1, k) - cell(i, k));
    let mut flux = vec![0.0; (m + 1) * n];
    let mut ul = vec![0.0; n];
    let mut ur = vec![0.0; n];
    for j in 0..=m {
        // interface between cells j-1 and j
        let (a, b) = (j as isize - 1, j as isize);
        for k in 0..n {
            ul[k] = cell(a, k) + 0.5 * slope(a, k);
            ur[k] = cell(b, k) - 0.5 * slope(b, k);
        }
        let fl = model.flux(&ul);
        let fr = model.flux(&ur);
        let sp = max_speed(model, &ul).max(max_speed(model, &ur));
        for k in 0..n {
            flux[j * n + k] = 0.5 * (fl[k] + fr[k]) - 0.5 * sp * (ur[k] - ul[k]);
        }
    }
    let l = &model.l;
    let mut du = vec![0.0; m * n];
    for i in 0..m {
        let ql = if i == 0 { 0.0 } else { q[i - 1] };
        let qr = if i + 1 == m { 0.0 } else { q[i + 1] };
        let qx = (qr - ql) / (2.0 * h);
        for k in 0..n {
            du[i * n + k] = -(flux[(i + 1) * n + k] - flux[i * n + k]) / h - l[k] * qx;
        }
    }
    Ok((du, q))
}

/// Largest stable step for the current state.
pub fn stable_dt(model: &ModelSystem, s: &SimState) -> f64 {
    let sp = (0..s.len()).map(|i| max_speed(model, s.node(i))).fold(0.0, f64::max).max(1e-12);
    s.cfl * s.h / sp
}

/// One SSP-RK3 step of size dt.
pub fn step(s: &SimState, model: &ModelSystem, dt: f64) -> Result<SimState> {
    let (k1, _) = rhs(model, s, &s.u)?;
    let u1: Vec<f64> = s.u.iter().zip(&k1).map(|(u, k)| u + dt * k).collect();
    let (k2, _) = rhs(model, s, &u1)?;
    let u2: Vec<f64> = s.u.iter().zip(u1.iter().zip(&k2)).map(|(u, (v, k))| 0.75 * u + 0.25 * (v + dt * k)).collect();
    let (k3, _) = rhs(model, s, &u2)?;
    let u3: Vec<f64> =
        s.u.iter().zip(u2.iter().zip(&k3)).map(|(u, (v, k))| u / 3.0 + 2.0 / 3.0 * (v + dt * k)).collect();
    let mut out = s.clone();
    out.q = elliptic_solve(s.h, &elliptic_rhs(model, &u3, s.n, s.h, &s.u_left, &s.u_right));
    out.u = u3;
    out.t = s.t + dt;
    Ok(out)
}

/// Advance to time `t_end` with CFL-limited steps.
pub fn advance(s: &SimState, model: &ModelSystem, t_end: f64) -> Result<SimState> {
    let mut cur = s.clone();
    while cur.t < t_end - 1e-12 {
        let dt = stable_dt(model, &cur).min(t_end - cur.t);
        cur = step(&cur, model, dt)?;
    }
    Ok(cur)
}

fn shifted_misfit(s: &SimState, profile: &Profile, a: f64) -> f64 {
    let n = s.n;
    let mut acc = 0.0;
    for (i, &x) in s.x.iter().enumerate() {
        let p = profile.eval(x - a);
        for k in 0..n {
            acc += (s.u[i * n + k] - p.u[k]).powi(2);
        }
    }
    acc * s.h
}

/// Shift a minimizing |u - U(. - a)|_L2 over [guess - window, guess + window].
pub fn track_shock(s: &SimState, profile: &Profile, guess: f64, window: f64) -> Result<f64> {
    let (a, _) = golden_section(|a| shifted_misfit(s, profile, a), guess - window, guess + window, 1e-6 * s.h);
    if (a - (guess - window)).abs() < 1e-3 * window || (a - (guess + window)).abs() < 1e-3 * window {
        return Err(Error::TrackingLost(a));
    }
    Ok(a)
}

/// Smooth bump amplitude * exp(1 - 1/(1 - r^2)), r = (x - center)/width,
/// added to the first component.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Perturbation {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl Perturbation {
    /// Amplitude 0.02, support [-105, -95].
    pub fn standard() -> Self {
        Perturbation { amplitude: 0.02, center: -100.0, width: 5.0 }
    }

    pub fn at(&self, x: f64) -> f64 {
        let r = (x - self.center) / self.width;
        if r.abs() >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - 1.0 / (1.0 - r * r)).exp()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayOptions {
    pub half_width: f64,
    pub nodes: usize,
    pub t_end: f64,
    pub cfl: f64,
    pub output_every: f64,
    pub fit_window: [f64; 2],
    pub smoothing: usize,
}

impl Default for DecayOptions {
    fn default() -> Self {
        DecayOptions {
            half_width: 200.0,
            nodes: 8001,
            t_end: 400.0,
            cfl: 0.4,
            output_every: 2.0,
            fit_window: [20.0, 400.0],
            smoothing: 5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fit {
    pub exponent: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    pub e2: Fit,
    pub einf: Fit,
    pub alpha_dot_exponent: Fit,
    pub fit_window: [f64; 2],
    pub perturbation: Perturbation,
    pub times: Vec<f64>,
    pub l2: Vec<f64>,
    pub linf: Vec<f64>,
    /// |q - Q(. - alpha)|_L2 + |q_x - Q'(. - alpha)|_L2
    pub q_w1p: Vec<f64>,
    pub unshifted_l2: Vec<f64>,
    pub alpha: Vec<f64>,
    pub alpha_dot: Vec<f64>,
    pub initial_l1: f64,
    /// discrete H2 norm of the initial perturbation
    pub initial_h2: f64,
    pub mass_drift: f64,
    pub steps: usize,
}

impl DecayReport {
    /// Rows `t,L2,Linf,q_W1p,alpha,alpha_dot`.
    pub fn csv_rows(&self) -> Vec<[f64; 6]> {
        (0..self.times.len())
            .map(|i| [self.times[i], self.l2[i], self.linf[i], self.q_w1p[i], self.alpha[i], self.alpha_dot[i]])
            .collect()
    }
}

fn fit_power(ts: &[f64], vs: &[f64], window: [f64; 2]) -> Fit {
    let (lx, ly): (Vec<f64>, Vec<f64>) = ts
        .iter()
        .zip(vs)
        .filter(|(t, v)| **t >= window[0] && **t <= window[1] && **v > 0.0)
        .map(|(t, v)| (t.ln(), v.ln()))
        .unzip();
    if lx.len() < 3 {
        return Fit { exponent: f64::NAN, r2: 0.0 };
    }
    let f = line_fit(&lx, &ly);
    Fit { exponent: f.slope, r2: f.r2 }
}

/// Norms of u - U(. - alpha) and q - Q(. - alpha).
fn measure(s: &SimState, profile: &Profile, alpha: f64) -> (f64, f64, f64) {
    let n = s.n;
    let (mut l2, mut linf, mut qq) = (0.0, 0.0f64, 0.0);
    let m = s.len();
    for i in 0..m {
        let p = profile.eval(s.x[i] - alpha);
        for k in 0..n {
            let d = s.u[i * n + k] - p.u[k];
            l2 += d * d;
            linf = linf.max(d.abs());
        }
        let ql = if i == 0 { 0.0 } else { s.q[i - 1] };
        let qr = if i + 1 == m { 0.0 } else { s.q[i + 1] };
        let dq = s.q[i] - p.q;
        let dqx = (qr - ql) / (2.0 * s.h) - p.p;
        qq += dq * dq + dqx * dqx;
    }
    ((l2 * s.h).sqrt(), linf, (qq * s.h).sqrt())
}

pub fn initial_state(profile: &Profile, pert: &Perturbation, opts: &DecayOptions) -> SimState {
    let x = uniform_grid(opts.half_width, opts.nodes);
    let n = profile.n();
    let mut u = Vec::with_capacity(x.len() * n);
    for &xi in &x {
        let mut v = profile.eval(xi).u;
        v[0] += pert.at(xi);
        u.extend(v);
    }
    SimState::new(x, u, n, profile.shock.u_minus.clone(), profile.shock.u_plus.clone(), opts.cfl, &profile.model)
}

/// Simulate from U + perturbation and fit decay exponents of the shifted
/// perturbation norms and of the shock speed.
pub fn run_decay(profile: &Profile, pert: &Perturbation, opts: &DecayOptions) -> Result<DecayReport> {
    let model = &profile.model;
    let mut s = initial_state(profile, pert, opts);
    let h = s.h;
    let d: Vec<f64> = s.x.iter().map(|&x| pert.at(x)).collect();
    let initial_l1 = h * d.iter().map(|v| v.abs()).sum::<f64>();
    let mut h2 = 0.0;
    for i in 1..d.len() - 1 {
        let d1 = (d[i + 1] - d[i - 1]) / (2.0 * h);
        let d2 = (d[i + 1] - 2.0 * d[i] + d[i - 1]) / (h * h);
        h2 += d[i] * d[i] + d1 * d1 + d2 * d2;
    }
    let initial_h2 = (h2 * h).sqrt();
    let mass0 = s.mass();

    let jump: f64 = profile.shock.u_plus[0] - profile.shock.u_minus[0];
    let mut alpha = track_shock(&s, profile, 0.0, 2.0 + (initial_l1 / jump).abs())?;
    let mut times = Vec::new();
    let mut l2 = Vec::new();
    let mut linf = Vec::new();
    let mut q_w1p = Vec::new();
    let mut unshifted = Vec::new();
    let mut alphas = Vec::new();
    let mut steps = 0;
    let mut next = 0.0;
    loop {
        if s.t >= next - 1e-12 {
            alpha = track_shock(&s, profile, alpha, 0.5 + 20.0 * h)?;
            let (a, b, c) = measure(&s, profile, alpha);
            let (u0, _, _) = measure(&s, profile, 0.0);
            if let Some(&first) = l2.first() {
                if a > 10.0 * first {
                    return Err(Error::Instability(format!(
                        "L2 perturbation grew from {first:e} to {a:e} at t = {}",
                        s.t
                    )));
                }
            }
            times.push(s.t);
            l2.push(a);
            linf.push(b);
            q_w1p.push(c);
            unshifted.push(u0);
            alphas.push(alpha);
            next += opts.output_every;
        }
        if s.t >= opts.t_end - 1e-12 {
            break;
        }
        let dt = stable_dt(model, &s).min(next - s.t);
        s = step(&s, model, dt)?;
        steps += 1;
    }
    // boundary fluxes vanish for the pinned far-field states when f(u-) = f(u+)
    let fl = model.flux(&s.u_left);
    let fr = model.flux(&s.u_right);
    let mass1 = s.mass();
    let expected = mass0[0] + (fl[0] - fr[0]) * s.t;
    let mass_drift = (mass1[0] - expected).abs();

    let w = opts.smoothing.max(1);
    let smooth: Vec<f64> = (0..alphas.len())
        .map(|i| {
            let lo = i.saturating_sub(w / 2);
            let hi = (i + w / 2 + 1).min(alphas.len());
            alphas[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    let alpha_dot: Vec<f64> = (0..smooth.len())
        .map(|i| {
            if i == 0 || i + 1 == smooth.len() {
                f64::NAN
            } else {
                (smooth[i + 1] - smooth[i - 1]) / (times[i + 1] - times[i - 1])
            }
        })
        .collect();
    let adot_abs: Vec<f64> = alpha_dot.iter().map(|v| v.abs()).collect();
    Ok(DecayReport {
        e2: fit_power(&times, &l2, opts.fit_window),
        einf: fit_power(&times, &linf, opts.fit_window),
        alpha_dot_exponent: fit_power(&times, &adot_abs, opts.fit_window),
        fit_window: opts.fit_window,
        perturbation: *pert,
        times,
        l2,
        linf,
        q_w1p,
        unshifted_l2: unshifted,
        alpha: alphas,
        alpha_dot,
        initial_l1,
        initial_h2,
        mass_drift,
        steps,
    })
}
