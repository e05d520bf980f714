//! Low-frequency Green function by inverse Laplace transform of the
//! resolvent kernel, the excited errfn term, and Gaussian envelope fits.
//!
//! The contour runs up the imaginary axis from -iR to iR and passes the
//! pole at 0 on a half circle of radius r/2 in Re lambda > 0. By conjugate
//! symmetry only the upper half is sampled:
//!
//! ```text
//! G^I(x, t; y) = Im( sum_j w_j e^{lambda_j t} G_{lambda_j}(x, y) ) / pi.
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evans::{EvansSolver, ResolventBasis};
use crate::linalg::{c, eig_real, RMat, RealEigen, C64};
use crate::numerics::{errfn, golden_section, line_fit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenSample {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    #[serde(rename = "GI")]
    pub gi: f64,
    #[serde(rename = "E")]
    pub e: f64,
    /// fitted (C, M); zero when no fit was made
    pub envelope_params: [f64; 2],
}

/// Quadrature nodes and weights (dlambda included) on the upper half of
/// the contour.
#[derive(Debug, Clone)]
pub struct ContourRule {
    pub nodes: Vec<C64>,
    pub weights: Vec<C64>,
    pub length: f64,
}

/// Periodizing map with psi'(0) = psi'(1) = 0 to third order, so the
/// trapezoidal sum in tau converges rapidly on each open piece.
fn psi(tau: f64) -> (f64, f64) {
    let w = 2.0 * std::f64::consts::PI * tau;
    let pi = std::f64::consts::PI;
    let s = tau - (2.0 / (3.0 * pi)) * w.sin() + (1.0 / (12.0 * pi)) * (2.0 * w).sin();
    let ds = 1.0 - (4.0 / 3.0) * w.cos() + (1.0 / 3.0) * (2.0 * w).cos();
    (s, ds)
}

/// Trapezoidal rule with about `samples` nodes, in the variable tau of
/// [`psi`] on three pieces: a quarter circle of radius delta = r/2, the
/// segment [i delta, 16 i delta] with geometric spacing, and a uniform
/// segment up to iR.
pub fn contour_rule(r: f64, big_r: f64, samples: usize) -> Result<ContourRule> {
    let delta = 0.5 * r;
    if !(delta > 0.0 && big_r > 32.0 * delta) || samples < 16 {
        return Err(Error::InvalidInput(format!("bad contour r = {r}, R = {big_r}, samples = {samples}")));
    }
    let wc = 16.0 * delta;
    let na = samples / 8;
    let ng = samples / 4;
    let nu = samples + 3 - na - ng;
    let lg = (wc / delta).ln();
    let pieces: [(usize, Box<dyn Fn(f64) -> (C64, C64)>); 3] = [
        (
            na,
            Box::new(move |s: f64| {
                let l = C64::from_polar(delta, 0.5 * std::f64::consts::PI * s);
                (l, C64::i() * l * (0.5 * std::f64::consts::PI))
            }),
        ),
        (
            ng,
            Box::new(move |s: f64| {
                let l = C64::new(0.0, delta * (lg * s).exp());
                (l, l * lg)
            }),
        ),
        (nu, Box::new(move |s: f64| (C64::new(0.0, wc + (big_r - wc) * s), C64::new(0.0, big_r - wc)))),
    ];
    let mut nodes = Vec::with_capacity(samples);
    let mut weights = Vec::with_capacity(samples);
    for (n, map) in pieces.iter() {
        for i in 1..*n {
            let (s, ds) = psi(i as f64 / *n as f64);
            let (l, dl) = map(s);
            nodes.push(l);
            weights.push(dl * (ds / *n as f64));
        }
    }
    let length = 0.5 * std::f64::consts::PI * delta + (big_r - delta);
    Ok(ContourRule { nodes, weights, length })
}

/// (1 / 2 pi i) int e^{lambda t} f(lambda) dlambda over the full contour for
/// f with f(conj lambda) = conj f(lambda); `f(j)` is the value at node j.
pub fn inverse_laplace(rule: &ContourRule, f: impl Fn(usize) -> C64, t: f64) -> f64 {
    let mut s = c(0.0);
    for (j, (&l, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        s += w * (l * t).exp() * f(j);
    }
    s.im / std::f64::consts::PI
}

/// Incoming characteristic families on one side of the shock with their
/// weights in the excited term.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExcitedTerm {
    /// effective diffusion (L_p L B R_p) at u- and u+
    pub beta_minus: f64,
    pub beta_plus: f64,
    /// (|a_k|, weight) for a_k- > 0 and a_k+ < 0
    pub incoming_minus: Vec<(f64, f64)>,
    pub incoming_plus: Vec<(f64, f64)>,
}

/// e_k(y, t) for y < 0 and speed a > 0.
pub fn e_k(y: f64, t: f64, a: f64, beta: f64) -> f64 {
    let s = (4.0 * beta * t).sqrt();
    errfn((y + a * t) / s) - errfn((y - a * t) / s)
}

/// d e_k / dy.
pub fn e_k_y(y: f64, t: f64, a: f64, beta: f64) -> f64 {
    let s = (4.0 * beta * t).sqrt();
    let g = |z: f64| (-z * z).exp() / (std::f64::consts::PI.sqrt() * s);
    g((y + a * t) / s) - g((y - a * t) / s)
}

impl ExcitedTerm {
    pub fn new(solver: &EvansSolver) -> Result<Self> {
        let frame = &solver.frame;
        let model = &frame.profile.model;
        let shock = &frame.profile.shock;
        let n = frame.n;
        let jump: Vec<f64> = (0..n).map(|i| shock.u_plus[i] - shock.u_minus[i]).collect();
        let em = eig_real(&model.jacobian_f(&shock.u_minus))?;
        let ep = eig_real(&model.jacobian_f(&shock.u_plus))?;
        let beta = |e: &RealEigen, u: &[f64]| {
            let k = frame.p - 1;
            (e.left.row(k) * model.lb(u) * e.right.column(k))[(0, 0)]
        };
        // r_k = V_k [u] + sum of outgoing modes on both sides
        let mut basis = vec![jump.clone()];
        for j in 0..n {
            if em.values[j] < 0.0 {
                basis.push(em.right.column(j).iter().cloned().collect());
            }
            if ep.values[j] > 0.0 {
                basis.push(ep.right.column(j).iter().cloned().collect());
            }
        }
        if basis.len() != n {
            return Err(Error::Degeneracy { hypothesis: "H0".into(), detail: "shock is not of Lax type".into() });
        }
        let m = RMat::from_fn(n, n, |i, j| basis[j][i]);
        let lu = m.lu();
        let weight = |e: &RealEigen, k: usize| -> Result<f64> {
            let rk = e.right.column(k).into_owned();
            let v = lu
                .solve(&rk)
                .ok_or(Error::Degeneracy { hypothesis: "H0".into(), detail: "singular Liu decomposition".into() })?;
            Ok(v[0] * e.left[(k, 0)])
        };
        let mut incoming_minus = Vec::new();
        let mut incoming_plus = Vec::new();
        for k in 0..n {
            if em.values[k] > 0.0 {
                incoming_minus.push((em.values[k], weight(&em, k)?));
            }
            if ep.values[k] < 0.0 {
                incoming_plus.push((-ep.values[k], weight(&ep, k)?));
            }
        }
        Ok(ExcitedTerm {
            beta_minus: beta(&em, &shock.u_minus),
            beta_plus: beta(&ep, &shock.u_plus),
            incoming_minus,
            incoming_plus,
        })
    }

    /// Sum of the e_k factors and weights for a source at y.
    pub fn time_factor(&self, y: f64, t: f64) -> f64 {
        let (list, beta, yy) = if y < 0.0 {
            (&self.incoming_minus, self.beta_minus, y)
        } else {
            (&self.incoming_plus, self.beta_plus, -y)
        };
        list.iter().map(|&(a, w)| w * e_k(yy, t, a, beta)).sum()
    }

    /// Speed of the fastest incoming family on the side of y.
    pub fn center_speed(&self, y: f64) -> f64 {
        let list = if y < 0.0 { &self.incoming_minus } else { &self.incoming_plus };
        let a = list.iter().map(|p| p.0).fold(0.0, f64::max);
        if y < 0.0 {
            a
        } else {
            -a
        }
    }
}

/// E(x, t; y), u-u entry.
pub fn excited_term(solver: &EvansSolver, ex: &ExcitedTerm, x: f64, t: f64, y: f64) -> f64 {
    solver.frame.profile.eval(x).ux[0] * ex.time_factor(y, t)
}

/// G^I on a grid: `gi[iy][it][ix]`.
#[derive(Debug, Clone)]
pub struct GreenGrid {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub ys: Vec<f64>,
    pub gi: Vec<Vec<Vec<f64>>>,
    /// max |G_lambda(x, y)| over the contour nodes
    pub max_kernel: f64,
    pub contour_length: f64,
}

pub fn low_freq_green_grid(
    solver: &EvansSolver,
    xs: &[f64],
    ts: &[f64],
    ys: &[f64],
    r: f64,
    big_r: f64,
    samples: usize,
) -> Result<GreenGrid> {
    let rule = contour_rule(r, big_r, samples)?;
    let reach = ys.iter().map(|y| y.abs()).fold(0.0, f64::max);
    // per node: kernel u-u entries for each y
    let per_node: Vec<Vec<Vec<C64>>> = rule
        .nodes
        .par_iter()
        .map(|&l| -> Result<Vec<Vec<C64>>> {
            let basis = ResolventBasis::with_reach(solver, l, reach)?;
            ys.iter()
                .map(|&y| {
                    let k = basis.kernel(solver, y, xs)?;
                    Ok(k.re_values.iter().zip(&k.im_values).map(|(re, im)| C64::new(re[0], im[0])).collect())
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let max_kernel = per_node.iter().flatten().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let mut gi = vec![vec![vec![0.0; xs.len()]; ts.len()]; ys.len()];
    for (iy, gy) in gi.iter_mut().enumerate() {
        for (it, row) in gy.iter_mut().enumerate() {
            let t = ts[it];
            for (ix, v) in row.iter_mut().enumerate() {
                *v = inverse_laplace(&rule, |j| per_node[j][iy][ix], t);
            }
        }
    }
    if gi.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Quadrature(samples));
    }
    Ok(GreenGrid { xs: xs.to_vec(), ts: ts.to_vec(), ys: ys.to_vec(), gi, max_kernel, contour_length: rule.length })
}

/// Single-point value of G^I together with E.
pub fn low_freq_green(
    solver: &EvansSolver,
    x: f64,
    t: f64,
    y: f64,
    r: f64,
    big_r: f64,
    samples: usize,
) -> Result<GreenSample> {
    let g = low_freq_green_grid(solver, &[x], &[t], &[y], r, big_r, samples)?;
    let ex = ExcitedTerm::new(solver)?;
    Ok(GreenSample { x, y, t, gi: g.gi[0][0][0], e: excited_term(solver, &ex, x, t, y), envelope_params: [0.0, 0.0] })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub y: f64,
    pub t: f64,
    pub center: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

impl EnvelopeFit {
    pub fn at(&self, x: f64) -> f64 {
        self.c / self.t.sqrt() * (-(x - self.center).powi(2) / (self.m * self.t)).exp()
    }
}

/// Points below this fraction of the peak are not required to lie under
/// the envelope.
pub const ENVELOPE_FLOOR: f64 = 1e-3;

/// Smallest-mass Gaussian C t^{-1/2} exp(-(x - center)^2 / (M t)) above |d|:
/// for each M the least admissible C, then M minimizing C sqrt(M).
pub fn fit_envelope(xs: &[f64], d: &[f64], t: f64, center: f64) -> Option<(f64, f64)> {
    let peak = d.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return None;
    }
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(d).filter(|(_, v)| v.abs() >= ENVELOPE_FLOOR * peak).map(|(&x, &v)| (x, v.abs())).collect();
    let c_of =
        |m: f64| pts.iter().map(|&(x, v)| v * t.sqrt() * ((x - center).powi(2) / (m * t)).exp()).fold(0.0, f64::max);
    let (lm, _) = golden_section(
        |lm| {
            let m = lm.exp();
            (c_of(m) * m.sqrt()).ln()
        },
        (1e-2f64).ln(),
        (1e4f64).ln(),
        1e-6,
    );
    let m = lm.exp();
    Some((c_of(m), m))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreenReport {
    pub samples: usize,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub excited: ExcitedTerm,
    pub envelopes: Vec<EnvelopeFit>,
    /// max over t of |int G^I dx| for each y
    pub mass_bound: Vec<f64>,
    pub contour_length: f64,
    pub max_kernel: f64,
    #[serde(skip)]
    pub samples_grid: Vec<GreenSample>,
}

#[derive(Debug, Clone)]
pub struct GreenOptions {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub ys: Vec<f64>,
    pub r: f64,
    pub big_r: f64,
    pub samples: usize,
}

impl GreenOptions {
    /// 5 sources, 7 times, 201 nodes on [-60, 60].
    pub fn standard(eps: f64) -> Self {
        GreenOptions {
            xs: (0..201).map(|i| -60.0 + 0.6 * i as f64).collect(),
            ts: vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0],
            ys: vec![-10.0, -5.0, -2.0, 2.0, 5.0],
            r: 1e-2 * eps * eps,
            big_r: 2.0 * eps,
            samples: 128,
        }
    }
}

pub fn green_report(solver: &EvansSolver, opts: &GreenOptions) -> Result<GreenReport> {
    let grid = low_freq_green_grid(solver, &opts.xs, &opts.ts, &opts.ys, opts.r, opts.big_r, opts.samples)?;
    let ex = ExcitedTerm::new(solver)?;
    let ux: Vec<f64> = opts.xs.iter().map(|&x| solver.frame.profile.eval(x).ux[0]).collect();
    let dx = opts.xs.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>();
    let mut envelopes = Vec::new();
    let mut samples_grid = Vec::new();
    let mut mass_bound = Vec::new();
    for (iy, &y) in opts.ys.iter().enumerate() {
        let mut mass: f64 = 0.0;
        for (it, &t) in opts.ts.iter().enumerate() {
            let g = &grid.gi[iy][it];
            let tf = ex.time_factor(y, t);
            let e: Vec<f64> = ux.iter().map(|u| u * tf).collect();
            let d: Vec<f64> = g.iter().zip(&e).map(|(a, b)| a - b).collect();
            let center = y + ex.center_speed(y) * t;
            let fit = fit_envelope(&opts.xs, &d, t, center).map(|(cc, m)| EnvelopeFit { y, t, center, c: cc, m });
            if let Some(f) = fit {
                envelopes.push(f);
            }
            let params = fit.map(|f| [f.c, f.m]).unwrap_or([0.0, 0.0]);
            let m: f64 = (0..dx.len()).map(|i| 0.5 * (g[i] + g[i + 1]) * dx[i]).sum();
            mass = mass.max(m.abs());
            for (ix, &x) in opts.xs.iter().enumerate() {
                samples_grid.push(GreenSample { x, y, t, gi: g[ix], e: e[ix], envelope_params: params });
            }
        }
        mass_bound.push(mass);
    }
    Ok(GreenReport {
        samples: opts.samples,
        r: opts.r,
        big_r: opts.big_r,
        excited: ex,
        envelopes,
        mass_bound,
        contour_length: grid.contour_length,
        max_kernel: grid.max_kernel,
        samples_grid,
    })
}

/// L1 and Linf norms in y < 0 of d e_k / dy at each t, and the fitted
/// exponent of the Linf norm.
pub fn errfn_derivative_decay(a: f64, beta: f64, ts: &[f64]) -> (Vec<(f64, f64)>, f64) {
    let norms: Vec<(f64, f64)> = ts
        .iter()
        .map(|&t| {
            let span = 2.0 * a * t + 20.0 * (beta * t).sqrt();
            let n = 20000;
            let h = span / n as f64;
            let mut l1 = 0.0;
            let mut linf: f64 = 0.0;
            for i in 0..=n {
                let y = -span + h * i as f64;
                let v = e_k_y(y, t, a, beta).abs();
                l1 += v * h * if i == 0 || i == n { 0.5 } else { 1.0 };
                linf = linf.max(v);
            }
            (l1, linf)
        })
        .collect();
    let lx: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = norms.iter().map(|n| n.1.ln()).collect();
    (norms, line_fit(&lx, &ly).slope)
}
