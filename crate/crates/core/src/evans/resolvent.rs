//! Resolvent kernel of the eigenvalue system.
//!
//! For a source point y < 0 the kernel is
//!
//! ```text
//! G(x, y) = Phi+(x) C+ + W-(x) Ckp    for x > y   (W- only for x < 0)
//!         = Phi-(x) C-                for x < y
//! ```
//!
//! with W- the fast mode left of the sonic point, and the jump
//! G(y+, y) - G(y-, y) = Theta(y)^{-1}; y > 0 is the mirror image.
//!
//! Continued across the sonic point, Phi+ is only defined modulo W-, which
//! also swamps it there, so the continuation is carried modulo the fast
//! direction and used only to match at y. Between y and the sonic point
//! the kernel is integrated from the jump toward x = 0, where W- decays.

use serde::{Deserialize, Serialize};

use super::{EvansSolver, SingularPointData};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec, C64};
use crate::numerics::{integrate, OdeOptions, Trajectory};
use crate::spectral::{ModeClass, Side, SpectralFrame};

/// Trajectory with an additive log scale.
#[derive(Debug, Clone)]
struct Piece {
    traj: Trajectory<C64>,
    base: f64,
}

impl Piece {
    fn eval(&self, x: f64) -> (CVec, f64) {
        let (v, ls) = self.traj.eval(x);
        (CVec::from_vec(v), ls + self.base)
    }
}

/// A decaying solution on its own side of the sonic point, and its
/// continuation (modulo the fast mode) to the other side.
#[derive(Debug, Clone)]
struct Branch {
    outer: Piece,
    /// coefficients in the local basis (slow..., G) at the own-side edge
    local: CVec,
    local_log: f64,
    cont: Piece,
}

/// x|x|^alpha0 G(x) on one side, G carried by the shifted system.
#[derive(Debug, Clone)]
struct Fast {
    side: Side,
    g: Piece,
}

#[derive(Debug, Clone)]
pub struct ResolventBasis {
    pub lambda: C64,
    pub x0: f64,
    pub half_length: f64,
    pub reach: f64,
    sp: SingularPointData,
    plus: Vec<Branch>,
    minus: Vec<Branch>,
    fast_left: Fast,
    fast_right: Fast,
    ode: OdeOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolventKernel {
    pub re_lambda: f64,
    pub im_lambda: f64,
    pub y: f64,
    pub xs: Vec<f64>,
    /// G(x_i, y) in (u, q, p) variables, row-major (n+2)^2 entries
    pub re_values: Vec<Vec<f64>>,
    pub im_values: Vec<Vec<f64>>,
    /// matching coefficients, row-major with n+2 entries per row
    pub c_plus: Vec<[f64; 2]>,
    pub c_kp: Vec<[f64; 2]>,
    pub c_minus: Vec<[f64; 2]>,
    /// max relative error of the jump at y against Theta(y)^{-1}
    pub jump_error: f64,
    /// relative mismatch of the two one-sided limits at the sonic point
    pub sonic_mismatch: f64,
    pub dim: usize,
}

impl ResolventKernel {
    pub fn lambda(&self) -> C64 {
        C64::new(self.re_lambda, self.im_lambda)
    }
    pub fn value(&self, i: usize) -> CMat {
        let d = self.dim;
        CMat::from_fn(d, d, |r, s| C64::new(self.re_values[i][r * d + s], self.im_values[i][r * d + s]))
    }
    /// Column `j` of G(x_i, y) at every grid point.
    pub fn column(&self, j: usize) -> Vec<CVec> {
        (0..self.xs.len()).map(|i| self.value(i).column(j).into_owned()).collect()
    }
}

/// Flux system applied to one or more stacked columns, minus shift/x.
fn flux_rhs(frame: &SpectralFrame, lambda: C64, shift: C64) -> impl Fn(f64, &[C64], &mut [C64]) + '_ {
    move |x, y, out| {
        let m = frame.flux_coefficients(x).at(lambda);
        let d = m.nrows();
        for (yc, oc) in y.chunks(d).zip(out.chunks_mut(d)) {
            for i in 0..d {
                let mut acc = c(0.0);
                for j in 0..d {
                    acc += m[(i, j)] * yc[j];
                }
                oc[i] = if shift == c(0.0) { acc } else { acc - shift / x * yc[i] };
            }
        }
    }
}

fn run(
    frame: &SpectralFrame,
    lambda: C64,
    ode: &OdeOptions,
    v: &CVec,
    a: f64,
    b: f64,
    shift: C64,
    base: f64,
) -> Result<Piece> {
    let nrm = v.norm();
    let traj = integrate(flux_rhs(frame, lambda, shift), a, b, (v / c(nrm)).as_slice(), ode)?;
    Ok(Piece { traj, base: base + nrm.ln() })
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl ResolventBasis {
    pub fn new(solver: &EvansSolver, lambda: C64) -> Result<Self> {
        Self::with_reach(solver, lambda, solver.half_length)
    }

    /// Basis whose continuations across the sonic point extend only to
    /// |x| = reach; kernels are then available for |y| <= reach.
    pub fn with_reach(solver: &EvansSolver, lambda: C64, reach: f64) -> Result<Self> {
        let sp = solver.local_basis(lambda)?;
        let x0 = solver.x0;
        let big_x = solver.half_length;
        let frame = &solver.frame;
        let ode = solver.ode;
        let d = frame.n + 2;
        let shift = sp.alpha0 + c(1.0);
        let reach = reach.clamp(x0, big_x);
        let fast_left =
            Fast { side: Side::Minus, g: run(frame, lambda, &ode, &sp.fast_g(-x0), -x0, -reach, shift, 0.0)? };
        let fast_right = Fast { side: Side::Plus, g: run(frame, lambda, &ode, &sp.fast_g(x0), x0, reach, shift, 0.0)? };

        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for side in [Side::Plus, Side::Minus] {
            let modes = frame.asymptotic_modes(side, lambda)?;
            let far = side.sign() * big_x;
            let near = side.sign() * x0;
            let theta = frame.theta(far).map(c);
            let other_fast = if side == Side::Plus { &fast_left } else { &fast_right };
            for (j, cls) in modes.class.iter().enumerate() {
                let stable = matches!(cls, ModeClass::SlowStable | ModeClass::FastStable);
                if stable != (side == Side::Plus) {
                    continue;
                }
                let expo = modes.mu[j] * far;
                let v = (&theta * modes.v.column(j)) * C64::new(0.0, expo.im).exp();
                let outer = run(frame, lambda, &ode, &v, far, near, c(0.0), expo.re)?;
                let (vn, ln) = outer.eval(near);
                let local = sp.local_matrix(near).lu().solve(&vn).ok_or(Error::Matching(f64::INFINITY))?;
                let mut slow = local.clone();
                slow[d - 1] = c(0.0);
                let start = sp.local_matrix(-near) * slow;
                let stop = -side.sign() * reach;
                let cont = continue_modulo_fast(frame, lambda, &ode, &start, ln, -near, stop, other_fast, shift)?;
                let br = Branch { outer, local, local_log: ln, cont };
                if side == Side::Plus {
                    plus.push(br);
                } else {
                    minus.push(br);
                }
            }
        }
        Ok(ResolventBasis { lambda, x0, half_length: big_x, reach, sp, plus, minus, fast_left, fast_right, ode })
    }

    fn dim(&self) -> usize {
        self.sp.n() + 2
    }

    /// Local expansion inside (-x0, x0): slow part plus the G coefficient
    /// weighted by (x/edge)^{alpha0+1}.
    fn local_eval(&self, coef: &CVec, x: f64) -> CVec {
        let d = self.dim();
        let mut slow = coef.clone();
        slow[d - 1] = c(0.0);
        let mut v = self.sp.local_matrix(x) * slow;
        let g = coef[d - 1];
        if g != c(0.0) && x != 0.0 {
            let edge = x.signum() * self.x0;
            let w = ((self.sp.alpha0 + c(1.0)) * (x / edge).ln()).exp();
            v += self.sp.fast_g(x) * (g * w);
        }
        v
    }

    /// Branch on its own side of the sonic point.
    fn own(&self, br: &Branch, x: f64) -> (CVec, f64) {
        if x.abs() >= self.x0 {
            br.outer.eval(x)
        } else {
            (self.local_eval(&br.local, x), br.local_log)
        }
    }

    /// Branch continued to the other side (|x| >= x0), modulo the fast mode.
    fn continued(&self, br: &Branch, x: f64) -> (CVec, f64) {
        br.cont.eval(x)
    }

    fn fast(&self, f: &Fast, x: f64) -> (CVec, f64) {
        let d = self.dim();
        if x == 0.0 || (x > 0.0) != (f.side == Side::Plus) {
            return (CVec::zeros(d), f64::NEG_INFINITY);
        }
        let (g, ls) = if x.abs() >= self.x0 { f.g.eval(x) } else { (self.sp.fast_g(x), 0.0) };
        let ax = x.abs();
        let fac = self.sp.alpha0 * ax.ln();
        (g * (C64::new(0.0, fac.im).exp() * x.signum()), ls + fac.re + ax.ln())
    }

    /// Kernel with source at y (|y| >= x0) on the grid `xs`.
    pub fn kernel(&self, solver: &EvansSolver, y: f64, xs: &[f64]) -> Result<ResolventKernel> {
        if y.abs() < self.x0 || y.abs() > self.reach {
            return Err(Error::InvalidInput(format!(
                "source point {y} outside [{}, {}] in modulus",
                self.x0, self.reach
            )));
        }
        let d = self.dim();
        let kp = self.plus.len();
        let left = y < 0.0;
        // columns at y; M C = I gives G(y+) - G(y-) = I in flux variables
        let mut cols: Vec<(CVec, f64)> = Vec::with_capacity(d);
        for br in &self.plus {
            cols.push(if left { self.continued(br, y) } else { self.own(br, y) });
        }
        let (fv, fl) = self.fast(if left { &self.fast_left } else { &self.fast_right }, y);
        cols.push((if left { fv } else { -fv }, fl));
        for br in &self.minus {
            let (v, l) = if left { self.own(br, y) } else { self.continued(br, y) };
            cols.push((-v, l));
        }
        let mut m = CMat::zeros(d, d);
        let mut scales = vec![0.0; d];
        for (j, (v, ls)) in cols.iter().enumerate() {
            let nrm = v.norm();
            m.set_column(j, &(v / c(nrm)));
            scales[j] = ls + nrm.ln();
        }
        let det = m.determinant();
        if det.norm() < 1e-12 {
            return Err(Error::NearSingularResolvent(det.norm()));
        }
        let minv = m.try_inverse().ok_or(Error::NearSingularResolvent(0.0))?;
        // C_j = exp(-scale_j) (M^{-1})_j, applied to a column carrying exp(ls)
        let coef_row = |j: usize, ls: f64| -> CMat {
            let f = c((ls - scales[j]).exp());
            CMat::from_fn(1, d, |_, s| minv[(j, s)] * f)
        };

        let sum_own = |brs: &[Branch], offset: usize, x: f64| -> CMat {
            let mut g = CMat::zeros(d, d);
            for (j, br) in brs.iter().enumerate() {
                let (v, ls) = self.own(br, x);
                g += &v * coef_row(offset + j, ls);
            }
            g
        };
        let plus_part = |x: f64| sum_own(&self.plus, 0, x);
        let minus_part = |x: f64| sum_own(&self.minus, kp + 1, x);
        let beyond = |x: f64| if left { minus_part(x) } else { plus_part(x) };
        let across = |x: f64| if left { plus_part(x) } else { minus_part(x) };

        // between y and the sonic point: integrate from the jump toward 0
        let id = CMat::identity(d, d);
        let start = if left { beyond(y) + &id } else { beyond(y) - &id };
        let edge = y.signum() * self.x0;
        let nrm = start.norm();
        let flat: Vec<C64> = start.iter().map(|z| z / nrm).collect();
        let mid = integrate(flux_rhs(&solver.frame, self.lambda, c(0.0)), y, edge, &flat, &self.ode)?;
        let mid = Piece { traj: mid, base: nrm.ln() };
        let (ge, gl) = mid.eval(edge);
        let ge = CMat::from_column_slice(d, d, ge.as_slice());
        let inner = self.sp.local_matrix(edge).lu().solve(&ge).ok_or(Error::Matching(f64::INFINITY))?;
        let between = |x: f64| -> CMat {
            if x.abs() >= self.x0 {
                let (v, ls) = mid.eval(x);
                CMat::from_column_slice(d, d, v.as_slice()) * c(ls.exp())
            } else {
                let mut g = CMat::zeros(d, d);
                for j in 0..d {
                    g.set_column(j, &(self.local_eval(&inner.column(j).into_owned(), x) * c(gl.exp())));
                }
                g
            }
        };
        let flux_kernel = |x: f64| -> CMat {
            if (x - y) * y.signum() >= 0.0 {
                beyond(x)
            } else if x * y > 0.0 {
                between(x)
            } else {
                across(x)
            }
        };
        let theta_inv = |x: f64| -> CMat { solver.frame.theta(x).try_inverse().expect("Theta invertible").map(c) };

        let h = 1e-6 * self.x0;
        let mut re_values = Vec::with_capacity(xs.len());
        let mut im_values = Vec::with_capacity(xs.len());
        for &x in xs {
            let gv = if x == 0.0 {
                (theta_inv(h) * flux_kernel(h) + theta_inv(-h) * flux_kernel(-h)) * c(0.5)
            } else {
                theta_inv(x) * flux_kernel(x)
            };
            let mut re = Vec::with_capacity(d * d);
            let mut im = Vec::with_capacity(d * d);
            for r in 0..d {
                for s in 0..d {
                    re.push(gv[(r, s)].re);
                    im.push(gv[(r, s)].im);
                }
            }
            re_values.push(re);
            im_values.push(im);
        }

        let mut jump = CMat::zeros(d, d);
        for (j, (v, ls)) in cols.iter().enumerate() {
            jump += v * coef_row(j, *ls);
        }
        let ti = theta_inv(y);
        let jump_error = max_abs(&(&ti * jump - &ti)) / max_abs(&ti);
        let g0m = flux_kernel(-h);
        let g0p = flux_kernel(h);
        let sonic_mismatch = max_abs(&(&g0p - &g0m)) / max_abs(&g0p).max(max_abs(&g0m));

        let coef = |r0: usize, r1: usize| -> Vec<[f64; 2]> {
            let mut out = Vec::new();
            for r in r0..r1 {
                for s in 0..d {
                    let z = minv[(r, s)] * (-scales[r]).exp();
                    out.push([z.re, z.im]);
                }
            }
            out
        };
        Ok(ResolventKernel {
            re_lambda: self.lambda.re,
            im_lambda: self.lambda.im,
            y,
            xs: xs.to_vec(),
            re_values,
            im_values,
            c_plus: coef(0, kp),
            c_kp: coef(kp, kp + 1),
            c_minus: coef(kp + 1, d),
            jump_error,
            sonic_mismatch,
            dim: d,
        })
    }
}

/// Carry a solution from a to b modulo the fast mode: with g = G/|G| the
/// representative w orthogonal to g obeys
///
/// ```text
/// w' = (I - g g*) M w - g (G'/|G|)* w,    G' = (M - shift/x) G,
/// ```
///
/// which no longer contains the fast growth.
#[allow(clippy::too_many_arguments)]
fn continue_modulo_fast(
    frame: &SpectralFrame,
    lambda: C64,
    ode: &OdeOptions,
    start: &CVec,
    base: f64,
    a: f64,
    b: f64,
    fast: &Fast,
    shift: C64,
) -> Result<Piece> {
    let unit = |x: f64| -> CVec {
        let (g, _) = fast.g.eval(x);
        let n = g.norm();
        g / c(n)
    };
    let g0 = unit(a);
    let w0 = start - &g0 * g0.dotc(start);
    let rhs = move |x: f64, y: &[C64], out: &mut [C64]| {
        let m = frame.flux_coefficients(x).at(lambda);
        let g = unit(x);
        let w = CVec::from_column_slice(y);
        let mw = &m * &w;
        let dg = &m * &g - &g * (shift / x);
        let r = mw - &g * (g.dotc(&(&m * &w)) + dg.dotc(&w));
        out.copy_from_slice(r.as_slice());
    };
    let nrm = w0.norm();
    let traj = integrate(rhs, a, b, (w0 / c(nrm)).as_slice(), ode)?;
    Ok(Piece { traj, base: base + nrm.ln() })
}

impl EvansSolver {
    pub fn resolvent_kernel(&self, lambda: C64, y: f64, xs: &[f64]) -> Result<ResolventKernel> {
        ResolventBasis::new(self, lambda)?.kernel(self, y, xs)
    }
}
