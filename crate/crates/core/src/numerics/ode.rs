//! Dormand-Prince 5(4) integrator over real or complex state vectors with
//! cubic Hermite dense output and optional renormalization for linear
//! problems.

use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait Scalar:
    Copy + Send + Sync + Debug + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
    /// Rescale the state to unit norm when it leaves [1e-10, 1e10]; only
    /// meaningful for linear right-hand sides.
    pub renormalize: bool,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_max: f64::INFINITY,
            h_min: 1e-12,
            max_steps: 2_000_000,
            renormalize: false,
        }
    }
}

impl OdeOptions {
    pub fn tol(rtol: f64, atol: f64) -> Self {
        OdeOptions { rtol, atol, ..Default::default() }
    }
    pub fn linear(mut self) -> Self {
        self.renormalize = true;
        self
    }
    pub fn with_h_max(mut self, h: f64) -> Self {
        self.h_max = h;
        self
    }
}

/// Accepted steps with values and derivatives for Hermite interpolation.
/// The true state at node i is `ys[i] * exp(log_scale[i])`.
#[derive(Debug, Clone)]
pub struct Trajectory<S: Scalar> {
    pub xs: Vec<f64>,
    pub ys: Vec<Vec<S>>,
    pub fs: Vec<Vec<S>>,
    pub log_scale: Vec<f64>,
    pub rejected: usize,
}

impl<S: Scalar> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.xs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
    pub fn last(&self) -> (&[S], f64) {
        let i = self.xs.len() - 1;
        (&self.ys[i], self.log_scale[i])
    }
    pub fn x_end(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    fn locate(&self, x: f64) -> usize {
        // interval index i with x between xs[i] and xs[i+1]
        let n = self.xs.len();
        let forward = self.xs[n - 1] >= self.xs[0];
        let (mut lo, mut hi) = (0usize, n - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            let before = if forward { self.xs[mid] <= x } else { self.xs[mid] >= x };
            if before {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Hermite interpolant at x, returned with its log scale.
    pub fn eval(&self, x: f64) -> (Vec<S>, f64) {
        let n = self.xs.len();
        if n == 1 {
            return (self.ys[0].clone(), self.log_scale[0]);
        }
        let i = self.locate(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let th = ((x - x0) / h).clamp(0.0, 1.0);
        let rel = (self.log_scale[i + 1] - self.log_scale[i]).exp();
        let h00 = 2.0 * th.powi(3) - 3.0 * th * th + 1.0;
        let h10 = th.powi(3) - 2.0 * th * th + th;
        let h01 = -2.0 * th.powi(3) + 3.0 * th * th;
        let h11 = th.powi(3) - th * th;
        let y = (0..self.ys[i].len())
            .map(|k| {
                self.ys[i][k] * h00
                    + self.fs[i][k] * (h10 * h)
                    + self.ys[i + 1][k] * (h01 * rel)
                    + self.fs[i + 1][k] * (h11 * h * rel)
            })
            .collect();
        (y, self.log_scale[i])
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Work<S> {
    k: [Vec<S>; 7],
    tmp: Vec<S>,
    ynew: Vec<S>,
}

impl<S: Scalar> Work<S> {
    fn new(n: usize) -> Self {
        let z = vec![S::default(); n];
        Work {
            k: [z.clone(), z.clone(), z.clone(), z.clone(), z.clone(), z.clone(), z.clone()],
            tmp: z.clone(),
            ynew: z,
        }
    }
}

/// One Dormand-Prince step from (x, y) with k[0] = f(x, y) already set.
/// Leaves the 5th-order solution in `ynew` and f(x+h, ynew) in k[6].
fn dp_step<S: Scalar, F: FnMut(f64, &[S], &mut [S])>(f: &mut F, x: f64, y: &[S], h: f64, w: &mut Work<S>) {
    let n = y.len();
    macro_rules! stage {
        ($dst:expr, $cx:expr, $($a:expr => $ki:expr),+) => {{
            for i in 0..n {
                let mut s = y[i];
                $( s = s + w.k[$ki][i] * (h * $a); )+
                w.tmp[i] = s;
            }
            let (head, tail) = w.k.split_at_mut($dst);
            let _ = head;
            f(x + $cx * h, &w.tmp, &mut tail[0]);
        }};
    }
    stage!(1, C2, A21 => 0);
    stage!(2, C3, A31 => 0, A32 => 1);
    stage!(3, C4, A41 => 0, A42 => 1, A43 => 2);
    stage!(4, C5, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
    stage!(5, 1.0, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);
    for i in 0..n {
        w.ynew[i] = y[i]
            + w.k[0][i] * (h * B1)
            + w.k[2][i] * (h * B3)
            + w.k[3][i] * (h * B4)
            + w.k[4][i] * (h * B5)
            + w.k[5][i] * (h * B6);
    }
    let (head, tail) = w.k.split_at_mut(6);
    let _ = head;
    f(x + h, &w.ynew, &mut tail[0]);
}

fn error_norm<S: Scalar>(y: &[S], w: &Work<S>, h: f64, o: &OdeOptions) -> f64 {
    let n = y.len();
    let mut acc = 0.0;
    for i in 0..n {
        let e = w.k[0][i] * (h * E1)
            + w.k[2][i] * (h * E3)
            + w.k[3][i] * (h * E4)
            + w.k[4][i] * (h * E5)
            + w.k[5][i] * (h * E6)
            + w.k[6][i] * (h * E7);
        let sc = o.atol + o.rtol * y[i].modulus().max(w.ynew[i].modulus());
        let r = e.modulus() / sc;
        acc += r * r;
    }
    (acc / n.max(1) as f64).sqrt()
}

fn vec_norm<S: Scalar>(y: &[S]) -> f64 {
    y.iter().map(|v| v.modulus().powi(2)).sum::<f64>().sqrt()
}

/// Adaptive integration from x0 to x1 (either direction).
pub fn integrate<S, F>(mut f: F, x0: f64, x1: f64, y0: &[S], o: &OdeOptions) -> Result<Trajectory<S>>
where
    S: Scalar,
    F: FnMut(f64, &[S], &mut [S]),
{
    let n = y0.len();
    let span = x1 - x0;
    let dir = if span >= 0.0 { 1.0 } else { -1.0 };
    let mut w = Work::new(n);
    let mut y = y0.to_vec();
    let mut ls = 0.0;
    f(x0, &y, &mut w.k[0]);
    let mut traj =
        Trajectory { xs: vec![x0], ys: vec![y.clone()], fs: vec![w.k[0].clone()], log_scale: vec![0.0], rejected: 0 };
    if span == 0.0 {
        return Ok(traj);
    }
    let mut h = o.h_init.unwrap_or_else(|| (span.abs() / 100.0).min(o.h_max)).abs().min(span.abs());
    let mut x = x0;
    let mut steps = 0usize;
    loop {
        let remaining = (x1 - x) * dir;
        if remaining <= 1e-15 * (1.0 + x1.abs()) {
            break;
        }
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        h = h.min(o.h_max);
        dp_step(&mut f, x, &y, dir * h, &mut w);
        let err = error_norm(&y, &w, dir * h, o);
        if !err.is_finite() {
            h *= 0.25;
            traj.rejected += 1;
            if h < o.h_min {
                return Err(Error::Stiffness { x, h });
            }
            continue;
        }
        if err <= 1.0 {
            x = if last { x1 } else { x + dir * h };
            std::mem::swap(&mut y, &mut w.ynew);
            w.k.swap(0, 6);
            if o.renormalize {
                let nrm = vec_norm(&y);
                if nrm > 1e10 || (nrm < 1e-10 && nrm > 0.0) {
                    let s = 1.0 / nrm;
                    for v in y.iter_mut() {
                        *v = *v * s;
                    }
                    for v in w.k[0].iter_mut() {
                        *v = *v * s;
                    }
                    ls += nrm.ln();
                }
            }
            traj.xs.push(x);
            traj.ys.push(y.clone());
            traj.fs.push(w.k[0].clone());
            traj.log_scale.push(ls);
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
            if last {
                break;
            }
        } else {
            traj.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < o.h_min {
                return Err(Error::Stiffness { x, h });
            }
        }
        steps += 1;
        if steps > o.max_steps {
            return Err(Error::Stiffness { x, h });
        }
    }
    Ok(traj)
}

/// Fixed-step Dormand-Prince (5th-order solution), returning the end state.
pub fn integrate_fixed<S, F>(mut f: F, x0: f64, x1: f64, y0: &[S], steps: usize) -> Vec<S>
where
    S: Scalar,
    F: FnMut(f64, &[S], &mut [S]),
{
    let n = y0.len();
    let mut w = Work::new(n);
    let mut y = y0.to_vec();
    let h = (x1 - x0) / steps as f64;
    let mut x = x0;
    for _ in 0..steps {
        f(x, &y, &mut w.k[0]);
        dp_step(&mut f, x, &y, h, &mut w);
        std::mem::swap(&mut y, &mut w.ynew);
        x += h;
    }
    y
}

/// Classical RK4 with a fixed step, used by oracles and transport.
pub fn rk4<S, F>(mut f: F, x0: f64, x1: f64, y0: &[S], steps: usize) -> Vec<S>
where
    S: Scalar,
    F: FnMut(f64, &[S], &mut [S]),
{
    let n = y0.len();
    let h = (x1 - x0) / steps as f64;
    let mut y = y0.to_vec();
    let mut k1 = vec![S::default(); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut t = k1.clone();
    let mut x = x0;
    for _ in 0..steps {
        f(x, &y, &mut k1);
        for i in 0..n {
            t[i] = y[i] + k1[i] * (0.5 * h);
        }
        f(x + 0.5 * h, &t, &mut k2);
        for i in 0..n {
            t[i] = y[i] + k2[i] * (0.5 * h);
        }
        f(x + 0.5 * h, &t, &mut k3);
        for i in 0..n {
            t[i] = y[i] + k3[i] * h;
        }
        f(x + h, &t, &mut k4);
        for i in 0..n {
            y[i] = y[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
        x += h;
    }
    y
}
