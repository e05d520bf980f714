//! Argument-principle zero counts on the semi-annulus and the small circle.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EvansSolver, EvansValue};
use crate::error::{Error, Result};
use crate::linalg::{c, C64};
use crate::numerics::accumulate_argument;
use crate::spectral::Side;

const MAX_DEPTH: usize = 12;

/// Closed contour parametrized by t in [0, 1).
pub trait Contour: Sync {
    fn at(&self, t: f64) -> C64;
}

/// Boundary of {Re lambda >= 0, r <= |lambda| <= R}: big arc from -iR to iR,
/// down the imaginary axis to ir, small arc back through r to -ir, then
/// down to -iR. The four pieces get equal parameter length; the straight
/// pieces are spaced geometrically in |Im lambda|.
#[derive(Debug, Clone, Copy)]
pub struct SemiAnnulus {
    pub r: f64,
    pub big_r: f64,
}

impl Contour for SemiAnnulus {
    fn at(&self, t: f64) -> C64 {
        let t = t.rem_euclid(1.0);
        let piece = (t * 4.0).floor() as usize;
        let s = t * 4.0 - piece as f64;
        let ratio = self.big_r / self.r;
        match piece {
            0 => C64::from_polar(self.big_r, -PI / 2.0 + PI * s),
            1 => C64::new(0.0, self.big_r * ratio.powf(-s)),
            2 => C64::from_polar(self.r, PI / 2.0 - PI * s),
            _ => C64::new(0.0, -self.r * ratio.powf(s)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Circle {
    pub center: C64,
    pub radius: f64,
}

impl Contour for Circle {
    fn at(&self, t: f64) -> C64 {
        self.center + C64::from_polar(self.radius, 2.0 * PI * t)
    }
}

pub fn semi_annulus(r: f64, big_r: f64) -> SemiAnnulus {
    SemiAnnulus { r, big_r }
}

pub fn small_circle(r: f64) -> Circle {
    Circle { center: c(0.0), radius: r }
}

/// Samples of one or more functions along a contour after adaptive
/// refinement; `values[j]` and `winding[j]` belong to channel j.
#[derive(Debug, Clone)]
pub struct ContourScan {
    pub ts: Vec<f64>,
    pub values: Vec<Vec<EvansValue>>,
    pub winding: Vec<i64>,
    pub refinements: usize,
    pub depth: usize,
    pub max_jump: f64,
}

fn jump(a: &EvansValue, b: &EvansValue) -> f64 {
    let rho = a.ratio(b);
    (rho - c(1.0)).norm() / rho.norm().min(1.0)
}

/// Sample `f` on `samples` equispaced parameters, bisect any segment whose
/// relative jump exceeds one half in any channel, and count the winding of
/// each channel's mantissa.
pub fn scan<F>(contour: &dyn Contour, samples: usize, f: F) -> Result<ContourScan>
where
    F: Fn(C64) -> Result<Vec<EvansValue>> + Sync,
{
    let mut ts: Vec<f64> = (0..samples).map(|k| k as f64 / samples as f64).collect();
    let mut rows: Vec<Vec<EvansValue>> = ts.par_iter().map(|&t| f(contour.at(t))).collect::<Result<_>>()?;
    let channels = rows[0].len();
    let mut refinements = 0;
    let mut depth = 0;
    let worst =
        |a: &Vec<EvansValue>, b: &Vec<EvansValue>| (0..channels).map(|j| jump(&a[j], &b[j])).fold(0.0, f64::max);
    loop {
        let n = ts.len();
        let bad: Vec<usize> = (0..n).filter(|&k| !(worst(&rows[k], &rows[(k + 1) % n]) <= 0.5)).collect();
        if bad.is_empty() {
            break;
        }
        if depth == MAX_DEPTH {
            let l = contour.at(ts[bad[0]]);
            return Err(Error::ZeroOnContour { re: l.re, im: l.im });
        }
        depth += 1;
        let mids: Vec<f64> = bad
            .iter()
            .map(|&k| {
                let t1 = if k + 1 == n { 1.0 } else { ts[k + 1] };
                0.5 * (ts[k] + t1)
            })
            .collect();
        let new: Vec<Vec<EvansValue>> = mids.par_iter().map(|&t| f(contour.at(t))).collect::<Result<_>>()?;
        refinements += mids.len();
        let mut merged: Vec<(f64, Vec<EvansValue>)> =
            ts.into_iter().zip(rows).chain(mids.into_iter().zip(new)).collect();
        merged.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        ts = merged.iter().map(|m| m.0).collect();
        rows = merged.into_iter().map(|m| m.1).collect();
    }
    let n = ts.len();
    let max_jump = (0..n).map(|k| worst(&rows[k], &rows[(k + 1) % n])).fold(0.0, f64::max);
    let mut values = vec![Vec::with_capacity(n); channels];
    for row in rows {
        for (j, v) in row.into_iter().enumerate() {
            values[j].push(v);
        }
    }
    let mut winding = Vec::with_capacity(channels);
    for vals in &values {
        let mantissas: Vec<C64> = vals.iter().map(|v| v.mantissa()).collect();
        winding.push(accumulate_argument(&mantissas)?.winding);
    }
    Ok(ContourScan { ts, values, winding, refinements, depth, max_jump })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindingReport {
    pub winding_minus: i64,
    pub winding_plus: i64,
    pub circle_winding_minus: i64,
    pub circle_winding_plus: i64,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub samples: usize,
    pub refinements: usize,
    pub refinement_depth: usize,
    /// dD-/dlambda at 0
    #[serde(rename = "dD0")]
    pub dd0: [f64; 2],
    pub dd0_abs: f64,
    pub d0_abs: f64,
    pub threshold: f64,
    pub certified: bool,
    #[serde(skip)]
    pub contour: Vec<C64>,
    #[serde(skip)]
    pub values_minus: Vec<EvansValue>,
    #[serde(skip)]
    pub values_plus: Vec<EvansValue>,
}

impl WindingReport {
    /// Rows `re_lambda,im_lambda,re_D,im_D,log_scale,side`.
    pub fn csv_rows(&self) -> Vec<(f64, f64, f64, f64, f64, &'static str)> {
        let mut out = Vec::new();
        for (vals, tag) in [(&self.values_minus, "minus"), (&self.values_plus, "plus")] {
            for v in vals.iter() {
                out.push((v.re_lambda, v.im_lambda, v.re_d, v.im_d, v.log_scale, tag));
            }
        }
        out
    }
}

/// Winding of D- and D+ on the semi-annulus and on the circle |lambda| = r,
/// plus the simple-zero certificate |dD-(0)| > 1e-6 scale.
pub fn winding(solver: &EvansSolver, r: f64, big_r: f64, samples: usize) -> Result<WindingReport> {
    let ann = semi_annulus(r, big_r);
    let both = |l: C64| -> Result<Vec<EvansValue>> {
        let (m, p) = solver.evans_pair(l)?;
        Ok(vec![m, p])
    };
    let mut a = scan(&ann, samples, both)?;
    let circle = small_circle(r);
    let cs = scan(&circle, (samples / 4).max(16), both)?;
    let scale = solver.scale().max(r);
    let dd0 = solver.derivative_at_zero(Side::Minus, r)?;
    let d0 = solver.evans_d(c(0.0), Side::Minus)?.value();
    let threshold = 1e-6 * scale;
    let certified = a.winding[0] == 0 && cs.winding[0] == 1 && dd0.norm() > threshold;
    let contour: Vec<C64> = a.ts.iter().map(|&t| ann.at(t)).collect();
    let values_plus = a.values.pop().unwrap();
    let values_minus = a.values.pop().unwrap();
    Ok(WindingReport {
        winding_minus: a.winding[0],
        winding_plus: a.winding[1],
        circle_winding_minus: cs.winding[0],
        circle_winding_plus: cs.winding[1],
        r,
        big_r,
        samples,
        refinements: a.refinements + cs.refinements,
        refinement_depth: a.depth.max(cs.depth),
        dd0: [dd0.re, dd0.im],
        dd0_abs: dd0.norm(),
        d0_abs: d0.norm(),
        threshold,
        certified,
        contour,
        values_minus,
        values_plus,
    })
}
