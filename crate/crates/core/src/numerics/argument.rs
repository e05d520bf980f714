use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArgumentSum {
    pub winding: i64,
    pub turns: f64,
    pub residual: f64,
    /// max over adjacent pairs of |D_{k+1} - D_k| / min(|D_k|, |D_{k+1}|)
    pub max_jump: f64,
}

/// Winding number of a closed sampled curve around 0 from the sum of
/// principal-branch argument increments. The last sample is joined back to
/// the first.
pub fn accumulate_argument(values: &[C64]) -> Result<ArgumentSum> {
    if values.len() < 3 {
        return Err(Error::InvalidInput("need at least three contour samples".into()));
    }
    let mut total = 0.0;
    let mut max_jump: f64 = 0.0;
    let n = values.len();
    for k in 0..n {
        let a = values[k];
        let b = values[(k + 1) % n];
        if a.norm() == 0.0 || b.norm() == 0.0 {
            return Err(Error::ZeroOnContour { re: f64::NAN, im: f64::NAN });
        }
        total += (b / a).arg();
        max_jump = max_jump.max((b - a).norm() / a.norm().min(b.norm()));
    }
    let turns = total / (2.0 * std::f64::consts::PI);
    let winding = turns.round();
    let residual = (turns - winding).abs();
    if residual > 0.05 {
        return Err(Error::InconclusiveWinding(residual));
    }
    Ok(ArgumentSum { winding: winding as i64, turns, residual, max_jump })
}
