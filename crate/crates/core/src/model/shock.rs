use serde::{Deserialize, Serialize};

use super::{ModelKind, ModelSystem};
use crate::error::{Error, Result};
use crate::linalg::{eig_real, RVec};

/// Stationary Lax p-shock (u_-, u_+) with speed s = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockTriple {
    pub u_minus: Vec<f64>,
    pub u_plus: Vec<f64>,
    pub s: f64,
    pub p: usize,
    pub epsilon: f64,
}

impl ShockTriple {
    pub fn new(u_minus: Vec<f64>, u_plus: Vec<f64>, p: usize) -> Self {
        let epsilon = u_minus.iter().zip(&u_plus).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        ShockTriple { u_minus, u_plus, s: 0.0, p, epsilon }
    }

    /// Symmetric scalar shock u_- = eps/2, u_+ = -eps/2.
    pub fn hamer(eps: f64) -> Self {
        Self::new(vec![0.5 * eps], vec![-0.5 * eps], 1)
    }

    pub fn jump(&self) -> RVec {
        RVec::from_iterator(self.u_plus.len(), self.u_plus.iter().zip(&self.u_minus).map(|(a, b)| a - b))
    }

    /// Stationary 1-shock of amplitude eps for the radiating gas, placed
    /// around the sonic state rho = 1, theta = 1, u = c.
    pub fn euler(model: &ModelSystem, eps: f64) -> Result<Self> {
        let gamma = match model.kind {
            ModelKind::EulerRad { gamma } => gamma,
            _ => return Err(Error::InvalidInput("euler shock needs the euler_rad model".into())),
        };
        let c = (gamma * (gamma - 1.0)).sqrt();
        let star = [1.0, c, 1.0 + 0.5 * c * c];
        let a = model.jacobian_f(&star);
        let e = eig_real(&a)?;
        let r1: Vec<f64> = e.right.column(0).iter().cloned().collect();
        // orient r1 so that a_1 grows along it
        let h = 1e-6;
        let sp = |t: f64| -> Result<f64> {
            let u: Vec<f64> = star.iter().zip(&r1).map(|(s, r)| s + t * r).collect();
            model.char_speed(&u, 1)
        };
        let dir = if sp(h)? > sp(-h)? { 1.0 } else { -1.0 };
        let build = |tau: f64| -> Result<(Vec<f64>, Vec<f64>)> {
            let um: Vec<f64> = star.iter().zip(&r1).map(|(s, r)| s + dir * tau * r).collect();
            let guess: Vec<f64> = star.iter().zip(&r1).map(|(s, r)| s - dir * tau * r).collect();
            let up = hugoniot_partner(model, &um, &guess)?;
            Ok((um, up))
        };
        // secant on tau for |u+ - u-| = eps
        let amp = |tau: f64| -> Result<f64> {
            let (um, up) = build(tau)?;
            Ok(um.iter().zip(&up).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        };
        let mut t0 = 0.5 * eps;
        let mut t1 = 0.45 * eps;
        let mut f0 = amp(t0)? - eps;
        let mut f1 = amp(t1)? - eps;
        for _ in 0..60 {
            if f1.abs() < 1e-15 * eps.max(1.0) || (f1 - f0) == 0.0 {
                break;
            }
            let t2 = t1 - f1 * (t1 - t0) / (f1 - f0);
            t0 = t1;
            f0 = f1;
            t1 = t2;
            f1 = amp(t1)? - eps;
        }
        let (um, up) = build(t1)?;
        Ok(Self::new(um, up, 1))
    }
}

/// Newton solve of f(v) = f(u_-) started from `guess`.
pub fn hugoniot_partner(model: &ModelSystem, um: &[f64], guess: &[f64]) -> Result<Vec<f64>> {
    let target = model.flux(um);
    let mut v = RVec::from_column_slice(guess);
    for _ in 0..100 {
        let r = model.flux(v.as_slice()) - &target;
        if r.norm() < 1e-15 * (1.0 + target.norm()) {
            break;
        }
        let a = model.jacobian_f(v.as_slice());
        let dv =
            a.lu().solve(&r).ok_or_else(|| Error::ProfileBranch("singular Jacobian on the Hugoniot locus".into()))?;
        v -= dv;
    }
    let r = model.flux(v.as_slice()) - &target;
    if r.norm() > 1e-10 * (1.0 + target.norm()) {
        return Err(Error::ProfileBranch("Hugoniot Newton did not converge".into()));
    }
    if (&v - RVec::from_column_slice(um)).norm() < 1e-8 {
        return Err(Error::ProfileBranch("Hugoniot Newton returned the trivial root".into()));
    }
    Ok(v.as_slice().to_vec())
}
