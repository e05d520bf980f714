use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ModelSystem;
use crate::error::{Error, Result};
use crate::linalg::{RMat, RVec};
use crate::numerics::nelder_mead;

fn sym_basis(n: usize) -> Vec<RMat> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut m = RMat::zeros(n, n);
            m[(i, j)] = 1.0;
            m[(j, i)] = 1.0;
            out.push(m);
        }
    }
    out
}

fn skew_entries(m: &RMat) -> Vec<f64> {
    let n = m.nrows();
    let mut v = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            v.push(m[(i, j)] - m[(j, i)]);
        }
    }
    v
}

fn min_eig_sym(m: &RMat) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(s).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Symmetric A0 with A0 A and A0 L B symmetric, chosen inside the null
/// space of those linear constraints to maximize its smallest eigenvalue;
/// normalized to unit Frobenius norm.
pub fn numerical_symmetrizer(model: &ModelSystem, u: &[f64]) -> Result<RMat> {
    let n = model.n;
    let a = model.jacobian_f(u);
    let lb = model.lb(u);
    let basis = sym_basis(n);
    let p = basis.len();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let cols: Vec<Vec<f64>> = basis
        .iter()
        .map(|s| {
            let mut c = skew_entries(&(s * &a));
            c.extend(skew_entries(&(s * &lb)));
            c
        })
        .collect();
    for r in 0..cols[0].len() {
        rows.push(cols.iter().map(|c| c[r]).collect());
    }
    let cm = RMat::from_fn(rows.len(), p, |i, j| rows[i][j]);
    let gram = cm.transpose() * &cm;
    let se = SymmetricEigen::new(gram);
    let mx = se.eigenvalues.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let null: Vec<RVec> =
        (0..p).filter(|&i| se.eigenvalues[i] <= 1e-12 * mx).map(|i| se.eigenvectors.column(i).into_owned()).collect();
    if null.is_empty() {
        return Err(Error::Degeneracy { hypothesis: "S1".into(), detail: "no symmetrizer".into() });
    }
    let build = |z: &[f64]| -> RMat {
        let mut c = RVec::zeros(p);
        for (k, v) in null.iter().enumerate() {
            c += v * z[k];
        }
        let mut m = RMat::zeros(n, n);
        for (k, b) in basis.iter().enumerate() {
            m += b * c[k];
        }
        let nrm = m.norm();
        if nrm > 0.0 {
            m / nrm
        } else {
            m
        }
    };
    let best = if null.len() == 1 {
        let pos = build(&[1.0]);
        let neg = build(&[-1.0]);
        if min_eig_sym(&pos) >= min_eig_sym(&neg) {
            pos
        } else {
            neg
        }
    } else {
        let d = null.len();
        let mut best_z = vec![0.0; d];
        let mut best_v = f64::NEG_INFINITY;
        for s in 0..(2 * d) {
            let mut z0 = vec![0.0; d];
            z0[s / 2] = if s % 2 == 0 { 1.0 } else { -1.0 };
            let (z, v) = nelder_mead(|z| -min_eig_sym(&build(z)), &z0, 0.3, 2000, 1e-14);
            if -v > best_v {
                best_v = -v;
                best_z = z;
            }
        }
        build(&best_z)
    };
    Ok(best)
}

/// Constant skew-symmetric compensator K, stored by its upper-triangle
/// parameters so K + K^T = 0 exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Compensator {
    pub n: usize,
    pub params: Vec<f64>,
    pub theta: f64,
}

impl Compensator {
    pub fn k(&self) -> RMat {
        skew_from(self.n, &self.params)
    }
}

fn skew_from(n: usize, params: &[f64]) -> RMat {
    let mut k = RMat::zeros(n, n);
    let mut idx = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            k[(i, j)] = params[idx];
            k[(j, i)] = -params[idx];
            idx += 1;
        }
    }
    k
}

/// Maximize theta = min over states of the smallest eigenvalue of
/// Re(K A + A0 L B) over constant skew K.
pub fn find_compensator(model: &ModelSystem, states: &[Vec<f64>], seed: u64) -> Result<Compensator> {
    let n = model.n;
    let mut data = Vec::with_capacity(states.len());
    for u in states {
        let a0 = model.symmetrizer(u)?;
        data.push((model.jacobian_f(u), &a0 * model.lb(u)));
    }
    let theta_of = |params: &[f64]| -> f64 {
        let k = skew_from(n, params);
        data.iter().map(|(a, d)| min_eig_sym(&(&k * a + d))).fold(f64::INFINITY, f64::min)
    };
    let np = n * (n - 1) / 2;
    let zero = vec![0.0; np];
    let theta0 = theta_of(&zero);
    if np == 0 || theta0 > 1e-8 {
        if theta0 > 0.0 {
            return Ok(Compensator { n, params: zero, theta: theta0 });
        }
        return Err(Error::CompensatorNotFound { best: theta0 });
    }
    let scale = data.iter().map(|(a, d)| d.norm() / a.norm().max(1e-12)).fold(0.0, f64::max).max(1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (zero.clone(), theta0);
    for _ in 0..20 {
        let x0: Vec<f64> = (0..np).map(|_| rng.gen_range(-1.0..1.0) * scale).collect();
        let (x, v) = nelder_mead(|p| -theta_of(p), &x0, 0.5 * scale, 4000, 1e-15);
        if -v > best.1 {
            best = (x, -v);
        }
    }
    let theta = theta_of(&best.0);
    if theta > 0.0 {
        Ok(Compensator { n, params: best.0, theta })
    } else {
        Err(Error::CompensatorNotFound { best: theta })
    }
}
