//! Small dense linear algebra helpers: complex eigen-decompositions and
//! exterior (compound) algebra on coordinate vectors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(c)
}

/// Eigenvalues with right eigenvectors (columns) and the matching left
/// eigenvectors (rows of `left`, so `left * right = I`).
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<C64>,
    pub right: CMat,
    pub left: CMat,
}

pub fn eig(m: &CMat) -> Result<Eigen> {
    let n = m.nrows();
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::InvalidInput("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let mut y = CMat::zeros(n, n);
    for k in 0..n {
        y[(k, k)] = c(1.0);
        for j in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for i in (j + 1)..=k {
                s += t[(j, i)] * y[(i, k)];
            }
            let mut d = t[(j, j)] - t[(k, k)];
            if d.norm() < 1e-14 * scale {
                d = c(1e-14 * scale);
            }
            y[(j, k)] = -s / d;
        }
    }
    let mut right = &q * y;
    for k in 0..n {
        let nrm = right.column(k).norm();
        right.column_mut(k).scale_mut(1.0 / nrm);
    }
    fix_phase(&mut right);
    let left = right.clone().try_inverse().ok_or_else(|| Error::Degeneracy {
        hypothesis: "S1".into(),
        detail: "eigenvector matrix not invertible".into(),
    })?;
    Ok(Eigen { values, right, left })
}

/// Unit columns with the largest-modulus component made real positive.
pub fn fix_phase(v: &mut CMat) {
    for k in 0..v.ncols() {
        let mut best = 0;
        for i in 0..v.nrows() {
            if v[(i, k)].norm() > v[(best, k)].norm() * (1.0 + 1e-12) {
                best = i;
            }
        }
        let z = v[(best, k)];
        if z.norm() > 0.0 {
            let ph = z.conj() / z.norm();
            for i in 0..v.nrows() {
                v[(i, k)] *= ph;
            }
        }
    }
}

/// Real eigen-decomposition for a matrix with real spectrum, sorted
/// ascending; columns unit length with largest component positive.
#[derive(Debug, Clone)]
pub struct RealEigen {
    pub values: Vec<f64>,
    pub right: RMat,
    pub left: RMat,
}

pub fn eig_real(a: &RMat) -> Result<RealEigen> {
    let e = eig(&to_complex(a))?;
    let n = a.nrows();
    let scale = a.iter().map(|z| z.abs()).fold(0.0, f64::max).max(1.0);
    for z in &e.values {
        if z.im.abs() > 1e-9 * scale {
            return Err(Error::Degeneracy { hypothesis: "S1".into(), detail: format!("complex eigenvalue {z}") });
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| e.values[i].re.partial_cmp(&e.values[j].re).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| e.values[i].re).collect();
    let mut right = RMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        for r in 0..n {
            right[(r, k)] = e.right[(r, i)].re;
        }
        let nrm = right.column(k).norm();
        right.column_mut(k).scale_mut(1.0 / nrm);
        let mut best = 0;
        for r in 0..n {
            if right[(r, k)].abs() > right[(best, k)].abs() * (1.0 + 1e-12) {
                best = r;
            }
        }
        if right[(best, k)] < 0.0 {
            right.column_mut(k).scale_mut(-1.0);
        }
    }
    let left = right
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degeneracy { hypothesis: "S1".into(), detail: "A not diagonalizable".into() })?;
    Ok(RealEigen { values, right, left })
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Sorted k-subsets of 0..n in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn subset_index(n: usize, s: &[usize]) -> usize {
    // rank of a sorted subset in lexicographic order
    let k = s.len();
    let mut idx = 0;
    let mut prev = 0;
    for (pos, &v) in s.iter().enumerate() {
        for j in prev..v {
            idx += binomial(n - j - 1, k - pos - 1);
        }
        prev = v + 1;
    }
    idx
}

/// Sort distinct indices, returning the permutation sign (0 if repeated).
fn sort_sign(v: &mut [usize]) -> f64 {
    let mut sign = 1.0;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    for i in 1..v.len() {
        if v[i] == v[i - 1] {
            return 0.0;
        }
    }
    sign
}

/// Coordinates of v_1 ^ ... ^ v_k (the k x k minors of the column matrix).
pub fn wedge_columns(m: &CMat) -> CVec {
    let (n, k) = m.shape();
    let subs = subsets(n, k);
    let mut out = CVec::zeros(subs.len());
    for (i, s) in subs.iter().enumerate() {
        let sub = CMat::from_fn(k, k, |r, col| m[(s[r], col)]);
        out[i] = sub.determinant();
    }
    out
}

/// Wedge of a in Lambda^i and b in Lambda^j of an n-dimensional space.
pub fn wedge(n: usize, i: usize, a: &CVec, j: usize, b: &CVec) -> CVec {
    let sa = subsets(n, i);
    let sb = subsets(n, j);
    let mut out = CVec::zeros(binomial(n, i + j));
    for (ia, s) in sa.iter().enumerate() {
        if a[ia] == C64::new(0.0, 0.0) {
            continue;
        }
        for (ib, t) in sb.iter().enumerate() {
            let mut u: Vec<usize> = s.iter().chain(t.iter()).copied().collect();
            let sg = sort_sign(&mut u);
            if sg == 0.0 {
                continue;
            }
            out[subset_index(n, &u)] += a[ia] * b[ib] * sg;
        }
    }
    out
}

/// Top-degree pairing a ^ b for i + j = n.
pub fn pair(n: usize, i: usize, a: &CVec, b: &CVec) -> C64 {
    wedge(n, i, a, n - i, b)[0]
}

/// k-th multiplicative compound (matrix of k x k minors).
pub fn compound(m: &CMat, k: usize) -> CMat {
    let n = m.nrows();
    let subs = subsets(n, k);
    let d = subs.len();
    let mut out = CMat::zeros(d, d);
    for (i, r) in subs.iter().enumerate() {
        for (j, s) in subs.iter().enumerate() {
            let sub = CMat::from_fn(k, k, |a, b| m[(r[a], s[b])]);
            out[(i, j)] = sub.determinant();
        }
    }
    out
}

/// Precomputed index tables for the additive compound on Lambda^k(C^n).
#[derive(Debug, Clone)]
pub struct Exterior {
    pub n: usize,
    pub k: usize,
    pub dim: usize,
    // (target index, source index, row i of M, column j of M, sign)
    entries: Vec<(usize, usize, usize, usize, f64)>,
}

impl Exterior {
    pub fn new(n: usize, k: usize) -> Self {
        let subs = subsets(n, k);
        let mut entries = Vec::new();
        for (jdx, s) in subs.iter().enumerate() {
            for slot in 0..k {
                for i in 0..n {
                    let mut u = s.clone();
                    u[slot] = i;
                    let sg = sort_sign(&mut u);
                    if sg == 0.0 {
                        continue;
                    }
                    entries.push((subset_index(n, &u), jdx, i, s[slot], sg));
                }
            }
        }
        Exterior { n, k, dim: subs.len(), entries }
    }

    /// Additive compound of M acting on Lambda^k.
    pub fn derivation(&self, m: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for &(t, s, i, j, sg) in &self.entries {
            out[(t, s)] += m[(i, j)] * sg;
        }
        out
    }

    /// out = (derivation of M) * w without forming the matrix.
    pub fn apply(&self, m: &CMat, w: &[C64], out: &mut [C64]) {
        for o in out.iter_mut() {
            *o = C64::new(0.0, 0.0);
        }
        for &(t, s, i, j, sg) in &self.entries {
            out[t] += m[(i, j)] * w[s] * sg;
        }
    }
}

/// Solve a small complex linear system, reporting singularity.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    a.clone().lu().solve(b).ok_or_else(|| Error::Matching(f64::INFINITY))
}

/// 2-norm condition number via singular values.
pub fn condition(a: &CMat) -> f64 {
    let sv = a.clone().singular_values();
    let mx = sv.iter().cloned().fold(0.0, f64::max);
    let mn = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if mn == 0.0 {
        f64::INFINITY
    } else {
        mx / mn
    }
}
