//! Analytic transport of a simple eigenvector along a path in the complex
//! parameter plane (v' = [P', P] v).

use crate::error::{Error, Result};
use crate::linalg::{eig, CMat, CVec, C64};

#[derive(Debug, Clone)]
pub struct KatoFrame {
    pub path: Vec<C64>,
    pub values: Vec<C64>,
    pub vectors: Vec<CVec>,
    pub projections: Vec<CMat>,
    pub base_vector: CVec,
}

/// Spectral projection onto the eigenvalue of `m` nearest `guess`,
/// returning (eigenvalue, projection, gap to the rest of the spectrum).
pub fn eigenprojection(m: &CMat, guess: C64) -> Result<(C64, CMat, f64)> {
    let e = eig(m)?;
    let mut best = 0;
    for (i, v) in e.values.iter().enumerate() {
        if (v - guess).norm() < (e.values[best] - guess).norm() {
            best = i;
        }
    }
    let mu = e.values[best];
    let gap = e
        .values
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != best)
        .map(|(_, v)| (v - mu).norm())
        .fold(f64::INFINITY, f64::min);
    let r = e.right.column(best).into_owned();
    let l = e.left.row(best).into_owned();
    Ok((mu, &r * &l, gap))
}

fn commutator_rhs<F: Fn(C64) -> CMat>(family: &F, lam: C64, dlam: C64, guess: C64, v: &CVec) -> Result<(CVec, C64)> {
    let d = 1e-6 * (1.0 + lam.norm());
    let (mu, p, gap) = eigenprojection(&family(lam), guess)?;
    let scale = 1.0 + mu.norm();
    if gap < 1e-8 * scale {
        return Err(Error::EigenCollision(gap));
    }
    let (_, pp, _) = eigenprojection(&family(lam + d), mu)?;
    let (_, pm, _) = eigenprojection(&family(lam - d), mu)?;
    let dp = (pp - pm) * (dlam / (2.0 * d));
    let comm = &dp * &p - &p * &dp;
    Ok((comm * v, mu))
}

/// Transport `base_vector` (an eigenvector of family(path[0]) for the
/// eigenvalue nearest `base_value`) along the polyline `path`.
pub fn kato_transport<F: Fn(C64) -> CMat>(
    family: F,
    path: &[C64],
    base_value: C64,
    base_vector: &CVec,
    steps_per_segment: usize,
) -> Result<KatoFrame> {
    let (mu0, p0, _) = eigenprojection(&family(path[0]), base_value)?;
    let mut v = &p0 * base_vector;
    let mut mu = mu0;
    let mut frame = KatoFrame {
        path: vec![path[0]],
        values: vec![mu0],
        vectors: vec![v.clone()],
        projections: vec![p0],
        base_vector: base_vector.clone(),
    };
    for seg in path.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let mut nsteps = steps_per_segment.max(1);
        let out = loop {
            match transport_segment(&family, a, b, mu, &v, nsteps) {
                Ok(r) => break r,
                Err(Error::EigenCollision(_)) if nsteps < 64 * steps_per_segment => {
                    nsteps *= 2;
                }
                Err(e) => return Err(e),
            }
        };
        let (vn, mun, pn, max_angle) = out;
        if max_angle > 0.1 && nsteps < 64 * steps_per_segment {
            // refine once more with finer steps for smoothness
            let (vn2, mun2, pn2, _) = transport_segment(&family, a, b, mu, &v, nsteps * 4)?;
            v = vn2;
            mu = mun2;
            frame.projections.push(pn2);
        } else {
            v = vn;
            mu = mun;
            frame.projections.push(pn);
        }
        frame.path.push(b);
        frame.values.push(mu);
        frame.vectors.push(v.clone());
    }
    Ok(frame)
}

fn transport_segment<F: Fn(C64) -> CMat>(
    family: &F,
    a: C64,
    b: C64,
    mu_start: C64,
    v0: &CVec,
    nsteps: usize,
) -> Result<(CVec, C64, CMat, f64)> {
    let dl = b - a;
    let h = 1.0 / nsteps as f64;
    let mut v = v0.clone();
    let mut mu = mu_start;
    let mut max_angle: f64 = 0.0;
    for i in 0..nsteps {
        let s = i as f64 * h;
        let l0 = a + dl * s;
        let lh = a + dl * (s + 0.5 * h);
        let l1 = a + dl * (s + h);
        let (k1, m1) = commutator_rhs(family, l0, dl, mu, &v)?;
        let (k2, _) = commutator_rhs(family, lh, dl, m1, &(&v + &k1 * C64::new(0.5 * h, 0.0)))?;
        let (k3, _) = commutator_rhs(family, lh, dl, m1, &(&v + &k2 * C64::new(0.5 * h, 0.0)))?;
        let (k4, m4) = commutator_rhs(family, l1, dl, m1, &(&v + &k3 * C64::new(h, 0.0)))?;
        let vn = &v + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
        let cosang = (v.dotc(&vn)).norm() / (v.norm() * vn.norm());
        max_angle = max_angle.max(cosang.clamp(-1.0, 1.0).acos());
        v = vn;
        mu = m4;
    }
    let (mu_end, p_end, _) = eigenprojection(&family(b), mu)?;
    v = &p_end * v;
    Ok((v, mu_end, p_end, max_angle))
}
