use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{fd_jacobian, find_compensator, Compensator, ModelSystem, ShockTriple};
use crate::error::{Error, Result};
use crate::linalg::{eig_real, RMat, RVec};

const PASS_TOL: f64 = 1e-8;

/// Deterministic sample of states around the shock segment.
pub fn sample_states(model: &ModelSystem, shock: &ShockTriple, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = model.n;
    let mut out = vec![shock.u_minus.clone(), shock.u_plus.clone()];
    let spread = 0.25 * shock.epsilon.max(1e-3);
    let mut guard = 0;
    while out.len() < count && guard < 100 * count {
        guard += 1;
        let t: f64 = rng.gen_range(-0.25..1.25);
        let u: Vec<f64> = (0..n)
            .map(|i| shock.u_minus[i] + t * (shock.u_plus[i] - shock.u_minus[i]) + spread * rng.gen_range(-1.0..1.0))
            .collect();
        if model.in_domain(&u) {
            out.push(u);
        }
    }
    out
}

pub fn check_rankine_hugoniot(model: &ModelSystem, shock: &ShockTriple) -> Result<f64> {
    model.check_domain(&shock.u_minus)?;
    model.check_domain(&shock.u_plus)?;
    let fp = model.flux(&shock.u_plus);
    let fm = model.flux(&shock.u_minus);
    let jump = shock.jump();
    let r = fp - fm - jump * shock.s;
    Ok(r.amax())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaxGnl {
    pub lax_ok: bool,
    /// smallest signed margin of the Lax inequalities
    pub lax_margin: f64,
    pub gnl_witness: f64,
}

fn simple_spectrum(model: &ModelSystem, u: &[f64]) -> Result<Vec<f64>> {
    let ev = eig_real(&model.jacobian_f(u))?.values;
    let rho = ev.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    for w in ev.windows(2) {
        if (w[1] - w[0]).abs() < 1e-8 * rho {
            return Err(Error::Degeneracy {
                hypothesis: "S1".into(),
                detail: format!("multiple eigenvalue {} at {:?}", w[0], u),
            });
        }
    }
    Ok(ev)
}

/// (grad a_p) . r_p by a central difference of a_p along r_p.
pub fn gnl_value(model: &ModelSystem, u: &[f64], p: usize) -> Result<f64> {
    let e = eig_real(&model.jacobian_f(u))?;
    let r = e.right.column(p - 1);
    let h = 1e-5 * (1.0 + RVec::from_column_slice(u).norm());
    let up: Vec<f64> = u.iter().zip(r.iter()).map(|(a, b)| a + h * b).collect();
    let um: Vec<f64> = u.iter().zip(r.iter()).map(|(a, b)| a - h * b).collect();
    Ok((model.char_speed(&up, p)? - model.char_speed(&um, p)?) / (2.0 * h))
}

pub fn check_lax_and_gnl(model: &ModelSystem, shock: &ShockTriple, states: &[Vec<f64>]) -> Result<LaxGnl> {
    let p = shock.p;
    let s = shock.s;
    let ap = simple_spectrum(model, &shock.u_plus)?;
    let am = simple_spectrum(model, &shock.u_minus)?;
    let mut margins = vec![s - ap[p - 1], am[p - 1] - s];
    if p < model.n {
        margins.push(ap[p] - s);
    }
    if p > 1 {
        margins.push(s - am[p - 2]);
    }
    let lax_margin = margins.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut gnl = f64::INFINITY;
    for u in states {
        gnl = gnl.min(gnl_value(model, u, p)?.abs());
    }
    Ok(LaxGnl { lax_ok: lax_margin > 0.0, lax_margin, gnl_witness: gnl })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub witness: f64,
    pub worst_state: Vec<f64>,
    /// l_p L B r_p at u_- and u_+
    pub h3_minus: f64,
    pub h3_plus: f64,
}

fn principal_diffusion(model: &ModelSystem, u: &[f64], p: usize) -> Result<f64> {
    let e = eig_real(&model.jacobian_f(u))?;
    let l = e.left.row(p - 1).into_owned();
    let r = e.right.column(p - 1).into_owned();
    Ok((l * model.lb(u) * r)[(0, 0)])
}

pub fn check_coupling(model: &ModelSystem, shock: &ShockTriple, states: &[Vec<f64>]) -> Result<CouplingReport> {
    let mut witness = f64::INFINITY;
    let mut worst = states.first().cloned().unwrap_or_default();
    let lnorm = model.l_vec().norm();
    for u in states {
        model.check_domain(u)?;
        let e = eig_real(&model.jacobian_f(u))?;
        let b = model.jacobian_b(u);
        for j in 0..model.n {
            let w = (b.dot(&e.right.column(j))).abs() * lnorm;
            if w < witness {
                witness = w;
                worst = u.clone();
            }
        }
    }
    Ok(CouplingReport {
        witness,
        worst_state: worst,
        h3_minus: principal_diffusion(model, &shock.u_minus, shock.p)?,
        h3_plus: principal_diffusion(model, &shock.u_plus, shock.p)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisStatus {
    pub hypothesis: String,
    /// null when the check was not evaluated
    pub pass: Option<bool>,
    pub witness: f64,
    pub worst_state: Vec<f64>,
    pub note: String,
}

impl HypothesisStatus {
    fn new(h: &str, pass: bool, witness: f64, worst: Vec<f64>, note: impl Into<String>) -> Self {
        HypothesisStatus { hypothesis: h.into(), pass: Some(pass), witness, worst_state: worst, note: note.into() }
    }
    fn skipped(h: &str, note: impl Into<String>) -> Self {
        HypothesisStatus { hypothesis: h.into(), pass: None, witness: f64::NAN, worst_state: vec![], note: note.into() }
    }
    pub fn failed(&self) -> bool {
        self.pass == Some(false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub model: String,
    pub epsilon: f64,
    pub entries: Vec<HypothesisStatus>,
    pub kawashima_theta: f64,
    pub compensator: Option<Compensator>,
}

impl StructureReport {
    /// Every hypothesis passes and a compensator with theta > 0 exists.
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass == Some(true)) && self.kawashima_theta > 0.0
    }
    pub fn failures(&self) -> Vec<String> {
        self.entries.iter().filter(|e| e.failed()).map(|e| e.hypothesis.clone()).collect()
    }
    pub fn get(&self, h: &str) -> Option<&HypothesisStatus> {
        self.entries.iter().find(|e| e.hypothesis == h)
    }
}

fn sym_eigs(m: &RMat) -> Vec<f64> {
    let s = (m + m.transpose()) * 0.5;
    let mut v: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().cloned().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

fn asym(m: &RMat) -> f64 {
    (m - m.transpose()).norm() / m.norm().max(1e-300)
}

fn check_s0(model: &ModelSystem, states: &[Vec<f64>]) -> HypothesisStatus {
    let mut worst = 0.0;
    let mut at = vec![];
    for u in states {
        let a = model.jacobian_f(u);
        let afd = fd_jacobian(|v| model.flux(v), u, model.n);
        let b = model.jacobian_b(u).transpose();
        let bfd = fd_jacobian(|v| RVec::from_element(1, model.g(v)), u, 1);
        let ea = (&a - &afd).norm() / a.norm().max(1e-8);
        let eb = (&b - &bfd).norm() / b.norm().max(1e-8);
        let e = ea.max(if b.norm() == 0.0 && bfd.norm() < 1e-12 { 0.0 } else { eb });
        if e > worst {
            worst = e;
            at = u.clone();
        }
    }
    HypothesisStatus::new("S0", worst <= 1e-6, worst, at, "max relative Jacobian error vs central differences")
}

fn check_s1(model: &ModelSystem, p: usize, states: &[Vec<f64>]) -> HypothesisStatus {
    let mut witness = f64::INFINITY;
    let mut at = vec![];
    let mut fail_note = String::new();
    for u in states {
        let a0 = match model.symmetrizer(u) {
            Ok(m) => m,
            Err(e) => return HypothesisStatus::new("S1", false, 0.0, u.clone(), e.to_string()),
        };
        let a = model.jacobian_f(u);
        let d = &a0 * model.lb(u);
        let ev0 = sym_eigs(&a0);
        let min_a0 = ev0[0] / a0.norm();
        let sym_a = asym(&(&a0 * &a));
        let dn = d.norm();
        let (sym_d, psd, rank1) = if dn == 0.0 {
            (0.0, true, true)
        } else {
            let sv = d.clone().singular_values();
            let mut s: Vec<f64> = sv.iter().cloned().collect();
            s.sort_by(|x, y| y.partial_cmp(x).unwrap());
            let ev = sym_eigs(&d);
            (asym(&d), ev[0] >= -PASS_TOL * dn, s.len() < 2 || s[1] < PASS_TOL * s[0])
        };
        let simple = match simple_spectrum(model, u) {
            Ok(ev) => {
                let rho = ev.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
                (p == 1 || ev[p - 1] - ev[p - 2] > 1e-8 * rho) && (p == model.n || ev[p] - ev[p - 1] > 1e-8 * rho)
            }
            Err(_) => false,
        };
        let ok = min_a0 > PASS_TOL && sym_a <= PASS_TOL && sym_d <= PASS_TOL && psd && rank1 && simple;
        if !ok && fail_note.is_empty() {
            fail_note = format!(
                "min eig A0 {min_a0:e}, asym(A0 A) {sym_a:e}, asym(A0 LB) {sym_d:e}, psd {psd}, rank<=1 {rank1}, simple a_p {simple}"
            );
        }
        let w = if ok { min_a0 } else { -1.0 };
        if w < witness {
            witness = w;
            at = u.clone();
        }
    }
    let pass = witness > 0.0;
    let note = if pass {
        "min normalized eigenvalue of A0; A0 A, A0 LB symmetric, A0 LB psd of rank <= 1, a_p simple".to_string()
    } else {
        fail_note
    };
    HypothesisStatus::new("S1", pass, witness, at, note)
}

/// Evaluate every hypothesis on a seeded state sample.
pub fn check_structure(model: &ModelSystem, shock: &ShockTriple, seed: u64) -> Result<StructureReport> {
    let states = sample_states(model, shock, 100, seed);
    let mut entries = vec![check_s0(model, &states), check_s1(model, shock.p, &states)];

    let coupling = check_coupling(model, shock, &states)?;
    let s2 = coupling.witness > PASS_TOL;
    entries.push(HypothesisStatus::new(
        "S2",
        s2,
        coupling.witness,
        coupling.worst_state.clone(),
        "min_j |L B r_j| over the sample",
    ));

    let rh = check_rankine_hugoniot(model, shock)?;
    let fm = model.flux(&shock.u_minus).amax();
    entries.push(HypothesisStatus::new(
        "H0",
        rh <= 1e-10 * fm + 1e-12,
        rh,
        shock.u_plus.clone(),
        "max-norm Rankine-Hugoniot residual",
    ));

    match check_lax_and_gnl(model, shock, &states) {
        Ok(lg) => {
            entries.push(HypothesisStatus::new(
                "H1",
                lg.lax_ok,
                lg.lax_margin,
                shock.u_plus.clone(),
                "smallest Lax margin",
            ));
            entries.push(HypothesisStatus::new(
                "H2",
                lg.gnl_witness > PASS_TOL,
                lg.gnl_witness,
                vec![],
                "min |grad a_p . r_p| over the sample",
            ));
        }
        Err(e) => {
            entries.push(HypothesisStatus::new("H1", false, f64::NAN, vec![], e.to_string()));
            entries.push(HypothesisStatus::new("H2", false, f64::NAN, vec![], e.to_string()));
        }
    }

    let mut theta = f64::NAN;
    let mut comp = None;
    if s2 {
        let h3 = coupling.h3_minus.min(coupling.h3_plus);
        let worst = if coupling.h3_minus <= coupling.h3_plus { shock.u_minus.clone() } else { shock.u_plus.clone() };
        entries.push(HypothesisStatus::new("H3", h3 > PASS_TOL, h3, worst, "l_p L B r_p at u_- and u_+"));
        let mut dmin = f64::INFINITY;
        let mut dat = vec![];
        for u in &states {
            let d = principal_diffusion(model, u, shock.p)?;
            if d < dmin {
                dmin = d;
                dat = u.clone();
            }
        }
        entries.push(HypothesisStatus::new("Eq1.5", dmin > PASS_TOL, dmin, dat, "min l_p L B r_p over the sample"));
        match find_compensator(model, &states, seed) {
            Ok(c) => {
                theta = c.theta;
                comp = Some(c);
            }
            Err(Error::CompensatorNotFound { best }) => theta = best,
            Err(e) => return Err(e),
        }
    } else {
        entries.push(HypothesisStatus::skipped("H3", "not evaluated: requires genuine coupling (S2)"));
        entries.push(HypothesisStatus::skipped("Eq1.5", "not evaluated: requires genuine coupling (S2)"));
    }

    Ok(StructureReport {
        model: model.name.clone(),
        epsilon: shock.epsilon,
        entries,
        kawashima_theta: theta,
        compensator: comp,
    })
}
