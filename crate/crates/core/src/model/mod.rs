//! Model systems u_t + f(u)_x + L q_x = 0, -q_xx + q + g(u)_x = 0 and the
//! structural hypothesis checks.

mod checks;
mod shock;
mod symmetrizer;

pub use checks::{
    check_coupling, check_lax_and_gnl, check_rankine_hugoniot, check_structure, gnl_value, sample_states,
    CouplingReport, HypothesisStatus, LaxGnl, StructureReport,
};
pub use shock::ShockTriple;
pub use symmetrizer::{find_compensator, numerical_symmetrizer, Compensator};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_real, RMat, RVec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelKind {
    /// f = u^2/2, g = coupling * u
    Hamer { coupling: f64 },
    /// conservative (rho, rho u, E), gamma-law gas, g = theta^4
    EulerRad { gamma: f64 },
    /// scalar polynomials f = sum f_k u^k, g = sum g_k u^k
    Custom { f: Vec<f64>, g: Vec<f64>, l: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSystem {
    pub name: String,
    pub n: usize,
    pub l: Vec<f64>,
    pub kind: ModelKind,
    pub domain_lo: Vec<f64>,
    pub domain_hi: Vec<f64>,
}

fn poly(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * u + a)
}

fn dpoly(c: &[f64], u: f64) -> f64 {
    c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, &a)| acc * u + k as f64 * a)
}

impl ModelSystem {
    pub fn hamer() -> Self {
        Self::hamer_with_coupling(1.0)
    }

    pub fn hamer_with_coupling(coupling: f64) -> Self {
        let name = if coupling == 0.0 { "hamer_uncoupled" } else { "hamer" };
        ModelSystem {
            name: name.into(),
            n: 1,
            l: vec![1.0],
            kind: ModelKind::Hamer { coupling },
            domain_lo: vec![-10.0],
            domain_hi: vec![10.0],
        }
    }

    /// The Hamer flux with g identically zero (decoupled, fails (S2)).
    pub fn hamer_uncoupled() -> Self {
        Self::hamer_with_coupling(0.0)
    }

    pub fn euler_rad(gamma: f64) -> Self {
        ModelSystem {
            name: "euler_rad".into(),
            n: 3,
            l: vec![0.0, 0.0, 1.0],
            kind: ModelKind::EulerRad { gamma },
            domain_lo: vec![1e-3, -1e3, 1e-6],
            domain_hi: vec![1e3, 1e3, 1e6],
        }
    }

    pub fn custom(f: Vec<f64>, g: Vec<f64>, l: f64) -> Self {
        ModelSystem {
            name: "custom".into(),
            n: 1,
            l: vec![l],
            kind: ModelKind::Custom { f, g, l },
            domain_lo: vec![-10.0],
            domain_hi: vec![10.0],
        }
    }

    pub fn l_vec(&self) -> RVec {
        RVec::from_column_slice(&self.l)
    }

    /// Box membership plus physical admissibility (positive temperature).
    pub fn in_domain(&self, u: &[f64]) -> bool {
        if u.len() != self.n {
            return false;
        }
        for i in 0..self.n {
            if !(u[i] >= self.domain_lo[i] && u[i] <= self.domain_hi[i]) {
                return false;
            }
        }
        match self.kind {
            ModelKind::EulerRad { .. } => u[2] / u[0] - 0.5 * (u[1] / u[0]).powi(2) > 0.0,
            _ => true,
        }
    }

    pub fn check_domain(&self, u: &[f64]) -> Result<()> {
        if self.in_domain(u) {
            Ok(())
        } else {
            Err(Error::Domain(format!("{:?}", u)))
        }
    }

    pub fn flux(&self, u: &[f64]) -> RVec {
        match &self.kind {
            ModelKind::Hamer { .. } => RVec::from_element(1, 0.5 * u[0] * u[0]),
            ModelKind::Custom { f, .. } => RVec::from_element(1, poly(f, u[0])),
            ModelKind::EulerRad { gamma } => {
                let (rho, m, e_tot) = (u[0], u[1], u[2]);
                let v = m / rho;
                let p = (gamma - 1.0) * (e_tot - 0.5 * m * v);
                RVec::from_column_slice(&[m, m * v + p, (e_tot + p) * v])
            }
        }
    }

    /// Radiative coupling flux g(u).
    pub fn g(&self, u: &[f64]) -> f64 {
        match &self.kind {
            ModelKind::Hamer { coupling } => coupling * u[0],
            ModelKind::Custom { g, .. } => poly(g, u[0]),
            ModelKind::EulerRad { .. } => self.temperature(u).powi(4),
        }
    }

    /// Temperature (Euler) with unit specific heat; the state itself otherwise.
    pub fn temperature(&self, u: &[f64]) -> f64 {
        match self.kind {
            ModelKind::EulerRad { .. } => u[2] / u[0] - 0.5 * (u[1] / u[0]).powi(2),
            _ => u[0],
        }
    }

    pub fn jacobian_f(&self, u: &[f64]) -> RMat {
        match &self.kind {
            ModelKind::Hamer { .. } => RMat::from_element(1, 1, u[0]),
            ModelKind::Custom { f, .. } => RMat::from_element(1, 1, dpoly(f, u[0])),
            ModelKind::EulerRad { gamma } => {
                let gt = gamma - 1.0;
                let (rho, m, e_tot) = (u[0], u[1], u[2]);
                let v = m / rho;
                let p = gt * (e_tot - 0.5 * m * v);
                let h = (e_tot + p) / rho;
                RMat::from_row_slice(
                    3,
                    3,
                    &[
                        0.0,
                        1.0,
                        0.0,
                        -v * v + 0.5 * gt * v * v,
                        (2.0 - gt) * v,
                        gt,
                        0.5 * gt * v * v * v - h * v,
                        h - gt * v * v,
                        gamma * v,
                    ],
                )
            }
        }
    }

    /// B(u) = Dg(u) as a column vector (the row is its transpose).
    pub fn jacobian_b(&self, u: &[f64]) -> RVec {
        match &self.kind {
            ModelKind::Hamer { coupling } => RVec::from_element(1, *coupling),
            ModelKind::Custom { g, .. } => RVec::from_element(1, dpoly(g, u[0])),
            ModelKind::EulerRad { .. } => {
                let (rho, m, e_tot) = (u[0], u[1], u[2]);
                let th = self.temperature(u);
                let de = [-e_tot / (rho * rho) + m * m / rho.powi(3), -m / (rho * rho), 1.0 / rho];
                RVec::from_iterator(3, de.iter().map(|d| 4.0 * th.powi(3) * d))
            }
        }
    }

    /// L B(u) as an n x n matrix.
    pub fn lb(&self, u: &[f64]) -> RMat {
        self.l_vec() * self.jacobian_b(u).transpose()
    }

    /// Symmetrizer A0(u): analytic for scalar models, numerical otherwise.
    pub fn symmetrizer(&self, u: &[f64]) -> Result<RMat> {
        match self.kind {
            ModelKind::EulerRad { .. } => numerical_symmetrizer(self, u),
            _ => Ok(RMat::identity(1, 1)),
        }
    }

    /// Eigenvalue a_p(u) (1-based p).
    pub fn char_speed(&self, u: &[f64], p: usize) -> Result<f64> {
        Ok(eig_real(&self.jacobian_f(u))?.values[p - 1])
    }
}

/// Central-difference Jacobian of a vector map, used for checks.
pub fn fd_jacobian<F: Fn(&[f64]) -> RVec>(f: F, u: &[f64], m: usize) -> RMat {
    let n = u.len();
    let mut j = RMat::zeros(m, n);
    for k in 0..n {
        let h = 1e-6 * (1.0 + u[k].abs());
        let mut up = u.to_vec();
        let mut um = u.to_vec();
        up[k] += h;
        um[k] -= h;
        let d = (f(&up) - f(&um)) / (2.0 * h);
        j.set_column(k, &d);
    }
    j
}
