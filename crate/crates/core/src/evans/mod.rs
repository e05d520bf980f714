//! Evans functions D-(lambda), D+(lambda) for the degenerate eigenvalue
//! system, the winding-number test, and resolvent kernels.
//!
//! Decaying subspaces are carried as exterior products in flux variables
//! V = Theta W, seeded at +-X from the projected asymptotic basis and
//! integrated toward the sonic point. The sonic point is crossed with the
//! Frobenius basis of [`local`]; beyond it the wedge with the fast mode is
//! continued to y = -+1 with the scalar shift -(alpha0 + 1)/x removed.

pub mod local;
pub mod lowfreq;
pub mod resolvent;
pub mod winding;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, compound, condition, pair, solve, wedge, wedge_columns, CMat, CVec, Exterior, C64};
use crate::numerics::{integrate, OdeOptions};
use crate::spectral::{Side, SpectralFrame};

pub use local::{local_basis, SingularPointData, SonicTaylor};
pub use lowfreq::{check_low_frequency_slope, check_proportionality, ProportionalityReport, SlopeReport};
pub use resolvent::{ResolventBasis, ResolventKernel};
pub use winding::{semi_annulus, small_circle, winding, WindingReport};

/// D = mantissa * exp(log_scale).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvansValue {
    pub re_lambda: f64,
    pub im_lambda: f64,
    pub side: Side,
    pub re_d: f64,
    pub im_d: f64,
    pub log_scale: f64,
}

impl EvansValue {
    pub fn new(lambda: C64, side: Side, mantissa: C64, log_scale: f64) -> Self {
        EvansValue { re_lambda: lambda.re, im_lambda: lambda.im, side, re_d: mantissa.re, im_d: mantissa.im, log_scale }
    }
    pub fn lambda(&self) -> C64 {
        C64::new(self.re_lambda, self.im_lambda)
    }
    pub fn mantissa(&self) -> C64 {
        C64::new(self.re_d, self.im_d)
    }
    pub fn value(&self) -> C64 {
        self.mantissa() * self.log_scale.exp()
    }
    /// (other / self) including the scale difference.
    pub fn ratio(&self, other: &EvansValue) -> C64 {
        other.mantissa() / self.mantissa() * (other.log_scale - self.log_scale).exp()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvansOptions {
    pub order: usize,
    pub x0: Option<f64>,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for EvansOptions {
    fn default() -> Self {
        EvansOptions { order: 8, x0: None, rtol: 1e-10, atol: 1e-13 }
    }
}

#[derive(Debug, Clone)]
pub struct EvansSolver {
    pub frame: SpectralFrame,
    pub taylor: SonicTaylor,
    pub x0: f64,
    pub order: usize,
    pub half_length: f64,
    pub ode: OdeOptions,
}

/// A vector with a real log scale: the value is `v * exp(log_scale)`.
#[derive(Debug, Clone)]
pub struct Scaled {
    pub v: CVec,
    pub log_scale: f64,
}

impl Scaled {
    fn normalized(v: CVec, log_scale: f64) -> Self {
        let nrm = v.norm();
        if nrm > 0.0 && nrm.is_finite() {
            Scaled { v: v / c(nrm), log_scale: log_scale + nrm.ln() }
        } else {
            Scaled { v, log_scale }
        }
    }
}

impl EvansSolver {
    pub fn new(frame: SpectralFrame, opts: &EvansOptions) -> Result<Self> {
        let eta = frame.profile.eta;
        let mut x0 = opts.x0.unwrap_or(0.05 * (1.0f64).min(1.0 / eta));
        let half_length = frame.profile.half_length;
        let ode = OdeOptions::tol(opts.rtol, opts.atol).linear();
        let mut solver = None;
        for attempt in 0..2 {
            let taylor = SonicTaylor::new(&frame, x0);
            let s = EvansSolver { frame: frame.clone(), taylor, x0, order: opts.order, half_length, ode };
            match s.matching_condition(c(frame.scale)) {
                Ok(_) => {
                    solver = Some(s);
                    break;
                }
                Err(Error::Matching(k)) if attempt == 0 => {
                    let _ = k;
                    x0 *= 0.5;
                }
                Err(e) => return Err(e),
            }
        }
        solver.ok_or(Error::Matching(f64::INFINITY))
    }

    pub fn scale(&self) -> f64 {
        self.frame.scale
    }

    pub fn dim(&self) -> usize {
        self.frame.n + 2
    }

    /// Frobenius exponent alpha0(lambda), checked to have positive real part.
    pub fn singular_exponent(&self, lambda: C64) -> Result<C64> {
        let a = self.frame.alpha0(lambda)?;
        if a.re <= 0.0 {
            return Err(Error::Degeneracy { hypothesis: "H2".into(), detail: format!("Re alpha0 = {}", a.re) });
        }
        Ok(a)
    }

    pub fn local_basis(&self, lambda: C64) -> Result<SingularPointData> {
        local_basis(&self.taylor, &self.frame, lambda, self.order)
    }

    fn matching_condition(&self, lambda: C64) -> Result<f64> {
        let sp = self.local_basis(lambda)?;
        let k = condition(&sp.local_matrix(self.x0)).max(condition(&sp.local_matrix(-self.x0)));
        if k > 1e10 {
            return Err(Error::Matching(k));
        }
        Ok(k)
    }

    /// Integrate a k-vector of the flux system from a to b, with an extra
    /// scalar rate -shift/x.
    fn transport(&self, k: usize, lambda: C64, shift: C64, a: f64, b: f64, w: &Scaled) -> Result<Scaled> {
        let ext = Exterior::new(self.dim(), k);
        let frame = &self.frame;
        let f = |x: f64, y: &[C64], out: &mut [C64]| {
            let m = frame.flux_coefficients(x).at(lambda);
            ext.apply(&m, y, out);
            if shift != c(0.0) {
                let s = shift / x;
                for (o, v) in out.iter_mut().zip(y) {
                    *o -= s * v;
                }
            }
        };
        let traj = integrate(f, a, b, w.v.as_slice(), &self.ode).map_err(|e| match e {
            Error::Stiffness { x, h } => Error::Stiffness { x, h },
            other => other,
        })?;
        let (y, ls) = traj.last();
        Ok(Scaled::normalized(CVec::from_column_slice(y), w.log_scale + ls))
    }

    /// Seed wedge of the decaying basis at the far field of `side`, in flux
    /// variables: Lambda^k(Theta P(lambda) V0) exp(+-X trace).
    pub fn seed(&self, side: Side, lambda: C64) -> Result<Scaled> {
        let (y, tr) = self.frame.seed_columns(side, lambda)?;
        let x = side.sign() * self.half_length;
        let theta = self.frame.theta(x).map(c);
        let w = wedge_columns(&(theta * y));
        let expo = tr * x;
        let phase = C64::new(0.0, expo.im).exp();
        Ok(Scaled::normalized(w * phase, expo.re))
    }

    /// Exterior product of the decaying basis on `side`, integrated from the
    /// far field through each target in order.
    pub fn decaying_wedge(&self, side: Side, lambda: C64, targets: &[f64]) -> Result<Vec<Scaled>> {
        let k = match side {
            Side::Plus => self.frame.k_plus(),
            Side::Minus => self.frame.k_minus(),
        };
        let mut cur = self.seed(side, lambda)?;
        let mut x = side.sign() * self.half_length;
        let mut out = Vec::with_capacity(targets.len());
        for &t in targets {
            cur = self.transport(k, lambda, c(0.0), x, t, &cur)?;
            x = t;
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// Carry a k-vector from the `from` side of the sonic point (at +-x0)
    /// to the other side: expand in Lambda^k of the local basis, then
    /// resynthesize at -+x0.
    pub fn cross_wedge(&self, sp: &SingularPointData, k: usize, w: &CVec, from: Side) -> Result<CVec> {
        let xs = from.sign() * self.x0;
        let z_from = sp.local_matrix(xs);
        let kz = condition(&z_from);
        if kz > 1e10 {
            return Err(Error::Matching(kz));
        }
        let cmat = solve(&compound(&z_from, k), &CMat::from_column_slice(w.len(), 1, w.as_slice()))?;
        let z_to = sp.local_matrix(-xs);
        Ok(compound(&z_to, k) * cmat.column(0))
    }

    /// Column version of the crossing: the fast solution x|x|^alpha0 G(x)
    /// keeps its coefficient (connection constant 1 by definition), so the
    /// G-coefficient changes sign.
    pub fn cross_singularity(&self, sp: &SingularPointData, cols: &CMat, from: Side) -> Result<CMat> {
        let xs = from.sign() * self.x0;
        let z_from = sp.local_matrix(xs);
        let kz = condition(&z_from);
        if kz > 1e10 {
            return Err(Error::Matching(kz));
        }
        let mut a = solve(&z_from, cols)?;
        let d = self.dim();
        for j in 0..a.ncols() {
            a[(d - 1, j)] = -a[(d - 1, j)];
        }
        Ok(sp.local_matrix(-xs) * a)
    }

    /// Connection constant m_kp of the fast mode as reported by the crossing.
    pub fn connection_constant(&self, sp: &SingularPointData) -> Result<C64> {
        let d = self.dim();
        let g = CMat::from_column_slice(d, 1, sp.fast_g(self.x0).as_slice());
        let out = self.cross_singularity(sp, &g, Side::Plus)?;
        // out = m * F(-x0) / F(x0)-normalized, with F = x|x|^alpha0 G
        let gl = sp.fast_g(-self.x0);
        let k = (0..d).max_by(|&i, &j| gl[i].norm().partial_cmp(&gl[j].norm()).unwrap()).unwrap();
        Ok(-out[(k, 0)] / gl[k])
    }

    /// Both Evans functions at y = -1 (D-) and y = +1 (D+).
    pub fn evans_pair(&self, lambda: C64) -> Result<(EvansValue, EvansValue)> {
        let d = self.dim();
        let kp = self.frame.k_plus();
        let km = self.frame.k_minus();
        let alpha = self.singular_exponent(lambda)?;
        let sp = self.local_basis(lambda)?;
        let shift = alpha + c(1.0);
        let x0 = self.x0;

        let plus = self.decaying_wedge(Side::Plus, lambda, &[1.0, x0])?;
        let minus = self.decaying_wedge(Side::Minus, lambda, &[-1.0, -x0])?;

        // D-: Phi+ continued through 0, wedged with G on the left
        let across = self.cross_wedge(&sp, kp, &plus[1].v, Side::Plus)?;
        let psi0 = wedge(d, kp, &across, 1, &sp.fast_g(-x0));
        let psi = self.transport(kp + 1, lambda, shift, -x0, -1.0, &Scaled::normalized(psi0, plus[1].log_scale))?;
        let top = pair(d, kp + 1, &psi.v, &minus[0].v);
        // F(-1) = -G(-1)
        let dm = -top / c(self.det_a_at(-1.0));
        let vm = EvansValue::new(lambda, Side::Minus, dm, psi.log_scale + minus[0].log_scale);

        // D+: Phi- continued through 0, G wedged on the right
        let across = self.cross_wedge(&sp, km, &minus[1].v, Side::Minus)?;
        let chi0 = wedge(d, 1, &sp.fast_g(x0), km, &across);
        let chi = self.transport(km + 1, lambda, shift, x0, 1.0, &Scaled::normalized(chi0, minus[1].log_scale))?;
        let top = pair(d, kp, &plus[0].v, &chi.v);
        let dp = top / c(self.det_a_at(1.0));
        let vp = EvansValue::new(lambda, Side::Plus, dp, chi.log_scale + plus[0].log_scale);
        Ok((vm, vp))
    }

    pub fn evans_d(&self, lambda: C64, side: Side) -> Result<EvansValue> {
        let (m, p) = self.evans_pair(lambda)?;
        Ok(match side {
            Side::Minus => m,
            Side::Plus => p,
        })
    }

    /// Fast mode on `side` at y (|y| >= x0): x|x|^alpha0 G(x) continued by
    /// the shifted flux system, returned in flux variables with log scale.
    pub fn fast_mode(&self, sp: &SingularPointData, lambda: C64, side: Side, y: f64) -> Result<Scaled> {
        let xs = side.sign() * self.x0;
        let g0 = Scaled::normalized(sp.fast_g(xs), 0.0);
        let g = self.transport(1, lambda, sp.alpha0 + c(1.0), xs, y, &g0)?;
        // x|x|^alpha0 at y
        let ay = y.abs();
        let fac = sp.alpha0 * ay.ln();
        let phase = C64::new(0.0, fac.im).exp() * y.signum();
        Ok(Scaled { v: g.v * phase, log_scale: g.log_scale + fac.re + ay.ln() })
    }

    /// dD/dlambda at 0 by centered difference at +-1e-5 scale, where
    /// scale = max(eps^2, r).
    pub fn derivative_at_zero(&self, side: Side, r: f64) -> Result<C64> {
        let h = 1e-5 * self.scale().max(r);
        let a = self.evans_d(c(h), side)?;
        let b = self.evans_d(c(-h), side)?;
        Ok((a.value() - b.value()) / (2.0 * h))
    }
}
