//! Shared numerical kernels.

pub mod argument;
pub mod kato;
pub mod ode;
pub mod optim;
pub mod quad;
pub mod riccati;

pub use argument::{accumulate_argument, ArgumentSum};
pub use kato::{eigenprojection, kato_transport, KatoFrame};
pub use ode::{integrate, integrate_fixed, rk4, OdeOptions, Scalar, Trajectory};
pub use optim::{bisect, golden_section, line_fit, nelder_mead, LineFit};
pub use quad::{chebyshev_nodes, composite_gauss, gauss_legendre, taylor_fit};
pub use riccati::{riccati_reduce, RiccatiReduction, ThetaBlocks};

/// (1 + erf z) / 2
pub fn errfn(z: f64) -> f64 {
    0.5 * libm::erfc(-z)
}
