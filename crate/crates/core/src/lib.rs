//! Spectral and nonlinear stability toolkit for radiative shock profiles of
//! hyperbolic-elliptic coupled systems
//!
//! ```text
//! u_t + f(u)_x + L q_x = 0,    -q_xx + q + g(u)_x = 0.
//! ```
//!
//! The pipeline is: [`model`] (structure checks) -> [`profile`] (stationary
//! wave through the sonic point) -> [`spectral`] (eigenvalue system) ->
//! [`evans`] (Evans functions, winding, resolvent) -> [`greenfn`], plus
//! direct simulation in [`evolve`].

pub mod error;
pub mod evans;
pub mod evolve;
pub mod greenfn;
pub mod io;
pub mod linalg;
pub mod model;
pub mod numerics;
pub mod profile;
pub mod spectral;

pub use error::{Error, Result};
pub use evans::{EvansValue, ResolventKernel, SingularPointData, WindingReport};
pub use evolve::{DecayReport, SimState};
pub use greenfn::GreenSample;
pub use model::{Compensator, ModelSystem, ShockTriple, StructureReport};
pub use profile::Profile;
pub use spectral::{AsymptoticModes, SpectralFrame};
