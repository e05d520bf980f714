//! Shared fixtures for the benchmarks.

use radshock::evans::{EvansOptions, EvansSolver};
use radshock::model::{ModelSystem, ShockTriple};
use radshock::profile::{solve_profile, Profile};
use radshock::spectral::SpectralFrame;

pub fn hamer_profile(eps: f64) -> Profile {
    solve_profile(&ModelSystem::hamer(), &ShockTriple::hamer(eps), None, 1e-12).expect("profile")
}

pub fn hamer_solver(eps: f64) -> EvansSolver {
    EvansSolver::new(SpectralFrame::new(hamer_profile(eps)).expect("frame"), &EvansOptions::default()).expect("solver")
}
