use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state outside the model domain: {0}")]
    Domain(String),
    #[error("degenerate eigenstructure ({hypothesis}): {detail}")]
    Degeneracy { hypothesis: String, detail: String },
    #[error("no compensator with positive theta found (best theta {best})")]
    CompensatorNotFound { best: f64 },
    #[error("profile branch error: {0}")]
    ProfileBranch(String),
    #[error("domain too small: {0}")]
    DomainTooSmall(String),
    #[error("profile rejected: {0}")]
    ProfileRejected(String),
    #[error("consistent splitting violated at lambda = {re} + {im}i")]
    ConsistentSplitting { re: f64, im: f64 },
    #[error("resonant Frobenius exponent alpha0 = {alpha0} near integer {m}")]
    Resonance { alpha0: f64, m: usize },
    #[error("Frobenius recurrence denominator {0:e} too small")]
    NearResonance(f64),
    #[error("step size underflow at x = {x} (h = {h:e})")]
    Stiffness { x: f64, h: f64 },
    #[error("local basis matching failed: condition number {0:e}")]
    Matching(f64),
    #[error("Evans function vanishes on the contour at lambda = {re} + {im}i")]
    ZeroOnContour { re: f64, im: f64 },
    #[error("winding number inconclusive (rounding residual {0})")]
    InconclusiveWinding(f64),
    #[error("resolvent nearly singular: |D| = {0:e}")]
    NearSingularResolvent(f64),
    #[error("quadrature did not converge with {0} samples")]
    Quadrature(usize),
    #[error("eigenvalue collision along path (gap {0:e})")]
    EigenCollision(f64),
    #[error("Riccati graph exceeds gap bound: sup|Phi2| = {sup}, bound = {bound}")]
    GapViolation { sup: f64, bound: f64 },
    #[error("shock tracking lost (minimizer at window edge {0})")]
    TrackingLost(f64),
    #[error("instability: {0}")]
    Instability(String),
    #[error("simulation left the state domain at node {0}")]
    SimulationDomain(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
