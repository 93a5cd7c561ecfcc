//! Numerical laboratory for l-component Schrödinger systems with quadratic
//! nonlinearities,
//!
//! ```text
//! i α_k ∂_t u_k + γ_k Δu_k − β_k u_k = −f_k(u),   k = 1..l,
//! ```
//!
//! where the f_k are generated by a cubic potential F through Wirtinger
//! derivatives. The crate is organised bottom-up:
//!
//! - [`nonlin`]: potential parsing, derivation of f_k, structural hypotheses.
//! - [`grid`]: radial (ℝⁿ, radially symmetric) and periodic 1D grids.
//! - [`groundstate`]: functionals, Petviashvili iteration, sharp constants.
//! - [`evolve`]: Strang-split time integration with monitored invariants.
//! - [`morawetz`]: cutoffs, densities, gauge transforms, virial/Morawetz checks.
//! - [`dichotomy`]: threshold classification and run-level verdicts.
//! - [`rundir`]: configuration loading, manifests and on-disk artefacts.

pub mod dichotomy;
pub mod evolve;
pub mod grid;
pub mod groundstate;
pub mod morawetz;
pub mod nonlin;
pub mod rundir;
pub mod util;

#[cfg(test)]
mod properties;

pub use num_complex::Complex64 as C64;

use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {position}: expected {expected}")]
    Syntax { position: usize, expected: String },
    #[error("component index {index} at byte {position} out of range 1..={l}")]
    Index { position: usize, index: usize, l: usize },
    #[error("no positive weight vector satisfies the charge identity")]
    NoPositiveSolution,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("quadrature did not converge (last estimate {estimate:e}, change {change:e})")]
    QuadratureNonConvergence { estimate: f64, change: f64 },
    #[error("iteration did not converge after {iterations} steps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("iteration collapsed to the zero state")]
    CollapseToZero,
    #[error("nonlinear pairing is not positive ({0:e})")]
    NegativeDenominator(f64),
    #[error("bisection failed: {0}")]
    BisectionFailure(String),
    #[error("blow-up suspected at t = {}: {}", .0.blowup_time.unwrap_or(f64::NAN), .0.blowup_reason.as_deref().unwrap_or("?"))]
    BlowUpSuspected(Box<evolve::Run>),
    #[error("operation not supported on this geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("tail contamination: {0}")]
    TailContamination(String),
    #[error("schedule overflow: requested T0 = {requested} exceeds available {available}")]
    ScheduleOverflow { requested: f64, available: f64 },
    #[error("insufficient run length: {0}")]
    InsufficientRunLength(String),
    #[error("hypothesis {name} failed: {evidence}")]
    Hypothesis { name: String, evidence: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("identity check failed: {0}")]
    IdentityFailure(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
