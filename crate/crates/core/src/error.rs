//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by construction invariants, numerical routines and
/// search procedures.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a domain constraint (|q| > 1, non-unit vector, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A quantity required by the operation is degenerate (zero field,
    /// fixed-point orbit, zero variance, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The requested quantity is undefined for this field variant.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// Adaptive step control could not meet the requested tolerance.
    #[error("integration failure: {0}")]
    Integration(String),

    /// The state norm drifted beyond the safety bound during integration.
    #[error("norm blowup: drift {drift} exceeded {limit}")]
    NormBlowup { drift: f64, limit: f64 },

    /// The (q, p) chart reached its coordinate singularity at the poles.
    #[error("coordinate singularity: |q| = {q} too close to 1")]
    Singularity { q: f64 },

    /// A quadrature did not converge within the recursion budget.
    #[error("quadrature failure: {0}")]
    Quadrature(String),

    /// A bracketing search was started on an interval without a sign change.
    #[error("no bracket: {0}")]
    NoBracket(String),

    /// Malformed serialized data.
    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = core::result::Result<T, Error>;
