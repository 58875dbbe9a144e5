//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by model construction, the privacy mechanism, and the
/// estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Model parameters violate an invariant (row sums, bounds, symmetry, or
    /// an edge probability outside `[0, 1]`).
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    /// Privacy budget must be strictly positive; `eps = 0` makes the debias
    /// map divide by zero.
    #[error("invalid privacy budget: eps = {0} (must be > 0)")]
    InvalidPrivacyBudget(f64),

    /// A diagonal entry of `H = diag(d) + tau * d_bar * I` is not strictly
    /// positive, so `H^{-1/2}` does not exist. Raise `tau` or fail the run.
    #[error("regularization failure: min H_ii = {min_h:.6e} <= 0")]
    RegularizationFailure { min_h: f64 },

    /// The eigensolver could not reach the requested residual tolerance.
    #[error("numerical failure: eigensolver residual {residual:.3e} above tolerance")]
    NumericalFailure { residual: f64 },

    /// The truncation sets left no node eligible for vertex hunting.
    #[error("vertex hunt infeasible: no node survives the degree truncation")]
    VertexHuntInfeasible,

    /// No candidate vertex subset was affinely independent.
    #[error("degenerate geometry: no affinely independent vertex set found")]
    DegenerateGeometry,

    /// Two matrices that must agree in shape do not.
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    /// A configuration value is outside its documented domain.
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
