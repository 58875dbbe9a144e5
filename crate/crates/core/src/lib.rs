//! Locally private estimation of mixed community-membership profiles in
//! degree-corrected mixed-membership block models.
//!
//! The pipeline, end to end:
//!
//! 1. [`model`] — generate (or describe) a degree-corrected mixed-membership
//!    network: degree weights `theta`, membership rows `pi`, connectivity `b`,
//!    and the edge-probability matrix they induce.
//! 2. [`privacy`] — release a graph under edge-level local differential
//!    privacy by flipping each upper-triangular adjacency bit with probability
//!    `1/(1+e^eps)`, then debias the release so its expectation matches the
//!    original edge probabilities.
//! 3. [`spectral`] — build a degree-regularized Laplacian from the debiased
//!    matrix, extract its leading eigenpairs, truncate unreliable nodes, and
//!    form ratio coordinates that cancel degree heterogeneity.
//! 4. [`hunting`] — locate the simplex vertices enclosing the ratio rows.
//! 5. [`estimator`] — convert each node's barycentric coordinates back to a
//!    membership row, producing a row-stochastic estimate.
//! 6. [`evaluation`] — permutation-minimized L1 loss, signal-to-noise rates,
//!    and risk-bound integrals for judging an estimate against theory.
//!
//! All randomized operations draw from [`rng::RngStream`], a splittable
//! counter-based stream, and are bit-reproducible given a seed.

pub mod error;
pub mod estimator;
pub mod evaluation;
pub mod hunting;
pub mod model;
pub mod privacy;
pub mod rng;
pub mod spectral;

mod eigen;
mod linalg;

pub use error::{Error, Result};
pub use estimator::{EstimatorConfig, MembershipEstimate};
pub use evaluation::{LossReport, TheoryDiagnostics};
pub use hunting::{HuntConfig, SimplexVertices};
pub use model::{AdjacencyMatrix, AssumptionReport, DcmmParams, EdgeProbabilityMatrix};
pub use privacy::{DebiasedMatrix, PrivacyParams, PrivatizedGraph};
pub use rng::RngStream;
pub use spectral::{PseudoDegrees, RegularizedLaplacian, SpectralState};
