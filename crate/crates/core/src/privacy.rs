//! Edge-level local differential privacy by symmetric edge flipping.
//!
//! Each upper-triangular adjacency bit is independently kept with probability
//! `e^eps / (1 + e^eps)` and flipped with probability `p_eps = 1 / (1 + e^eps)`,
//! then mirrored to the lower triangle. The per-entry channel is binary
//! symmetric with crossover `p_eps`, so the worst-case likelihood ratio
//! between graphs differing in one edge is exactly `e^eps`.
//!
//! The debias map `x -> (x - p_eps) / (1 - 2 p_eps)` recenters the release so
//! that, entrywise, its expectation equals the original adjacency matrix --
//! and hence, over the model, the off-diagonal edge-probability matrix.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::{AdjacencyMatrix, EdgeProbabilityMatrix};
use crate::rng::RngStream;

/// Privacy budget and the flip probability it induces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyParams {
    epsilon: f64,
    p_eps: f64,
}

impl PrivacyParams {
    /// Build from a strictly positive budget.
    pub fn new(epsilon: f64) -> Result<Self> {
        Ok(Self {
            epsilon,
            p_eps: flip_probability(epsilon)?,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `p_eps = 1 / (1 + e^eps)`, in `(0, 1/2)`.
    pub fn p_eps(&self) -> f64 {
        self.p_eps
    }
}

/// Flip probability `1 / (1 + e^eps)` for a positive budget.
pub fn flip_probability(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidPrivacyBudget(epsilon));
    }
    Ok(1.0 / (1.0 + epsilon.exp()))
}

/// Output of the edge-flip mechanism: a synthetic graph plus its budget.
#[derive(Debug, Clone)]
pub struct PrivatizedGraph {
    m: Array2<u8>,
    privacy: PrivacyParams,
}

impl PrivatizedGraph {
    pub fn matrix(&self) -> &Array2<u8> {
        &self.m
    }

    pub fn privacy(&self) -> PrivacyParams {
        self.privacy
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    /// View the privatized release as an adjacency matrix.
    pub fn to_adjacency(&self) -> AdjacencyMatrix {
        AdjacencyMatrix::from_dense_unchecked(self.m.clone())
    }
}

/// Real symmetric matrix with zero diagonal whose expectation under the
/// mechanism matches `Omega - diag(Omega)`.
///
/// Also the carrier for the two mechanism bypasses: a raw adjacency matrix
/// (non-private mode) or an exact edge-probability matrix (oracle runs), in
/// which case no privacy parameters are attached.
#[derive(Debug, Clone)]
pub struct DebiasedMatrix {
    m: Array2<f64>,
    privacy: Option<PrivacyParams>,
}

impl DebiasedMatrix {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.m
    }

    pub fn privacy(&self) -> Option<PrivacyParams> {
        self.privacy
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    /// Non-private bypass: use the adjacency matrix as-is.
    pub fn from_adjacency(a: &AdjacencyMatrix) -> Self {
        let n = a.n();
        let mut m = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                m[[i, j]] = a.matrix()[[i, j]] as f64;
            }
        }
        Self { m, privacy: None }
    }

    /// Oracle bypass: `Omega - diag(Omega)`, no sampling and no privacy.
    pub fn from_omega(omega: &EdgeProbabilityMatrix) -> Self {
        let mut m = omega.matrix().clone();
        for i in 0..m.nrows() {
            m[[i, i]] = 0.0;
        }
        Self { m, privacy: None }
    }
}

/// Flip each upper-triangular bit independently with probability `p_eps`,
/// mirror, and zero the diagonal. One uniform draw per pair, row-major order.
pub fn symmetric_edge_flip(
    a: &AdjacencyMatrix,
    privacy: PrivacyParams,
    stream: &mut RngStream,
) -> PrivatizedGraph {
    let n = a.n();
    let p = privacy.p_eps();
    let mut m = Array2::<u8>::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let bit = a.matrix()[[i, j]];
            let out = if stream.event(p) { 1 - bit } else { bit };
            m[[i, j]] = out;
            m[[j, i]] = out;
        }
    }
    PrivatizedGraph { m, privacy }
}

/// Debias a privatized release: off-diagonal `x -> (x - p_eps)/(1 - 2 p_eps)`,
/// diagonal forced to zero.
pub fn debias(p: &PrivatizedGraph) -> DebiasedMatrix {
    let n = p.n();
    let pe = p.privacy.p_eps();
    let scale = 1.0 - 2.0 * pe;
    let one = (1.0 - pe) / scale;
    let zero = (0.0 - pe) / scale;
    let mut m = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m[[i, j]] = if p.m[[i, j]] == 1 { one } else { zero };
            }
        }
    }
    DebiasedMatrix {
        m,
        privacy: Some(p.privacy),
    }
}

/// The per-entry channel of the mechanism and its worst-case likelihood
/// ratio, which certifies the privacy level.
#[derive(Debug, Clone, Copy)]
pub struct LdpCertificate {
    pub epsilon: f64,
    /// P(out = 1 | in = 1)
    pub p_one_given_one: f64,
    /// P(out = 0 | in = 1)
    pub p_zero_given_one: f64,
    /// P(out = 1 | in = 0)
    pub p_one_given_zero: f64,
    /// P(out = 0 | in = 0)
    pub p_zero_given_zero: f64,
    /// Maximum likelihood ratio across outputs and input swaps.
    pub max_ratio: f64,
    /// Relative error of `max_ratio` against `e^eps`.
    pub relative_error: f64,
}

/// Compute the channel probabilities and verify the worst-case likelihood
/// ratio equals `e^eps`.
pub fn ldp_certificate(privacy: PrivacyParams) -> LdpCertificate {
    let p = privacy.p_eps();
    let keep = 1.0 - p;
    let max_ratio = (keep / p).max(p / keep);
    let target = privacy.epsilon().exp();
    LdpCertificate {
        epsilon: privacy.epsilon(),
        p_one_given_one: keep,
        p_zero_given_one: p,
        p_one_given_zero: p,
        p_zero_given_zero: keep,
        max_ratio,
        relative_error: (max_ratio - target).abs() / target,
    }
}
