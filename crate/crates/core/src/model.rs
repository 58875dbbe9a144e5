//! Degree-corrected mixed-membership block model: parameters, edge
//! probabilities, and graph sampling.
//!
//! A model on `n` nodes and `K` communities is the triple `(theta, pi, b)`:
//! `theta` holds per-node degree weights, each row of `pi` is a probability
//! vector over communities, and `b` is the symmetric community connectivity
//! matrix. Edges are independent Bernoulli draws with
//! `P[i ~ j] = theta_i * theta_j * pi_i' B pi_j`.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::rng::RngStream;

pub mod audit;

pub use audit::{audit_assumptions, AssumptionCheck, AssumptionReport, AuditConfig, DegreeConvention};

/// Default upper bound on the degree weights.
pub const DEFAULT_THETA_BOUND: f64 = 10.0;

const ROW_SUM_TOL: f64 = 1e-12;

/// The generative triple `(theta, pi, b)` plus derived summaries.
#[derive(Debug, Clone)]
pub struct DcmmParams {
    theta: Array1<f64>,
    pi: Array2<f64>,
    b: Array2<f64>,
}

impl DcmmParams {
    /// Validate and build model parameters with the default `theta` bound.
    pub fn new(theta: Array1<f64>, pi: Array2<f64>, b: Array2<f64>) -> Result<Self> {
        Self::with_theta_bound(theta, pi, b, DEFAULT_THETA_BOUND)
    }

    /// Validate and build model parameters, bounding `theta` by `bound`.
    pub fn with_theta_bound(
        theta: Array1<f64>,
        pi: Array2<f64>,
        b: Array2<f64>,
        bound: f64,
    ) -> Result<Self> {
        let n = theta.len();
        let k = b.nrows();
        if n == 0 {
            return Err(Error::InvalidParameters("n must be at least 1".into()));
        }
        if k == 0 || k > n {
            return Err(Error::InvalidParameters(format!(
                "community count K = {k} must satisfy 1 <= K <= n = {n}"
            )));
        }
        if pi.nrows() != n || pi.ncols() != k {
            return Err(Error::ShapeMismatch {
                expected: format!("pi of shape {n}x{k}"),
                got: format!("{}x{}", pi.nrows(), pi.ncols()),
            });
        }
        if b.ncols() != k {
            return Err(Error::ShapeMismatch {
                expected: format!("b of shape {k}x{k}"),
                got: format!("{}x{}", b.nrows(), b.ncols()),
            });
        }
        for (i, &t) in theta.iter().enumerate() {
            if !(t > 0.0) {
                return Err(Error::InvalidParameters(format!(
                    "theta[{i}] = {t} is not strictly positive"
                )));
            }
            if t > bound {
                return Err(Error::InvalidParameters(format!(
                    "theta[{i}] = {t} exceeds the bound {bound}"
                )));
            }
        }
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..k {
                let p = pi[[i, j]];
                if p < 0.0 {
                    return Err(Error::InvalidParameters(format!(
                        "pi[{i},{j}] = {p} is negative"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidParameters(format!(
                    "row {i} of pi sums to {sum}, not 1"
                )));
            }
        }
        for a in 0..k {
            for c in 0..k {
                let v = b[[a, c]];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidParameters(format!(
                        "b[{a},{c}] = {v} outside [0, 1]"
                    )));
                }
                if (v - b[[c, a]]).abs() > ROW_SUM_TOL {
                    return Err(Error::InvalidParameters(format!(
                        "b is not symmetric at ({a},{c})"
                    )));
                }
            }
        }
        Ok(Self { theta, pi, b })
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn k(&self) -> usize {
        self.b.nrows()
    }

    pub fn theta(&self) -> &Array1<f64> {
        &self.theta
    }

    pub fn pi(&self) -> &Array2<f64> {
        &self.pi
    }

    pub fn b(&self) -> &Array2<f64> {
        &self.b
    }

    /// Mean of the degree weights.
    pub fn theta_bar(&self) -> f64 {
        self.theta.sum() / self.n() as f64
    }

    /// Degree scale `sqrt(n * theta_bar^2)`.
    pub fn scale_b_n(&self) -> f64 {
        (self.n() as f64).sqrt() * self.theta_bar()
    }
}

/// Symmetric matrix of edge probabilities, entries in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct EdgeProbabilityMatrix {
    omega: Array2<f64>,
}

impl EdgeProbabilityMatrix {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.omega
    }

    pub fn n(&self) -> usize {
        self.omega.nrows()
    }
}

/// Binary symmetric adjacency matrix with zero diagonal.
#[derive(Debug, Clone)]
pub struct AdjacencyMatrix {
    a: Array2<u8>,
}

impl AdjacencyMatrix {
    /// Wrap a raw 0/1 matrix, enforcing symmetry and a zero diagonal.
    pub fn from_dense(a: Array2<u8>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::ShapeMismatch {
                expected: format!("{n}x{n}"),
                got: format!("{}x{}", a.nrows(), a.ncols()),
            });
        }
        for i in 0..n {
            if a[[i, i]] != 0 {
                return Err(Error::InvalidParameters(format!(
                    "adjacency diagonal entry ({i},{i}) is nonzero"
                )));
            }
            for j in (i + 1)..n {
                if a[[i, j]] > 1 || a[[i, j]] != a[[j, i]] {
                    return Err(Error::InvalidParameters(format!(
                        "adjacency entry ({i},{j}) not a symmetric bit"
                    )));
                }
            }
        }
        Ok(Self { a })
    }

    pub(crate) fn from_dense_unchecked(a: Array2<u8>) -> Self {
        Self { a }
    }

    pub fn matrix(&self) -> &Array2<u8> {
        &self.a
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        let mut count = 0usize;
        let n = self.n();
        for i in 0..n {
            for j in (i + 1)..n {
                count += self.a[[i, j]] as usize;
            }
        }
        count
    }
}

/// Compute `Omega = Theta Pi B Pi' Theta` and verify every entry is a
/// probability.
pub fn build_omega(params: &DcmmParams) -> Result<EdgeProbabilityMatrix> {
    let n = params.n();
    let k = params.k();
    // s = Theta * Pi, t = s * B; omega_ij = t_i . s_j
    let mut s = params.pi.clone();
    for (i, mut row) in s.rows_mut().into_iter().enumerate() {
        row *= params.theta[i];
    }
    let t = s.dot(&params.b);
    let mut omega = Array2::<f64>::zeros((n, n));
    // off-diagonal pairs first: these are the actual edge probabilities
    for i in 0..n {
        for j in (i + 1)..n {
            let mut v = 0.0;
            for a in 0..k {
                v += t[[i, a]] * s[[j, a]];
            }
            if v > 1.0 {
                return Err(Error::InvalidParameters(format!(
                    "edge probability at ({i},{j}) is {v}, above 1"
                )));
            }
            omega[[i, j]] = v;
            omega[[j, i]] = v;
        }
    }
    for i in 0..n {
        let mut v = 0.0;
        for a in 0..k {
            v += t[[i, a]] * s[[i, a]];
        }
        if v > 1.0 {
            return Err(Error::InvalidParameters(format!(
                "edge probability at ({i},{i}) is {v}, above 1"
            )));
        }
        omega[[i, i]] = v;
    }
    Ok(EdgeProbabilityMatrix { omega })
}

/// Sample an adjacency matrix from the model.
///
/// Each pair `i < j` is an independent Bernoulli draw with probability
/// `omega_ij`, consuming exactly one uniform in row-major upper-triangular
/// order; the lower triangle mirrors the upper and the diagonal is zero.
pub fn sample_graph(params: &DcmmParams, stream: &mut RngStream) -> Result<AdjacencyMatrix> {
    let omega = build_omega(params)?;
    Ok(sample_from_omega(&omega, stream))
}

/// Sample from a prebuilt edge-probability matrix (saves rebuilding `Omega`
/// across replications).
pub fn sample_from_omega(omega: &EdgeProbabilityMatrix, stream: &mut RngStream) -> AdjacencyMatrix {
    let n = omega.n();
    let mut a = Array2::<u8>::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let bit = u8::from(stream.event(omega.omega[[i, j]]));
            a[[i, j]] = bit;
            a[[j, i]] = bit;
        }
    }
    AdjacencyMatrix { a }
}

/// Draw degree weights `theta_i = sqrt(n) * b_n * u_i / sum(u)` with
/// `u_i ~ Uniform[lo, hi]`, so that `sqrt(n * theta_bar^2) = b_n` exactly.
pub fn gen_theta(
    n: usize,
    b_n: f64,
    lo: f64,
    hi: f64,
    stream: &mut RngStream,
) -> Result<Array1<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameters("n must be at least 1".into()));
    }
    if !(b_n > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "b_n = {b_n} must be strictly positive"
        )));
    }
    if !(lo > 0.0) || hi < lo {
        return Err(Error::InvalidParameters(format!(
            "theta range [{lo}, {hi}] must satisfy 0 < lo <= hi"
        )));
    }
    let raw: Array1<f64> = Array1::from_iter((0..n).map(|_| stream.uniform_in(lo, hi)));
    let total = raw.sum();
    let scale = (n as f64).sqrt() * b_n / total;
    Ok(raw * scale)
}

/// Connectivity matrix with unit diagonal and off-diagonal `1 - beta_n`.
pub fn make_planted_b(k: usize, beta_n: f64) -> Result<Array2<f64>> {
    if k == 0 {
        return Err(Error::InvalidParameters("K must be at least 1".into()));
    }
    if !(beta_n > 0.0 && beta_n < 1.0) {
        return Err(Error::InvalidParameters(format!(
            "beta_n = {beta_n} must lie strictly inside (0, 1)"
        )));
    }
    let mut b = Array2::<f64>::from_elem((k, k), 1.0 - beta_n);
    for i in 0..k {
        b[[i, i]] = 1.0;
    }
    Ok(b)
}
