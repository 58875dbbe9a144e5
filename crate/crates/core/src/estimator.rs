//! End-to-end membership estimation.
//!
//! From a debiased (or raw, or exact-probability) symmetric matrix:
//! pseudo-degrees, regularized Laplacian, top-K eigenpairs, degree
//! truncation, eigenvector ratios, vertex hunting, per-node barycentric
//! weights, and the reverse transform back to a row-stochastic membership
//! matrix. Nodes cut by the truncation (or failing any per-row guard) get
//! the uninformative row `(1/K, ..., 1/K)` and are flagged.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::hunting::{self, HuntConfig, SimplexVertices};
use crate::linalg::{invert, norm_1, solve_linear};
use crate::model::{AdjacencyMatrix, EdgeProbabilityMatrix};
use crate::privacy::{self, DebiasedMatrix, PrivacyParams};
use crate::rng::RngStream;
use crate::spectral::{self, SpectralState};

/// Condition-number estimate above which the barycentric solve falls back to
/// constrained least squares.
const BARYCENTRIC_COND_LIMIT: f64 = 1e10;

/// Tuning parameters for one estimation run.
#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    /// Number of communities (K >= 2).
    pub k: usize,
    /// Laplacian regularization weight.
    pub tau: f64,
    /// Degree-truncation constant.
    pub c: f64,
    /// Vertex-hunting degree filter.
    pub gamma: f64,
    /// When set, graph-level entry points privatize before estimating;
    /// absent means non-private mode (the adjacency matrix is used as-is).
    pub privacy: Option<PrivacyParams>,
    pub hunt: HuntConfig,
}

impl EstimatorConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            tau: 1.0,
            c: 0.01,
            gamma: 0.5,
            privacy: None,
            hunt: HuntConfig::default(),
        }
    }

    pub fn with_privacy(mut self, privacy: PrivacyParams) -> Self {
        self.privacy = Some(privacy);
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidConfig(format!(
                "estimation needs K >= 2, got {}",
                self.k
            )));
        }
        if self.k > n {
            return Err(Error::InvalidConfig(format!(
                "K = {} exceeds node count {n}",
                self.k
            )));
        }
        if !(self.tau > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tau = {} must be strictly positive",
                self.tau
            )));
        }
        if !(self.c > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "c = {} must be strictly positive",
                self.c
            )));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "gamma = {} must be nonnegative",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Estimated membership matrix with provenance.
#[derive(Debug, Clone)]
pub struct MembershipEstimate {
    /// Row-stochastic n-by-K matrix.
    pub pi_hat: Array2<f64>,
    /// True where the row is the uninformative default.
    pub default_row: Vec<bool>,
    /// Eigenstructure snapshot.
    pub spectral: SpectralState,
    /// Hunted vertices (absent on the all-default fallback).
    pub vertices: Option<SimplexVertices>,
    /// Leading-row scale factors; non-finite entries mark communities whose
    /// radicand was nonpositive.
    pub v1: Option<Array1<f64>>,
    pub warnings: Vec<String>,
}

impl MembershipEstimate {
    pub fn n(&self) -> usize {
        self.pi_hat.nrows()
    }

    pub fn k(&self) -> usize {
        self.pi_hat.ncols()
    }

    fn all_default(n: usize, k: usize, spectral: SpectralState, warning: String) -> Self {
        let pi_hat = Array2::from_elem((n, k), 1.0 / k as f64);
        Self {
            pi_hat,
            default_row: vec![true; n],
            spectral,
            vertices: None,
            v1: None,
            warnings: vec![warning],
        }
    }
}

/// Run the full pipeline on a debiased matrix.
pub fn estimate_memberships(m: &DebiasedMatrix, cfg: &EstimatorConfig) -> Result<MembershipEstimate> {
    let n = m.n();
    cfg.validate(n)?;
    let k = cfg.k;

    let deg = spectral::pseudo_degrees(m);
    let lap = spectral::build_laplacian(m, &deg, cfg.tau)?;
    let (lambdas, xi) = spectral::top_k_eigen(&lap, k)?;
    let delta_hat_sq = spectral::compute_delta_hat(&lambdas);

    let (s_hat_raw, s_gamma_raw) =
        match spectral::select_nodes(&deg, delta_hat_sq, cfg.c, cfg.gamma, k) {
            Ok(sets) => sets,
            Err(Error::VertexHuntInfeasible) => {
                let state = SpectralState {
                    lambdas,
                    xi,
                    delta_hat_sq,
                    s_hat: Vec::new(),
                    s_gamma: Vec::new(),
                    ratios: Array2::zeros((0, k - 1)),
                    evicted_low_leading: 0,
                };
                return Ok(MembershipEstimate::all_default(
                    n,
                    k,
                    state,
                    "degree truncation left no node for vertex hunting; all rows defaulted"
                        .into(),
                ));
            }
            Err(e) => return Err(e),
        };

    let (s_hat, ratios, evicted) = spectral::score_ratios(&xi, &s_hat_raw);
    let retained: std::collections::HashSet<usize> = s_hat.iter().copied().collect();
    let s_gamma: Vec<usize> = s_gamma_raw
        .iter()
        .copied()
        .filter(|i| retained.contains(i))
        .collect();

    let mut warnings = Vec::new();
    if evicted > 0 {
        warnings.push(format!(
            "{evicted} node(s) evicted: leading eigenvector entry at or below the division floor"
        ));
    }

    if s_gamma.is_empty() {
        let state = SpectralState {
            lambdas,
            xi,
            delta_hat_sq,
            s_hat: Vec::new(),
            s_gamma: Vec::new(),
            ratios: Array2::zeros((0, k - 1)),
            evicted_low_leading: evicted,
        };
        return Ok(MembershipEstimate::all_default(
            n,
            k,
            state,
            "no vertex-hunting candidates survived the division floor; all rows defaulted".into(),
        ));
    }

    // hunt on the gamma-filtered ratio rows
    let row_of: std::collections::HashMap<usize, usize> = s_hat
        .iter()
        .enumerate()
        .map(|(row, &node)| (node, row))
        .collect();
    let mut hunt_points = Array2::<f64>::zeros((s_gamma.len(), k - 1));
    for (r, node) in s_gamma.iter().enumerate() {
        hunt_points.row_mut(r).assign(&ratios.row(row_of[node]));
    }
    let vertices = hunting::sketched_vertex_search(&hunt_points.view(), k, &cfg.hunt)?;

    let v1 = compute_v1(&lambdas, &vertices);
    if v1.iter().any(|x| !x.is_finite()) {
        warnings.push(
            "nonpositive radicand while scaling vertices; affected rows defaulted".into(),
        );
    }

    let mut pi_hat = Array2::<f64>::from_elem((n, k), 1.0 / k as f64);
    let mut default_row = vec![true; n];
    for (row, &node) in s_hat.iter().enumerate() {
        let w = solve_barycentric(&ratios.row(row), &vertices)?;
        let (pi_row, is_default) = reconstruct_pi_row(&w.view(), &v1.view());
        pi_hat.row_mut(node).assign(&pi_row);
        default_row[node] = is_default;
    }

    let state = SpectralState {
        lambdas,
        xi,
        delta_hat_sq,
        s_hat,
        s_gamma,
        ratios,
        evicted_low_leading: evicted,
    };
    Ok(MembershipEstimate {
        pi_hat,
        default_row,
        spectral: state,
        vertices: Some(vertices),
        v1: Some(v1),
        warnings,
    })
}

/// Privatize (when configured) and estimate from an adjacency matrix.
pub fn estimate_from_graph(
    a: &AdjacencyMatrix,
    cfg: &EstimatorConfig,
    stream: &mut RngStream,
) -> Result<MembershipEstimate> {
    let m = match cfg.privacy {
        Some(p) => privacy::debias(&privacy::symmetric_edge_flip(a, p, stream)),
        None => DebiasedMatrix::from_adjacency(a),
    };
    estimate_memberships(&m, cfg)
}

/// Run the pipeline on exact edge probabilities (no sampling, no privacy).
/// On well-conditioned inputs with pure nodes per community this reproduces
/// the true memberships up to column permutation, which makes it the
/// correctness oracle for the whole chain.
pub fn oracle_estimate(
    omega: &EdgeProbabilityMatrix,
    cfg: &EstimatorConfig,
) -> Result<MembershipEstimate> {
    estimate_memberships(&DebiasedMatrix::from_omega(omega), cfg)
}

/// Solve `[V' ; 1'] w = [r ; 1]` for the barycentric weights of a ratio row.
///
/// Well-conditioned systems are solved exactly; past the condition limit the
/// sum constraint is eliminated and the remainder solved by least squares.
/// Weights may be negative; the reverse transform clamps them.
pub fn solve_barycentric(
    r: &ArrayView1<'_, f64>,
    vertices: &SimplexVertices,
) -> Result<Array1<f64>> {
    let k = vertices.k();
    let v = vertices.matrix();
    let mut a = Array2::<f64>::zeros((k, k));
    for j in 0..k {
        for c in 0..(k - 1) {
            a[[c, j]] = v[[j, c]];
        }
        a[[k - 1, j]] = 1.0;
    }
    let mut rhs = Array1::<f64>::zeros(k);
    for c in 0..(k - 1) {
        rhs[c] = r[c];
    }
    rhs[k - 1] = 1.0;

    if let Some(inv) = invert(&a) {
        if norm_1(&a) * norm_1(&inv) <= BARYCENTRIC_COND_LIMIT {
            return Ok(inv.dot(&rhs));
        }
    }

    // eliminate w_K = 1 - sum(w_1..w_{K-1}) and solve the normal equations
    let dim = k - 1;
    let mut d = Array2::<f64>::zeros((dim, dim));
    let mut target = Array1::<f64>::zeros(dim);
    for c in 0..dim {
        for j in 0..dim {
            d[[c, j]] = v[[j, c]] - v[[k - 1, c]];
        }
        target[c] = r[c] - v[[k - 1, c]];
    }
    let dtd = d.t().dot(&d);
    let dtt = d.t().dot(&target);
    let u = solve_linear(&dtd, &dtt).ok_or(Error::DegenerateGeometry)?;
    let mut w = Array1::<f64>::zeros(k);
    let mut acc = 0.0;
    for j in 0..dim {
        w[j] = u[j];
        acc += u[j];
    }
    w[k - 1] = 1.0 - acc;
    Ok(w)
}

/// Scale factors `v1_j = (lambda_1 + v_j' diag(lambda_2..lambda_K) v_j)^{-1/2}`.
/// A nonpositive radicand marks the community's factor as non-finite.
pub fn compute_v1(lambdas: &[f64], vertices: &SimplexVertices) -> Array1<f64> {
    let k = vertices.k();
    let v = vertices.matrix();
    let mut v1 = Array1::<f64>::zeros(k);
    for j in 0..k {
        let mut quad = 0.0;
        for c in 0..(k - 1) {
            quad += lambdas[c + 1] * v[[j, c]] * v[[j, c]];
        }
        let radicand = lambdas[0] + quad;
        v1[j] = if radicand > 0.0 {
            radicand.powf(-0.5)
        } else {
            f64::NAN
        };
    }
    v1
}

/// Reverse transform: divide weights by the vertex scales, clamp negatives,
/// and normalize to a probability row. Returns the row and whether it fell
/// back to the default.
pub fn reconstruct_pi_row(
    w: &ArrayView1<'_, f64>,
    v1: &ArrayView1<'_, f64>,
) -> (Array1<f64>, bool) {
    let k = w.len();
    let default = Array1::from_elem(k, 1.0 / k as f64);
    if v1.iter().any(|x| !x.is_finite()) {
        return (default, true);
    }
    let mut row = Array1::<f64>::zeros(k);
    let mut total = 0.0;
    for j in 0..k {
        let t = (w[j] / v1[j]).max(0.0);
        row[j] = t;
        total += t;
    }
    if total <= 0.0 {
        return (default, true);
    }
    (row / total, false)
}
