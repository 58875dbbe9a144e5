//! Regularized Laplacian, leading eigenstructure, node truncation, and
//! degree-cancelling eigenvector ratios.
//!
//! Given the (possibly debiased) symmetric matrix `M` with zero diagonal:
//! pseudo-degrees are its row sums, `H = diag(d) + tau * dbar * I`, and the
//! Laplacian is `L = H^{-1/2} M H^{-1/2}`. The top-k eigenpairs of `L` by
//! magnitude drive everything downstream; dividing eigenvector columns
//! `2..=K` entrywise by the leading column removes degree heterogeneity and
//! places nodes inside a `(K-1)`-simplex whose vertices are pure nodes.

use ndarray::{Array1, Array2, ArrayView2};

use crate::eigen;
use crate::error::{Error, Result};
use crate::privacy::DebiasedMatrix;

/// Division floor on leading-eigenvector entries; rows at or below it are
/// evicted rather than divided.
pub const LEADING_ENTRY_FLOOR: f64 = 1e-12;

/// Row sums of the debiased matrix (diagonal excluded) and their mean.
#[derive(Debug, Clone)]
pub struct PseudoDegrees {
    d: Array1<f64>,
    d_bar: f64,
}

impl PseudoDegrees {
    pub fn values(&self) -> &Array1<f64> {
        &self.d
    }

    pub fn mean(&self) -> f64 {
        self.d_bar
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }
}

/// `L = H^{-1/2} M H^{-1/2}` with `H = diag(d) + tau * dbar * I`.
#[derive(Debug, Clone)]
pub struct RegularizedLaplacian {
    l: Array2<f64>,
    tau: f64,
    h_diag: Array1<f64>,
}

impl RegularizedLaplacian {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.l
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn h_diag(&self) -> &Array1<f64> {
        &self.h_diag
    }

    pub fn n(&self) -> usize {
        self.l.nrows()
    }
}

/// Eigenstructure snapshot consumed by the membership estimator.
#[derive(Debug, Clone)]
pub struct SpectralState {
    /// Selected eigenvalues: largest signed value first, rest descending.
    pub lambdas: Vec<f64>,
    /// Matching eigenvectors (orthonormal columns, signs normalized).
    pub xi: Array2<f64>,
    /// `min{sqrt(K)(l1 - l2), sqrt(K)|lK|}`.
    pub delta_hat_sq: f64,
    /// Nodes surviving the degree truncation (and the division floor).
    pub s_hat: Vec<usize>,
    /// Subset of `s_hat` eligible for vertex hunting.
    pub s_gamma: Vec<usize>,
    /// Ratio rows, one per element of `s_hat`, in order.
    pub ratios: Array2<f64>,
    /// Nodes dropped from `s_hat` because their leading entry was at or
    /// below the division floor.
    pub evicted_low_leading: usize,
}

/// Row sums excluding the diagonal, plus their mean.
pub fn pseudo_degrees(m: &DebiasedMatrix) -> PseudoDegrees {
    let mat = m.matrix();
    let n = m.n();
    let mut d = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            if j != i {
                acc += mat[[i, j]];
            }
        }
        d[i] = acc;
    }
    let d_bar = d.sum() / n as f64;
    PseudoDegrees { d, d_bar }
}

/// Assemble the regularized Laplacian. Every `H_ii = d_i + tau * dbar` must
/// be strictly positive; debiased degrees can be negative, so this can fail,
/// in which case the caller should raise `tau` or abandon the run.
pub fn build_laplacian(
    m: &DebiasedMatrix,
    deg: &PseudoDegrees,
    tau: f64,
) -> Result<RegularizedLaplacian> {
    let n = m.n();
    if !(tau > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "tau = {tau} must be strictly positive"
        )));
    }
    let h_diag = deg.values() + tau * deg.mean();
    let min_h = h_diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_h <= 0.0 {
        return Err(Error::RegularizationFailure { min_h });
    }
    let inv_sqrt: Array1<f64> = h_diag.mapv(|h| 1.0 / h.sqrt());
    let mat = m.matrix();
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                l[[i, j]] = mat[[i, j]] * inv_sqrt[i] * inv_sqrt[j];
            }
        }
    }
    Ok(RegularizedLaplacian { l, tau, h_diag })
}

/// Top-k eigenpairs of the Laplacian by magnitude, with the estimator's
/// ordering and sign conventions applied.
pub fn top_k_eigen(l: &RegularizedLaplacian, k: usize) -> Result<(Vec<f64>, Array2<f64>)> {
    top_k_eigen_matrix(l.matrix().view(), k)
}

/// Same as [`top_k_eigen`], on a raw symmetric matrix.
///
/// Selection is by largest `|lambda|`; the returned list is then reordered so
/// the largest signed eigenvalue comes first and the remainder descend by
/// signed value. The first eigenvector is flipped to a positive entry sum
/// (the population leading vector is entrywise positive); later columns are
/// flipped so their largest-magnitude entry is positive.
pub fn top_k_eigen_matrix(a: ArrayView2<'_, f64>, k: usize) -> Result<(Vec<f64>, Array2<f64>)> {
    let out = eigen::top_k_by_magnitude(a, k)?;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| out.values[j].partial_cmp(&out.values[i]).unwrap());
    let lambdas: Vec<f64> = order.iter().map(|&i| out.values[i]).collect();
    let n = a.nrows();
    let mut xi = Array2::<f64>::zeros((n, k));
    for (new_col, &old_col) in order.iter().enumerate() {
        xi.column_mut(new_col).assign(&out.vectors.column(old_col));
    }
    // sign conventions
    for col in 0..k {
        let column = xi.column(col);
        let flip = if col == 0 {
            let sum: f64 = column.sum();
            if sum != 0.0 {
                sum < 0.0
            } else {
                largest_magnitude_entry(column.iter()) < 0.0
            }
        } else {
            largest_magnitude_entry(column.iter()) < 0.0
        };
        if flip {
            xi.column_mut(col).mapv_inplace(|x| -x);
        }
    }
    Ok((lambdas, xi))
}

fn largest_magnitude_entry<'a>(iter: impl Iterator<Item = &'a f64>) -> f64 {
    let mut best = 0.0f64;
    for &x in iter {
        if x.abs() > best.abs() {
            best = x;
        }
    }
    best
}

/// `min{sqrt(K)(lambda_1 - lambda_2), sqrt(K)|lambda_K|}` for eigenvalues in
/// the estimator's order.
pub fn compute_delta_hat(lambdas: &[f64]) -> f64 {
    let k = lambdas.len();
    assert!(k >= 2, "delta_hat needs at least two eigenvalues");
    let root_k = (k as f64).sqrt();
    (root_k * (lambdas[0] - lambdas[1])).min(root_k * lambdas[k - 1].abs())
}

/// Degree truncation sets.
///
/// `s_hat = {i : d_i * delta_hat_sq >= c K^3 ln n}` keeps nodes whose degree
/// is comparable to the spectral gap; `s_gamma = {i in s_hat : d_i >= gamma *
/// dbar}` further restricts vertex hunting to solidly connected nodes.
pub fn select_nodes(
    deg: &PseudoDegrees,
    delta_hat_sq: f64,
    c: f64,
    gamma: f64,
    k: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = deg.n();
    let threshold = c * (k as f64).powi(3) * (n as f64).ln();
    let mut s_hat = Vec::new();
    let mut s_gamma = Vec::new();
    for i in 0..n {
        let d_i = deg.values()[i];
        if d_i * delta_hat_sq >= threshold {
            s_hat.push(i);
            if d_i >= gamma * deg.mean() {
                s_gamma.push(i);
            }
        }
    }
    if s_gamma.is_empty() {
        return Err(Error::VertexHuntInfeasible);
    }
    Ok((s_hat, s_gamma))
}

/// Ratio rows `(xi_{i,2}/xi_{i,1}, ..., xi_{i,K}/xi_{i,1})` for retained
/// nodes.
///
/// Nodes whose leading entry is at or below [`LEADING_ENTRY_FLOOR`] cannot be
/// divided and are evicted; the survivors are returned along with their ratio
/// rows and the eviction count.
pub fn score_ratios(xi: &Array2<f64>, s_hat: &[usize]) -> (Vec<usize>, Array2<f64>, usize) {
    let k = xi.ncols();
    let mut retained = Vec::with_capacity(s_hat.len());
    for &i in s_hat {
        if xi[[i, 0]] > LEADING_ENTRY_FLOOR {
            retained.push(i);
        }
    }
    let evicted = s_hat.len() - retained.len();
    let mut ratios = Array2::<f64>::zeros((retained.len(), k - 1));
    for (row, &i) in retained.iter().enumerate() {
        let lead = xi[[i, 0]];
        for j in 1..k {
            ratios[[row, j - 1]] = xi[[i, j]] / lead;
        }
    }
    (retained, ratios, evicted)
}
