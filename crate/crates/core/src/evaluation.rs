//! Loss, signal-to-noise rates, and risk-bound diagnostics.
//!
//! The headline metric is the permutation-minimized mean row L1 distance
//! between two row-stochastic matrices. The minimization over community
//! relabelings decomposes column-by-column, so it is solved exactly as a
//! K-by-K linear assignment problem; a factorial brute-force path is kept as
//! an independent cross-check.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Permutation-minimized loss between two membership matrices.
#[derive(Debug, Clone)]
pub struct LossReport {
    /// Mean per-node L1 distance under the best relabeling, in `[0, 2]`.
    pub loss: f64,
    /// `best_permutation[a] = b`: column `a` of the estimate matched to
    /// column `b` of the reference.
    pub best_permutation: Vec<usize>,
    /// Per-node L1 distances under the best relabeling.
    pub per_node_l1: Array1<f64>,
}

/// Exact loss via optimal assignment on the column-match cost matrix.
pub fn permutation_loss(pi_hat: &Array2<f64>, pi: &Array2<f64>) -> Result<LossReport> {
    if pi_hat.dim() != pi.dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{}", pi.nrows(), pi.ncols()),
            got: format!("{}x{}", pi_hat.nrows(), pi_hat.ncols()),
        });
    }
    let n = pi.nrows();
    let k = pi.ncols();
    if n == 0 || k == 0 {
        return Err(Error::InvalidParameters("empty membership matrix".into()));
    }
    let cost = column_cost(pi_hat, pi);
    let assignment = solve_assignment(&cost);
    let mut per_node_l1 = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut acc = 0.0;
        for a in 0..k {
            acc += (pi_hat[[i, a]] - pi[[i, assignment[a]]]).abs();
        }
        per_node_l1[i] = acc;
    }
    let loss = per_node_l1.sum() / n as f64;
    Ok(LossReport {
        loss,
        best_permutation: assignment,
        per_node_l1,
    })
}

/// Brute-force loss over all K! relabelings; independent cross-check for the
/// assignment path. K is capped to keep the factorial harmless.
pub fn permutation_loss_brute(pi_hat: &Array2<f64>, pi: &Array2<f64>) -> Result<f64> {
    if pi_hat.dim() != pi.dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{}", pi.nrows(), pi.ncols()),
            got: format!("{}x{}", pi_hat.nrows(), pi_hat.ncols()),
        });
    }
    let k = pi.ncols();
    if k > 8 {
        return Err(Error::InvalidConfig(format!(
            "brute-force path caps K at 8, got {k}"
        )));
    }
    let cost = column_cost(pi_hat, pi);
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = f64::INFINITY;
    permute_all(&mut perm, 0, &mut |p| {
        let total: f64 = (0..k).map(|a| cost[[a, p[a]]]).sum();
        if total < best {
            best = total;
        }
    });
    Ok(best / pi.nrows() as f64)
}

fn permute_all(perm: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == perm.len() {
        visit(perm);
        return;
    }
    for i in start..perm.len() {
        perm.swap(start, i);
        permute_all(perm, start + 1, visit);
        perm.swap(start, i);
    }
}

/// `cost[a][b] = sum_i |pi_hat[i,a] - pi[i,b]|`.
fn column_cost(pi_hat: &Array2<f64>, pi: &Array2<f64>) -> Array2<f64> {
    let n = pi.nrows();
    let k = pi.ncols();
    let mut cost = Array2::<f64>::zeros((k, k));
    for a in 0..k {
        for b in 0..k {
            let mut acc = 0.0;
            for i in 0..n {
                acc += (pi_hat[[i, a]] - pi[[i, b]]).abs();
            }
            cost[[a, b]] = acc;
        }
    }
    cost
}

/// Exact minimum-cost perfect matching on a square cost matrix (potentials
/// plus shortest augmenting paths, O(K^3)). Returns `perm` with `perm[row] =
/// column`.
fn solve_assignment(cost: &Array2<f64>) -> Vec<usize> {
    let n = cost.nrows();
    debug_assert_eq!(n, cost.ncols());
    // 1-based with a sentinel column 0
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched = vec![0usize; n + 1]; // matched[col] = row
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 1..=n {
        if matched[j] != 0 {
            perm[matched[j] - 1] = j - 1;
        }
    }
    perm
}

/// `coth(eps / 2) = (e^eps + 1) / (e^eps - 1)`; exactly 1 for an infinite
/// budget (the non-private limit).
pub fn coth_factor(epsilon: f64) -> Result<f64> {
    if epsilon.is_infinite() && epsilon > 0.0 {
        return Ok(1.0);
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidPrivacyBudget(epsilon));
    }
    let e = epsilon.exp();
    Ok((e + 1.0) / (e - 1.0))
}

/// Error rate `K^{3/2} * coth(eps/2) / (delta_n * sqrt(n * theta_bar^2))`.
pub fn compute_err_n(
    k: usize,
    delta_n: f64,
    n: usize,
    theta_bar: f64,
    epsilon: f64,
) -> Result<f64> {
    if !(delta_n > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "delta_n = {delta_n} must be strictly positive"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameters("n must be at least 1".into()));
    }
    if !(theta_bar > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "theta_bar = {theta_bar} must be strictly positive"
        )));
    }
    let factor = coth_factor(epsilon)?;
    let scale = (n as f64).sqrt() * theta_bar;
    Ok((k as f64).powf(1.5) / (delta_n * scale) * factor)
}

/// Signal-to-noise summary `min{beta_n, alpha_n / sqrt(K)}`, with warnings
/// when the inputs leave their theoretical ranges.
pub fn compute_delta_n(alpha_n: f64, beta_n: f64, k: usize) -> (f64, Vec<String>) {
    let mut warnings = Vec::new();
    if !(1.0..=k as f64).contains(&alpha_n) {
        warnings.push(format!(
            "alpha_n = {alpha_n} outside [1, K] = [1, {k}]; using it anyway"
        ));
    }
    if !(beta_n > 0.0 && beta_n < 1.0) {
        warnings.push(format!(
            "beta_n = {beta_n} outside (0, 1); using it anyway"
        ));
    }
    (beta_n.min(alpha_n / (k as f64).sqrt()), warnings)
}

/// Upper-bound integrand: `(1/n) sum_i min{err_n / (t_i ^ 1), 1}` over
/// relative degrees `t_i = theta_i / theta_bar`.
pub fn risk_bound_integral(err_n: f64, relative_degrees: &[f64]) -> f64 {
    integral_against_fn(err_n, relative_degrees, |t| t)
}

/// Lower-bound integrand: `(1/n) sum_i min{err_n / sqrt(t_i ^ 1), 1}`.
/// Reported alongside the upper bound as an optimality-gap diagnostic.
pub fn lower_bound_integral(err_n: f64, relative_degrees: &[f64]) -> f64 {
    integral_against_fn(err_n, relative_degrees, |t| t.sqrt())
}

fn integral_against_fn(err_n: f64, relative_degrees: &[f64], transform: impl Fn(f64) -> f64) -> f64 {
    debug_assert!(err_n >= 0.0);
    if relative_degrees.is_empty() {
        return 0.0;
    }
    let mut acc = 0.0;
    for &t in relative_degrees {
        let denom = transform(t.min(1.0));
        let term = if denom > 0.0 {
            (err_n / denom).min(1.0)
        } else {
            1.0
        };
        acc += term;
    }
    acc / relative_degrees.len() as f64
}

/// Theory-rate snapshot for a model and privacy level.
#[derive(Debug, Clone)]
pub struct TheoryDiagnostics {
    pub err_n: f64,
    pub delta_n: f64,
    pub alpha_n: f64,
    pub beta_n: f64,
    pub coth_factor: f64,
    /// Sorted relative degrees `theta_i / theta_bar` (the support of the
    /// degree distribution the risk bounds integrate against).
    pub f_n: Vec<f64>,
    pub risk_integral: f64,
    pub lower_integral: f64,
    /// Upper over lower integral (constants and the sqrt-log factor are not
    /// folded in).
    pub gap_ratio: f64,
    /// `log(n) * err_n^2`; the guarantees require this to be small.
    pub log_n_err_sq: f64,
    pub warnings: Vec<String>,
}

/// Assemble diagnostics from the degree weights, community count, privacy
/// budget (infinite means non-private), and the `BG` spectrum summaries.
pub fn theory_diagnostics(
    theta: &Array1<f64>,
    k: usize,
    epsilon: f64,
    alpha_n: f64,
    beta_n: f64,
) -> Result<TheoryDiagnostics> {
    let n = theta.len();
    if n == 0 {
        return Err(Error::InvalidParameters("empty theta".into()));
    }
    let theta_bar = theta.sum() / n as f64;
    let (delta_n, warnings) = compute_delta_n(alpha_n, beta_n, k);
    let err_n = compute_err_n(k, delta_n, n, theta_bar, epsilon)?;
    let mut f_n: Vec<f64> = theta.iter().map(|t| t / theta_bar).collect();
    f_n.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let risk_integral = risk_bound_integral(err_n, &f_n);
    let lower_integral = lower_bound_integral(err_n, &f_n);
    let gap_ratio = if lower_integral > 0.0 {
        risk_integral / lower_integral
    } else {
        f64::NAN
    };
    Ok(TheoryDiagnostics {
        err_n,
        delta_n,
        alpha_n,
        beta_n,
        coth_factor: coth_factor(epsilon)?,
        f_n,
        risk_integral,
        lower_integral,
        gap_ratio,
        log_n_err_sq: (n as f64).ln() * err_n * err_n,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn random_stochastic(n: usize, k: usize, stream: &mut RngStream) -> Array2<f64> {
        let mut m = Array2::<f64>::zeros((n, k));
        for i in 0..n {
            let mut total = 0.0;
            for j in 0..k {
                let w = -stream.uniform_oc().ln();
                m[[i, j]] = w;
                total += w;
            }
            for j in 0..k {
                m[[i, j]] /= total;
            }
        }
        m
    }

    #[test]
    fn identical_matrices_zero_loss() {
        let mut s = RngStream::seed(1);
        let pi = random_stochastic(20, 3, &mut s);
        let report = permutation_loss(&pi, &pi).unwrap();
        assert_abs_diff_eq!(report.loss, 0.0, epsilon = 1e-14);
        assert_eq!(report.best_permutation, vec![0, 1, 2]);
    }

    #[test]
    fn column_swap_zero_loss() {
        let mut s = RngStream::seed(2);
        let pi = random_stochastic(15, 2, &mut s);
        let mut swapped = Array2::<f64>::zeros((15, 2));
        for i in 0..15 {
            swapped[[i, 0]] = pi[[i, 1]];
            swapped[[i, 1]] = pi[[i, 0]];
        }
        let report = permutation_loss(&swapped, &pi).unwrap();
        assert_abs_diff_eq!(report.loss, 0.0, epsilon = 1e-14);
        assert_eq!(report.best_permutation, vec![1, 0]);
    }

    #[test]
    fn hand_case_k2() {
        let pi = array![[1.0, 0.0], [0.0, 1.0]];
        let pi_hat = array![[0.9, 0.1], [0.2, 0.8]];
        let report = permutation_loss(&pi_hat, &pi).unwrap();
        assert_abs_diff_eq!(report.loss, 0.3, epsilon = 1e-12);
        assert_eq!(report.best_permutation, vec![0, 1]);
        assert_abs_diff_eq!(report.per_node_l1[0], 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(report.per_node_l1[1], 0.4, epsilon = 1e-12);
    }

    #[test]
    fn assignment_matches_brute_force() {
        for k in 2..=5 {
            let mut s = RngStream::seed(100 + k as u64);
            for _ in 0..50 {
                let pi = random_stochastic(12, k, &mut s);
                let pi_hat = random_stochastic(12, k, &mut s);
                let exact = permutation_loss(&pi_hat, &pi).unwrap().loss;
                let brute = permutation_loss_brute(&pi_hat, &pi).unwrap();
                assert_abs_diff_eq!(exact, brute, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn assignment_matches_brute_force_past_the_crossover() {
        // the assignment path stands alone above K = 5; check it against
        // enumeration up to the brute-force cap
        for k in 6..=8 {
            let mut s = RngStream::seed(200 + k as u64);
            for _ in 0..20 {
                let pi = random_stochastic(10, k, &mut s);
                let pi_hat = random_stochastic(10, k, &mut s);
                let exact = permutation_loss(&pi_hat, &pi).unwrap().loss;
                let brute = permutation_loss_brute(&pi_hat, &pi).unwrap();
                assert_abs_diff_eq!(exact, brute, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn loss_invariant_under_estimate_relabeling() {
        let mut s = RngStream::seed(9);
        let pi = random_stochastic(10, 3, &mut s);
        let pi_hat = random_stochastic(10, 3, &mut s);
        let base = permutation_loss(&pi_hat, &pi).unwrap().loss;
        // permute estimate columns (0 1 2) -> (1 2 0)
        let mut relabeled = Array2::<f64>::zeros((10, 3));
        for i in 0..10 {
            relabeled[[i, 1]] = pi_hat[[i, 0]];
            relabeled[[i, 2]] = pi_hat[[i, 1]];
            relabeled[[i, 0]] = pi_hat[[i, 2]];
        }
        let relabeled_loss = permutation_loss(&relabeled, &pi).unwrap().loss;
        assert_abs_diff_eq!(base, relabeled_loss, epsilon = 1e-12);
    }

    #[test]
    fn loss_bounds_hold() {
        let mut s = RngStream::seed(13);
        for _ in 0..20 {
            let pi = random_stochastic(8, 4, &mut s);
            let pi_hat = random_stochastic(8, 4, &mut s);
            let loss = permutation_loss(&pi_hat, &pi).unwrap().loss;
            assert!((0.0..=2.0).contains(&loss));
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let a = Array2::<f64>::zeros((3, 2));
        let b = Array2::<f64>::zeros((4, 2));
        assert!(permutation_loss(&a, &b).is_err());
    }

    #[test]
    fn coth_factor_values() {
        assert_abs_diff_eq!(coth_factor(f64::INFINITY).unwrap(), 1.0, epsilon = 0.0);
        let e2 = (2.0f64).exp();
        assert_abs_diff_eq!(
            coth_factor(2.0).unwrap(),
            (e2 + 1.0) / (e2 - 1.0),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(coth_factor(2.0).unwrap(), 1.3130, epsilon = 1e-4);
        assert!(coth_factor(0.0).is_err());
    }

    #[test]
    fn err_n_hand_case() {
        // K = 2, delta = 0.9, sqrt(n theta_bar^2) = 8, eps = ln 3:
        // 2^{3/2} / (0.9 * 8) * 2
        let n = 2000usize;
        let theta_bar = 8.0 / (n as f64).sqrt();
        let err = compute_err_n(2, 0.9, n, theta_bar, 3f64.ln()).unwrap();
        let want = 2f64.powf(1.5) / (0.9 * 8.0) * 2.0;
        assert_abs_diff_eq!(err, want, epsilon = 1e-12);
        assert_abs_diff_eq!(err, 0.7857, epsilon = 1e-4);
    }

    #[test]
    fn err_n_infinite_budget() {
        let n = 500usize;
        let theta_bar = 0.3;
        let base = compute_err_n(2, 0.8, n, theta_bar, f64::INFINITY).unwrap();
        let want = 2f64.powf(1.5) / (0.8 * (n as f64).sqrt() * theta_bar);
        assert_abs_diff_eq!(base, want, epsilon = 1e-12);
    }

    #[test]
    fn err_n_monotonicity() {
        let err = |k: usize, d: f64, n: usize, tb: f64, e: f64| {
            compute_err_n(k, d, n, tb, e).unwrap()
        };
        assert!(err(2, 0.9, 1000, 0.3, 5.0) > err(2, 0.9, 1000, 0.3, 8.0));
        assert!(err(2, 0.9, 1000, 0.3, 5.0) > err(2, 0.9, 4000, 0.3, 5.0));
        assert!(err(2, 0.9, 1000, 0.3, 5.0) > err(2, 0.9, 1000, 0.5, 5.0));
        assert!(err(2, 0.5, 1000, 0.3, 5.0) > err(2, 0.9, 1000, 0.3, 5.0));
        assert!(err(3, 0.9, 1000, 0.3, 5.0) > err(2, 0.9, 1000, 0.3, 5.0));
    }

    #[test]
    fn delta_n_cases() {
        let (d, _) = compute_delta_n(4.0, 0.5, 4);
        assert_abs_diff_eq!(d, 0.5, epsilon = 1e-15);
        let (d, warnings) = compute_delta_n(1.0, 1.0, 4);
        assert_abs_diff_eq!(d, 0.5, epsilon = 1e-15);
        assert!(!warnings.is_empty()); // beta_n = 1 leaves (0, 1)
    }

    #[test]
    fn delta_n_tracks_planted_contrast() {
        // equal pure communities, identity theta: delta_n from the audited
        // BG spectrum stays within a constant factor of the planted
        // diagonal boost, and scales with it
        use crate::model::{audit_assumptions, make_planted_b, AuditConfig, DcmmParams, DegreeConvention};
        let n = 40;
        let mut deltas = Vec::new();
        for &beta in &[0.5f64, 0.9] {
            let mut pi = Array2::<f64>::zeros((n, 2));
            for i in 0..n {
                pi[[i, i % 2]] = 1.0;
            }
            let params = DcmmParams::new(
                Array1::ones(n),
                pi,
                make_planted_b(2, beta).unwrap(),
            )
            .unwrap();
            let cfg = AuditConfig {
                convention: DegreeConvention::Expected,
                ..AuditConfig::default()
            };
            let report = audit_assumptions(&params, &cfg);
            let (delta, _) =
                compute_delta_n(report.alpha_n.unwrap(), report.beta_n.unwrap(), 2);
            let ratio = delta / beta;
            assert!(
                (0.5..=4.0).contains(&ratio),
                "delta_n = {delta} vs planted {beta}: ratio {ratio}"
            );
            deltas.push(delta);
        }
        assert!(deltas[1] > deltas[0], "stronger contrast, larger delta_n");
    }

    #[test]
    fn risk_integral_cases() {
        assert_abs_diff_eq!(
            risk_bound_integral(1.5, &[0.4, 1.0, 3.0]),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            risk_bound_integral(0.2, &[1.0, 1.0, 1.0]),
            0.2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            risk_bound_integral(0.2, &[0.5, 1.0, 2.0, 0.1]),
            0.45,
            epsilon = 1e-12
        );
    }

    #[test]
    fn lower_integral_cases() {
        assert_abs_diff_eq!(
            lower_bound_integral(1.0, &[0.2, 0.9]),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            lower_bound_integral(0.2, &[1.0, 1.0]),
            0.2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            lower_bound_integral(0.3, &[0.25, 1.0]),
            0.45,
            epsilon = 1e-12
        );
    }

    #[test]
    fn upper_dominates_lower_on_subunit_degrees() {
        // for err <= 1 and all t <= 1: 1/(t^1) >= 1/sqrt(t^1)
        let mut s = RngStream::seed(3);
        for _ in 0..50 {
            let degrees: Vec<f64> = (0..30).map(|_| s.uniform_oc()).collect();
            let err = s.uniform_oc();
            assert!(
                risk_bound_integral(err, &degrees) >= lower_bound_integral(err, &degrees) - 1e-15
            );
        }
    }

    #[test]
    fn diagnostics_invariant() {
        let theta = Array1::from_elem(100, 0.4);
        let d = theory_diagnostics(&theta, 2, 4.0, 1.5, 0.8).unwrap();
        let expect = 2f64.powf(1.5) / (d.delta_n * (100f64).sqrt() * 0.4) * d.coth_factor;
        assert!((d.err_n - expect).abs() <= 1e-12 * expect);
        assert!((0.0..=1.0).contains(&d.risk_integral));
        assert!(d.gap_ratio >= 1.0 - 1e-12 || d.gap_ratio.is_nan());
    }
}
