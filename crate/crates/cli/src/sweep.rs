//! Simulation sweeps over degree scale and privacy budget.
//!
//! Each grid cell (b_n, epsilon) is replicated `reps` times. Model
//! randomness (degree weights, memberships, the sampled graph) is keyed by
//! `(seed, b_n, rep)` -- deliberately not by epsilon -- so cells at the same
//! b_n see the same graphs and privacy levels are compared on paired
//! replications. Mechanism randomness is keyed by `(seed, b_n, epsilon,
//! rep)`. Failed replications are recorded as warnings and excluded from the
//! cell's aggregates; a sweep never aborts mid-grid.

use ndarray::Array2;
use privmix_core::estimator::{estimate_memberships, EstimatorConfig};
use privmix_core::evaluation::permutation_loss;
use privmix_core::model::{build_omega, gen_theta, make_planted_b, sample_from_omega, DcmmParams};
use privmix_core::privacy::{debias, symmetric_edge_flip, DebiasedMatrix, PrivacyParams};
use privmix_core::rng::RngStream;
use privmix_core::HuntConfig;
use rayon::prelude::*;

use crate::{HarnessError, Result};

/// Full description of one sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub n: usize,
    pub k: usize,
    pub b_n_grid: Vec<f64>,
    /// `None` entries run in non-private mode.
    pub epsilon_grid: Vec<Option<f64>>,
    pub beta_n: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub reps: usize,
    pub base_seed: u64,
    /// Fraction of nodes made pure (split evenly across communities); the
    /// rest get uniform-Dirichlet mixed rows.
    pub pure_fraction: f64,
    pub tau: f64,
    pub c: f64,
    pub gamma: f64,
    /// Record wall-clock per-replication runtime. Off by default so that the
    /// emitted CSV is byte-identical across runs.
    pub timing: bool,
}

impl SweepSpec {
    pub fn new(n: usize, k: usize, base_seed: u64) -> Self {
        Self {
            n,
            k,
            b_n_grid: vec![8.0],
            epsilon_grid: vec![None],
            beta_n: 0.9,
            theta_lo: 0.3,
            theta_hi: 5.0,
            reps: 100,
            base_seed,
            pure_fraction: 0.5,
            tau: 1.0,
            c: 0.01,
            gamma: 0.5,
            timing: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(HarnessError::InvalidInput("reps must be >= 1".into()));
        }
        if self.b_n_grid.is_empty() || self.epsilon_grid.is_empty() {
            return Err(HarnessError::InvalidInput("grids must be non-empty".into()));
        }
        if self.k < 2 || self.k > self.n {
            return Err(HarnessError::InvalidInput(format!(
                "K = {} must satisfy 2 <= K <= n = {}",
                self.k, self.n
            )));
        }
        if !(0.0..=1.0).contains(&self.pure_fraction) {
            return Err(HarnessError::InvalidInput(format!(
                "pure fraction {} outside [0, 1]",
                self.pure_fraction
            )));
        }
        for &e in &self.epsilon_grid {
            if let Some(eps) = e {
                if !(eps > 0.0) || !eps.is_finite() {
                    return Err(HarnessError::InvalidInput(format!(
                        "epsilon {eps} must be positive and finite (use the non-private entry instead)"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Key-value pairs recorded in the CSV metadata header.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let eps: Vec<String> = self
            .epsilon_grid
            .iter()
            .map(|e| match e {
                Some(v) => format!("{v}"),
                None => "inf".into(),
            })
            .collect();
        vec![
            ("n".into(), self.n.to_string()),
            ("k".into(), self.k.to_string()),
            (
                "b_n_grid".into(),
                self.b_n_grid
                    .iter()
                    .map(|b| format!("{b}"))
                    .collect::<Vec<_>>()
                    .join(" "),
            ),
            ("epsilon_grid".into(), eps.join(" ")),
            ("beta_n".into(), format!("{}", self.beta_n)),
            (
                "theta_range".into(),
                format!("[{}, {}]", self.theta_lo, self.theta_hi),
            ),
            ("reps".into(), self.reps.to_string()),
            ("seed".into(), self.base_seed.to_string()),
            ("pure_fraction".into(), format!("{}", self.pure_fraction)),
            (
                "tuning".into(),
                format!("tau={} c={} gamma={}", self.tau, self.c, self.gamma),
            ),
            (
                "pi_generation".into(),
                "pure rows split evenly across communities, remainder uniform-Dirichlet".into(),
            ),
        ]
    }
}

/// One aggregated grid cell.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub b_n: f64,
    /// `None` is the non-private run.
    pub epsilon: Option<f64>,
    pub mean_loss: f64,
    pub std_loss: f64,
    /// Successful replications.
    pub reps: usize,
    /// Mean per-replication runtime in milliseconds (0 unless timing was
    /// requested).
    pub runtime_ms: f64,
    /// Warning events across replications (failures and estimator notes).
    pub warnings: usize,
}

struct RepOutcome {
    loss: Option<f64>,
    warnings: usize,
    runtime_ms: f64,
}

/// Run the sweep; one output row per grid cell, in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let root = RngStream::seed(spec.base_seed);

    let mut cells: Vec<(f64, Option<f64>)> = Vec::new();
    for &b_n in &spec.b_n_grid {
        for &eps in &spec.epsilon_grid {
            cells.push((b_n, eps));
        }
    }

    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|cell| (0..spec.reps).map(move |rep| (cell, rep)))
        .collect();

    let outcomes: Vec<RepOutcome> = jobs
        .par_iter()
        .map(|&(cell, rep)| run_replication(spec, &root, cells[cell], rep as u64))
        .collect();

    let mut rows = Vec::with_capacity(cells.len());
    for (cell_idx, &(b_n, eps)) in cells.iter().enumerate() {
        let mut losses = Vec::with_capacity(spec.reps);
        let mut warnings = 0usize;
        let mut runtime_total = 0.0;
        for rep in 0..spec.reps {
            let outcome = &outcomes[cell_idx * spec.reps + rep];
            warnings += outcome.warnings;
            if let Some(loss) = outcome.loss {
                losses.push(loss);
                runtime_total += outcome.runtime_ms;
            }
        }
        let reps_ok = losses.len();
        let mean = if reps_ok > 0 {
            losses.iter().sum::<f64>() / reps_ok as f64
        } else {
            f64::NAN
        };
        let std = if reps_ok > 1 {
            let var = losses.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>()
                / (reps_ok - 1) as f64;
            var.sqrt()
        } else {
            0.0
        };
        rows.push(SweepRow {
            b_n,
            epsilon: eps,
            mean_loss: mean,
            std_loss: std,
            reps: reps_ok,
            runtime_ms: if spec.timing && reps_ok > 0 {
                runtime_total / reps_ok as f64
            } else {
                0.0
            },
            warnings,
        });
    }
    Ok(rows)
}

fn run_replication(
    spec: &SweepSpec,
    root: &RngStream,
    (b_n, eps): (f64, Option<f64>),
    rep: u64,
) -> RepOutcome {
    let started = std::time::Instant::now();
    // model stream: shared across epsilon values at the same (b_n, rep)
    let model = root.split_by_content(&[0x6d6f, b_n.to_bits(), rep]);
    let mech = root.split_by_content(&[
        0x6d65,
        b_n.to_bits(),
        eps.map_or(u64::MAX, f64::to_bits),
        rep,
    ]);

    let result = simulate_once(spec, b_n, eps, &model, &mech);
    match result {
        Ok((loss, est_warnings)) => RepOutcome {
            loss: Some(loss),
            warnings: est_warnings,
            runtime_ms: started.elapsed().as_secs_f64() * 1e3,
        },
        Err(_) => RepOutcome {
            loss: None,
            warnings: 1,
            runtime_ms: 0.0,
        },
    }
}

fn simulate_once(
    spec: &SweepSpec,
    b_n: f64,
    eps: Option<f64>,
    model: &RngStream,
    mech: &RngStream,
) -> Result<(f64, usize)> {
    let mut theta_stream = model.split(0);
    let theta = gen_theta(spec.n, b_n, spec.theta_lo, spec.theta_hi, &mut theta_stream)?;
    let mut pi_stream = model.split(1);
    let pi = generate_pi(spec.n, spec.k, spec.pure_fraction, &mut pi_stream);
    let params = DcmmParams::new(theta, pi, make_planted_b(spec.k, spec.beta_n)?)?;
    let omega = build_omega(&params)?;
    let mut sample_stream = model.split(2);
    let graph = sample_from_omega(&omega, &mut sample_stream);

    let m = match eps {
        Some(e) => {
            let privacy = PrivacyParams::new(e)?;
            let mut flip_stream = mech.split(0);
            debias(&symmetric_edge_flip(&graph, privacy, &mut flip_stream))
        }
        None => DebiasedMatrix::from_adjacency(&graph),
    };

    let mut hunt_seed_stream = model.split(4);
    let cfg = EstimatorConfig {
        k: spec.k,
        tau: spec.tau,
        c: spec.c,
        gamma: spec.gamma,
        privacy: None, // privatization already applied above
        hunt: HuntConfig {
            seed: hunt_seed_stream.next_u64(),
            ..HuntConfig::default()
        },
    };
    let est = estimate_memberships(&m, &cfg)?;
    let loss = permutation_loss(&est.pi_hat, params.pi())?.loss;
    Ok((loss, est.warnings.len()))
}

/// Pure rows split evenly across communities, the rest uniform on the
/// simplex.
pub fn generate_pi(n: usize, k: usize, pure_fraction: f64, stream: &mut RngStream) -> Array2<f64> {
    let n_pure = ((n as f64 * pure_fraction).round() as usize).min(n);
    let mut pi = Array2::<f64>::zeros((n, k));
    for i in 0..n_pure {
        pi[[i, i % k]] = 1.0;
    }
    for i in n_pure..n {
        let mut total = 0.0;
        for j in 0..k {
            let w = -stream.uniform_oc().ln();
            pi[[i, j]] = w;
            total += w;
        }
        for j in 0..k {
            pi[[i, j]] /= total;
        }
    }
    pi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> SweepSpec {
        let mut spec = SweepSpec::new(120, 2, 7);
        spec.b_n_grid = vec![4.0];
        spec.epsilon_grid = vec![Some(6.0), None];
        spec.reps = 3;
        spec
    }

    #[test]
    fn sweep_is_reproducible() {
        let spec = tiny_spec();
        let a = run_sweep(&spec).unwrap();
        let b = run_sweep(&spec).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.mean_loss.to_bits(), y.mean_loss.to_bits());
            assert_eq!(x.std_loss.to_bits(), y.std_loss.to_bits());
            assert_eq!(x.reps, y.reps);
        }
    }

    #[test]
    fn grid_reorder_preserves_cell_results() {
        let mut spec = tiny_spec();
        spec.b_n_grid = vec![4.0, 5.0];
        let forward = run_sweep(&spec).unwrap();
        spec.b_n_grid = vec![5.0, 4.0];
        let backward = run_sweep(&spec).unwrap();
        // match rows by (b_n, epsilon) content
        for row in &forward {
            let twin = backward
                .iter()
                .find(|r| r.b_n == row.b_n && r.epsilon == row.epsilon)
                .unwrap();
            assert_eq!(row.mean_loss.to_bits(), twin.mean_loss.to_bits());
        }
    }

    #[test]
    fn pi_generation_rows_are_stochastic() {
        let mut stream = RngStream::seed(3);
        let pi = generate_pi(50, 3, 0.5, &mut stream);
        for i in 0..50 {
            let s: f64 = (0..3).map(|j| pi[[i, j]]).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        // first half pure
        for i in 0..25 {
            assert_eq!(pi.row(i).iter().filter(|&&x| x == 1.0).count(), 1);
        }
    }

    #[test]
    fn rejects_empty_grid() {
        let mut spec = tiny_spec();
        spec.b_n_grid.clear();
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn rejects_zero_epsilon_entry() {
        let mut spec = tiny_spec();
        spec.epsilon_grid = vec![Some(0.0)];
        assert!(run_sweep(&spec).is_err());
    }
}
