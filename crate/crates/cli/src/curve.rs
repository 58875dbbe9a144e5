//! Distance between private and non-private estimates on a fixed graph, as a
//! function of the privacy budget.

use privmix_core::estimator::{estimate_memberships, EstimatorConfig};
use privmix_core::evaluation::permutation_loss;
use privmix_core::privacy::{debias, symmetric_edge_flip, DebiasedMatrix, PrivacyParams};
use privmix_core::rng::RngStream;

use crate::edgelist::EdgeListGraph;
use crate::Result;

/// One grid point of the curve.
#[derive(Debug, Clone)]
pub struct CurvePoint {
    pub epsilon: f64,
    /// Loss between the private and the non-private estimate; `None` when
    /// this budget's run failed (see `error`).
    pub loss: Option<f64>,
    pub error: Option<String>,
}

/// Estimate once without privacy, then once per budget, and report the
/// permutation loss between each private estimate and the non-private one.
pub fn private_vs_nonprivate_curve(
    graph: &EdgeListGraph,
    k: usize,
    epsilon_grid: &[f64],
    cfg: &EstimatorConfig,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    let root = RngStream::seed(seed);
    let baseline_input = DebiasedMatrix::from_adjacency(graph.adjacency());
    let mut base_cfg = cfg.clone();
    base_cfg.k = k;
    base_cfg.privacy = None;
    let baseline = estimate_memberships(&baseline_input, &base_cfg)?;

    let mut points = Vec::with_capacity(epsilon_grid.len());
    for &eps in epsilon_grid {
        let outcome = (|| -> Result<f64> {
            let privacy = PrivacyParams::new(eps)?;
            let mut stream = root.split_by_content(&[eps.to_bits()]);
            let m = debias(&symmetric_edge_flip(graph.adjacency(), privacy, &mut stream));
            let est = estimate_memberships(&m, &base_cfg)?;
            Ok(permutation_loss(&est.pi_hat, &baseline.pi_hat)?.loss)
        })();
        match outcome {
            Ok(loss) => points.push(CurvePoint {
                epsilon: eps,
                loss: Some(loss),
                error: None,
            }),
            Err(e) => points.push(CurvePoint {
                epsilon: eps,
                loss: None,
                error: Some(e.to_string()),
            }),
        }
    }
    Ok(points)
}
