//! Simplex vertex hunting over ratio rows.
//!
//! Noisy ratio rows live near (not inside) a `(K-1)`-simplex whose vertices
//! correspond to pure nodes, so plain convex-hull extraction fails. The
//! search here is two-stage: sketch the cloud with seeded k-means, then score
//! candidate K-subsets by the total squared distance from every point to the
//! simplex the subset spans, keeping the minimizer.
//!
//! The candidate pool holds the cluster means plus each cluster's farthest
//! member from the global centroid. Means alone are biased inward (a Lloyd
//! center averages its whole cell), which would smooth away an exact vertex
//! even in noiseless data; the per-cluster extreme member keeps such points
//! available to the search.

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg::{invert, invert_flat, norm_1_flat};
use crate::rng::RngStream;

/// Weights below this magnitude count as zero in feasibility checks.
const WEIGHT_TOL: f64 = 1e-12;

/// Vertex-hunting configuration.
#[derive(Debug, Clone)]
pub struct HuntConfig {
    /// Sketch size; `None` chooses `max(K + 10, ceil(K ln n_points))`,
    /// capped at the point count.
    pub n_centers: Option<usize>,
    /// Cap on the number of candidate K-subsets scored exhaustively; beyond
    /// it, subsets are ranked by their minimum pairwise distance (wider
    /// spread first) and only the best survive.
    pub max_subsets: usize,
    /// k-means restarts (best total SSE wins).
    pub kmeans_restarts: usize,
    /// Lloyd iterations per restart.
    pub kmeans_iters: usize,
    /// Reject candidate vertex sets whose `[V | 1]` matrix has a 1-norm
    /// condition estimate above this.
    pub max_condition: f64,
    pub seed: u64,
}

impl Default for HuntConfig {
    fn default() -> Self {
        Self {
            n_centers: None,
            max_subsets: 20_000,
            kmeans_restarts: 5,
            kmeans_iters: 100,
            max_condition: 1e12,
            seed: 0,
        }
    }
}

/// K hunted vertices in `R^{K-1}` (one per row) plus the residual value of
/// the winning subset.
#[derive(Debug, Clone)]
pub struct SimplexVertices {
    v: Array2<f64>,
    fit: f64,
}

impl SimplexVertices {
    /// Rows are vertices; must be affinely independent.
    pub fn new(v: Array2<f64>, fit: f64) -> Result<Self> {
        if affine_system(&v.view()).is_none() {
            return Err(Error::DegenerateGeometry);
        }
        Ok(Self { v, fit })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.v
    }

    pub fn k(&self) -> usize {
        self.v.nrows()
    }

    pub fn fit(&self) -> f64 {
        self.fit
    }

    pub fn vertex(&self, j: usize) -> ArrayView1<'_, f64> {
        self.v.row(j)
    }
}

/// `[V | 1]` as a K-by-K system matrix, or `None` if (numerically) singular.
fn affine_system(v: &ArrayView2<'_, f64>) -> Option<Array2<f64>> {
    let k = v.nrows();
    debug_assert_eq!(v.ncols() + 1, k);
    let mut a = Array2::<f64>::zeros((k, k));
    for r in 0..k {
        for c in 0..(k - 1) {
            a[[r, c]] = v[[r, c]];
        }
        a[[r, k - 1]] = 1.0;
    }
    invert(&a).map(|_| a)
}

/// Hunt K approximate simplex vertices among the given points (rows).
pub fn sketched_vertex_search(
    points: &ArrayView2<'_, f64>,
    k: usize,
    cfg: &HuntConfig,
) -> Result<SimplexVertices> {
    let n_points = points.nrows();
    let dim = points.ncols();
    if !(2..=MAX_K).contains(&k) {
        return Err(Error::InvalidConfig(format!(
            "vertex hunting needs 2 <= K <= {MAX_K}, got {k}"
        )));
    }
    if dim != k - 1 {
        return Err(Error::ShapeMismatch {
            expected: format!("points in R^{}", k - 1),
            got: format!("R^{dim}"),
        });
    }
    if n_points < k {
        return Err(Error::DegenerateGeometry);
    }
    if let Some(c) = cfg.n_centers {
        if c < k {
            return Err(Error::InvalidConfig(format!(
                "n_centers = {c} is below K = {k}"
            )));
        }
    }

    if k == 2 {
        // one-dimensional: the hull is [min, max]
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n_points {
            lo = lo.min(points[[i, 0]]);
            hi = hi.max(points[[i, 0]]);
        }
        if !(hi > lo) {
            return Err(Error::DegenerateGeometry);
        }
        let mut v = Array2::<f64>::zeros((2, 1));
        v[[0, 0]] = lo;
        v[[1, 0]] = hi;
        return Ok(SimplexVertices { v, fit: 0.0 });
    }

    let n_centers = cfg
        .n_centers
        .unwrap_or_else(|| {
            let by_log = (k as f64 * (n_points.max(2) as f64).ln()).ceil() as usize;
            (k + 10).max(by_log)
        })
        .min(n_points);

    let centers = kmeans(points, n_centers, cfg);
    let candidates = candidate_pool(points, &centers);
    let n_cand = candidates.nrows();
    if n_cand < k {
        return Err(Error::DegenerateGeometry);
    }

    // candidate K-subsets, capped by the spread heuristic
    let subsets = select_subsets(&candidates, k, cfg.max_subsets);

    // flatten points once for the scoring loop
    let flat_points: Vec<f64> = points.iter().copied().collect();

    let mut best: Option<(f64, Vec<f64>, Array2<f64>)> = None;
    for subset in subsets {
        let v = gather_rows(&candidates, &subset);
        let scorer = match SubsetScorer::new(&v, cfg.max_condition) {
            Some(s) => s,
            None => continue,
        };
        let cutoff = best.as_ref().map(|(obj, _, _)| *obj).unwrap_or(f64::INFINITY);
        let mut objective = 0.0;
        let mut aborted = false;
        for p in flat_points.chunks_exact(dim) {
            objective += scorer.sq_distance(p);
            if objective > cutoff {
                aborted = true;
                break;
            }
        }
        if aborted {
            continue;
        }
        let key = canonical_key(&v);
        let better = match &best {
            None => true,
            Some((obj, best_key, _)) => {
                objective < *obj || (objective == *obj && key < *best_key)
            }
        };
        if better {
            best = Some((objective, key, v));
        }
    }

    match best {
        Some((fit, _, v)) => Ok(SimplexVertices { v, fit }),
        None => Err(Error::DegenerateGeometry),
    }
}

/// Per-subset scoring plan: the interior barycentric solve and every proper
/// face's equality-constrained system are factored once, so each point costs
/// one small matrix-vector product (plus face checks only off the hull).
struct SubsetScorer {
    k: usize,
    dim: usize,
    /// vertices, row-major k x dim
    v: Vec<f64>,
    /// inverse of [V' ; 1'], row-major k x k
    interior_inv: Vec<f64>,
    faces: Vec<FacePlan>,
}

struct FacePlan {
    support: Vec<usize>,
    /// inverse of the (s+1) x (s+1) equality-constrained system
    kkt_inv: Vec<f64>,
}

impl SubsetScorer {
    fn new(vertices: &Array2<f64>, max_condition: f64) -> Option<Self> {
        let k = vertices.nrows();
        let dim = k - 1;
        let v: Vec<f64> = vertices.iter().copied().collect();
        // system M: rows 0..dim are coordinates (M[c][j] = v[j][c]), last row ones
        let mut system = vec![0.0f64; k * k];
        for j in 0..k {
            for c in 0..dim {
                system[c * k + j] = v[j * dim + c];
            }
            system[dim * k + j] = 1.0;
        }
        let interior_inv = invert_flat(&system, k)?;
        if norm_1_flat(&system, k) * norm_1_flat(&interior_inv, k) > max_condition {
            return None;
        }
        let mut faces = Vec::new();
        for mask in 1u32..(1u32 << k) {
            let size = mask.count_ones() as usize;
            if size == k {
                continue;
            }
            let support: Vec<usize> = (0..k).filter(|&i| mask & (1 << i) != 0).collect();
            let s = support.len();
            let mut kkt = vec![0.0f64; (s + 1) * (s + 1)];
            for (ia, &a) in support.iter().enumerate() {
                for (ib, &b) in support.iter().enumerate() {
                    let mut dot = 0.0;
                    for c in 0..dim {
                        dot += v[a * dim + c] * v[b * dim + c];
                    }
                    kkt[ia * (s + 1) + ib] = 2.0 * dot;
                }
                kkt[ia * (s + 1) + s] = 1.0;
                kkt[s * (s + 1) + ia] = 1.0;
            }
            if let Some(kkt_inv) = invert_flat(&kkt, s + 1) {
                faces.push(FacePlan { support, kkt_inv });
            }
        }
        Some(Self {
            k,
            dim,
            v,
            interior_inv,
            faces,
        })
    }

    /// Squared distance from `p` to the simplex.
    fn sq_distance(&self, p: &[f64]) -> f64 {
        let k = self.k;
        let dim = self.dim;
        // interior test: w = interior_inv . [p; 1]
        let mut feasible = true;
        for row in 0..k {
            let mut w = self.interior_inv[row * k + dim];
            for c in 0..dim {
                w += self.interior_inv[row * k + c] * p[c];
            }
            if w < -WEIGHT_TOL {
                feasible = false;
                break;
            }
        }
        if feasible {
            // affinely independent vertices span the space: projection exact
            return 0.0;
        }

        // v_a . p for every vertex, shared across faces
        let mut vp = [0.0f64; MAX_K];
        for a in 0..k {
            let mut acc = 0.0;
            for c in 0..dim {
                acc += self.v[a * dim + c] * p[c];
            }
            vp[a] = acc;
        }

        let mut best = f64::INFINITY;
        let mut sol = [0.0f64; MAX_K + 1];
        for face in &self.faces {
            let s = face.support.len();
            let mut ok = true;
            for (row, item) in sol.iter_mut().enumerate().take(s + 1) {
                let mut acc = face.kkt_inv[row * (s + 1) + s]; // rhs[s] = 1
                for (ia, &a) in face.support.iter().enumerate() {
                    acc += face.kkt_inv[row * (s + 1) + ia] * 2.0 * vp[a];
                }
                *item = acc;
            }
            for &w in sol.iter().take(s) {
                if w < -WEIGHT_TOL {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let mut resid = 0.0;
            for c in 0..dim {
                let mut coord = 0.0;
                for (ia, &a) in face.support.iter().enumerate() {
                    coord += sol[ia].max(0.0) * self.v[a * dim + c];
                }
                let diff = coord - p[c];
                resid += diff * diff;
            }
            best = best.min(resid);
        }
        best
    }
}

/// Hard cap on K inside the hunting module; the face enumeration is
/// exponential in K.
const MAX_K: usize = 16;

/// Euclidean distance from a point to the simplex spanned by the vertices.
///
/// Solved exactly: the affine (full-support) barycentric solve handles the
/// interior case, and otherwise every proper face is checked through its
/// equality-constrained least-squares system. Faces whose optimum violates
/// nonnegativity are discarded; the best feasible face is the projection.
pub fn distance_to_simplex(point: &ArrayView1<'_, f64>, vertices: &SimplexVertices) -> f64 {
    let scorer = SubsetScorer::new(&vertices.v, f64::INFINITY)
        .expect("SimplexVertices guarantees affine independence");
    let p: Vec<f64> = point.iter().copied().collect();
    scorer.sq_distance(&p).sqrt()
}

/// Cluster means plus each cluster's farthest member from the global
/// centroid, deduplicated.
fn candidate_pool(points: &ArrayView2<'_, f64>, centers: &Array2<f64>) -> Array2<f64> {
    let n = points.nrows();
    let dim = points.ncols();
    let n_centers = centers.nrows();
    let centroid = points.sum_axis(ndarray::Axis(0)) / n as f64;

    let mut extreme: Vec<Option<(usize, f64)>> = vec![None; n_centers];
    for i in 0..n {
        let row = points.row(i);
        let c = nearest_center(&row, centers);
        let d = sq_dist(&row, &centroid.view());
        match extreme[c] {
            Some((_, best)) if best >= d => {}
            _ => extreme[c] = Some((i, d)),
        }
    }

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(2 * n_centers);
    for c in 0..n_centers {
        rows.push(centers.row(c).to_vec());
        if let Some((i, _)) = extreme[c] {
            rows.push(points.row(i).to_vec());
        }
    }
    rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
    rows.dedup_by(|a, b| a == b);

    let mut out = Array2::<f64>::zeros((rows.len(), dim));
    for (r, row) in rows.iter().enumerate() {
        for c in 0..dim {
            out[[r, c]] = row[c];
        }
    }
    out
}

fn gather_rows(m: &Array2<f64>, idx: &[usize]) -> Array2<f64> {
    let mut out = Array2::<f64>::zeros((idx.len(), m.ncols()));
    for (r, &i) in idx.iter().enumerate() {
        out.row_mut(r).assign(&m.row(i));
    }
    out
}

fn canonical_key(v: &Array2<f64>) -> Vec<f64> {
    let mut rows: Vec<Vec<f64>> = v.rows().into_iter().map(|r| r.to_vec()).collect();
    rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
    rows.into_iter().flatten().collect()
}

/// All K-subsets if they fit the cap, otherwise the `cap` subsets with the
/// widest minimum pairwise separation. Memory stays bounded by the cap even
/// when the combination count is huge.
fn select_subsets(candidates: &Array2<f64>, k: usize, cap: usize) -> Vec<Vec<usize>> {
    let n = candidates.nrows();
    let total = binomial(n, k);
    let cap = cap.max(1);

    // pairwise distance table, looked up once per pair per subset
    let mut dist2 = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = sq_dist(&candidates.row(i), &candidates.row(j));
            dist2[i * n + j] = d;
            dist2[j * n + i] = d;
        }
    }
    let spread_of = |subset: &[usize]| -> f64 {
        let mut best = f64::INFINITY;
        for (a, &i) in subset.iter().enumerate() {
            for &j in &subset[(a + 1)..] {
                best = best.min(dist2[i * n + j]);
            }
        }
        best
    };

    let mut kept: Vec<(f64, Vec<usize>)> =
        Vec::with_capacity(cap.min(total).saturating_mul(2).min(1 << 22));
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        kept.push((spread_of(&subset), subset.clone()));
        if total > cap && kept.len() >= 2 * cap {
            // shed the narrow half; ordering is finalized below
            kept.select_nth_unstable_by(cap - 1, |a, b| {
                b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1))
            });
            kept.truncate(cap);
        }
        if !next_combination(&mut subset, n, k) {
            break;
        }
    }
    if total > cap {
        kept.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        kept.truncate(cap);
    }
    kept.into_iter().map(|(_, s)| s).collect()
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

fn next_combination(subset: &mut [usize], n: usize, k: usize) -> bool {
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] != i + n - k {
            subset[i] += 1;
            for j in (i + 1)..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn sq_dist(a: &ArrayView1<'_, f64>, b: &ArrayView1<'_, f64>) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

fn nearest_center(p: &ArrayView1<'_, f64>, centers: &Array2<f64>) -> usize {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for c in 0..centers.nrows() {
        let d = sq_dist(p, &centers.row(c));
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

/// Seeded k-means with ++-style init and fixed restarts; best SSE wins.
fn kmeans(points: &ArrayView2<'_, f64>, n_centers: usize, cfg: &HuntConfig) -> Array2<f64> {
    let n = points.nrows();
    let dim = points.ncols();
    if n_centers >= n {
        return points.to_owned();
    }
    let root = RngStream::seed(cfg.seed);
    let mut best: Option<(f64, Array2<f64>)> = None;
    for restart in 0..cfg.kmeans_restarts.max(1) {
        let mut stream = root.split(restart as u64);
        let mut centers = plus_plus_init(points, n_centers, &mut stream);
        let mut assign = vec![0usize; n];
        for _ in 0..cfg.kmeans_iters.max(1) {
            // assignment
            for i in 0..n {
                assign[i] = nearest_center(&points.row(i), &centers);
            }
            // update
            let mut next = Array2::<f64>::zeros((n_centers, dim));
            let mut count = vec![0usize; n_centers];
            for i in 0..n {
                count[assign[i]] += 1;
                let mut row = next.row_mut(assign[i]);
                row += &points.row(i);
            }
            for c in 0..n_centers {
                if count[c] > 0 {
                    let mut row = next.row_mut(c);
                    row /= count[c] as f64;
                } else {
                    // relocate an empty center to the worst-served point
                    let mut worst = 0usize;
                    let mut worst_d = -1.0;
                    for i in 0..n {
                        let d = sq_dist(&points.row(i), &centers.row(assign[i]));
                        if d > worst_d {
                            worst_d = d;
                            worst = i;
                        }
                    }
                    next.row_mut(c).assign(&points.row(worst));
                }
            }
            if next == centers {
                break;
            }
            centers = next;
        }
        let mut sse = 0.0;
        for i in 0..n {
            sse += sq_dist(&points.row(i), &centers.row(nearest_center(&points.row(i), &centers)));
        }
        match &best {
            Some((best_sse, _)) if *best_sse <= sse => {}
            _ => best = Some((sse, centers)),
        }
    }
    best.unwrap().1
}

fn plus_plus_init(
    points: &ArrayView2<'_, f64>,
    n_centers: usize,
    stream: &mut RngStream,
) -> Array2<f64> {
    let n = points.nrows();
    let dim = points.ncols();
    let mut centers = Array2::<f64>::zeros((n_centers, dim));
    let first = ((stream.uniform_oc() * n as f64).ceil() as usize - 1).min(n - 1);
    centers.row_mut(0).assign(&points.row(first));
    let mut d2: Vec<f64> = (0..n)
        .map(|i| sq_dist(&points.row(i), &centers.row(0)))
        .collect();
    for c in 1..n_centers {
        let total: f64 = d2.iter().sum();
        let chosen = if total <= 0.0 {
            // all mass on existing centers; spread deterministically
            ((stream.uniform_oc() * n as f64).ceil() as usize - 1).min(n - 1)
        } else {
            let target = stream.uniform_oc() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc >= target {
                    pick = i;
                    break;
                }
            }
            pick
        };
        centers.row_mut(c).assign(&points.row(chosen));
        for i in 0..n {
            d2[i] = d2[i].min(sq_dist(&points.row(i), &centers.row(c)));
        }
    }
    centers
}
