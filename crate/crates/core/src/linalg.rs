//! Small dense linear algebra helpers: cyclic Jacobi eigendecomposition and
//! Gaussian elimination for the K-by-K systems used throughout the pipeline.

use ndarray::{Array1, Array2};

/// Full eigendecomposition of a small symmetric matrix by cyclic Jacobi
/// rotations. Returns eigenvalues sorted in decreasing order with matching
/// orthonormal eigenvector columns.
pub fn jacobi_eigen(a: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut m = a.clone();
    let mut v = Array2::<f64>::eye(n);
    if n <= 1 {
        return (m.diag().to_owned(), v);
    }
    let scale: f64 = a.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
    let tol = 1e-15 * scale;
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m[[p, q]].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..n {
                    let mip = m[[i, p]];
                    let miq = m[[i, q]];
                    m[[i, p]] = c * mip - s * miq;
                    m[[i, q]] = s * mip + c * miq;
                }
                for j in 0..n {
                    let mpj = m[[p, j]];
                    let mqj = m[[q, j]];
                    m[[p, j]] = c * mpj - s * mqj;
                    m[[q, j]] = s * mpj + c * mqj;
                }
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = c * vip - s * viq;
                    v[[i, q]] = s * vip + c * viq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].partial_cmp(&m[[i, i]]).unwrap());
    let vals = Array1::from_iter(order.iter().map(|&i| m[[i, i]]));
    let mut vecs = Array2::<f64>::zeros((n, n));
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            vecs[[i, new_j]] = v[[i, old_j]];
        }
    }
    (vals, vecs)
}

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot degenerates.
pub fn solve_linear(a: &Array2<f64>, b: &Array1<f64>) -> Option<Array1<f64>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    debug_assert_eq!(n, b.len());
    let mut m = a.clone();
    let mut rhs = b.clone();
    let scale: f64 = a.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if m[[row, col]].abs() > m[[pivot, col]].abs() {
                pivot = row;
            }
        }
        if m[[pivot, col]].abs() <= 1e-14 * scale {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                m.swap([col, j], [pivot, j]);
            }
            rhs.swap(col, pivot);
        }
        for row in (col + 1)..n {
            let f = m[[row, col]] / m[[col, col]];
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                m[[row, j]] -= f * m[[col, j]];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = Array1::<f64>::zeros(n);
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for j in (row + 1)..n {
            acc -= m[[row, j]] * x[j];
        }
        x[row] = acc / m[[row, row]];
    }
    Some(x)
}

/// Invert a small matrix by Gauss-Jordan elimination with partial pivoting.
pub fn invert(a: &Array2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut inv = Array2::<f64>::eye(n);
    let scale: f64 = a.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if m[[row, col]].abs() > m[[pivot, col]].abs() {
                pivot = row;
            }
        }
        if m[[pivot, col]].abs() <= 1e-14 * scale {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                m.swap([col, j], [pivot, j]);
                inv.swap([col, j], [pivot, j]);
            }
        }
        let d = m[[col, col]];
        for j in 0..n {
            m[[col, j]] /= d;
            inv[[col, j]] /= d;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[[row, col]];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                m[[row, j]] -= f * m[[col, j]];
                inv[[row, j]] -= f * inv[[col, j]];
            }
        }
    }
    Some(inv)
}

/// Max-column-sum norm, used for cheap condition estimates.
pub fn norm_1(a: &Array2<f64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        let s: f64 = a.column(j).iter().map(|x| x.abs()).sum();
        best = best.max(s);
    }
    best
}

/// Gauss-Jordan inverse on a flat row-major buffer; allocation-light for hot
/// loops. Returns `None` on a degenerate pivot.
pub fn invert_flat(a: &[f64], n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut inv = vec![0.0f64; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if m[row * n + col].abs() > m[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if m[pivot * n + col].abs() <= 1e-14 * scale {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                m.swap(col * n + j, pivot * n + j);
                inv.swap(col * n + j, pivot * n + j);
            }
        }
        let d = m[col * n + col];
        for j in 0..n {
            m[col * n + j] /= d;
            inv[col * n + j] /= d;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[row * n + col];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                m[row * n + j] -= f * m[col * n + j];
                inv[row * n + j] -= f * inv[col * n + j];
            }
        }
    }
    Some(inv)
}

/// Max-column-sum norm of a flat row-major matrix.
pub fn norm_1_flat(a: &[f64], n: usize) -> f64 {
    let mut best = 0.0f64;
    for j in 0..n {
        let mut s = 0.0;
        for i in 0..n {
            s += a[i * n + j].abs();
        }
        best = best.max(s);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn jacobi_diagonal_matrix() {
        let a = array![[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -2.0]];
        let (vals, _) = jacobi_eigen(&a);
        assert_abs_diff_eq!(vals[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[2], -2.0, epsilon = 1e-12);
    }

    #[test]
    fn jacobi_reconstructs_matrix() {
        let a = array![
            [4.0, 1.0, 0.5, -0.2],
            [1.0, 3.0, 1.0, 0.3],
            [0.5, 1.0, 2.0, -1.0],
            [-0.2, 0.3, -1.0, 1.5]
        ];
        let (vals, vecs) = jacobi_eigen(&a);
        let lam = Array2::from_diag(&vals);
        let recon = vecs.dot(&lam).dot(&vecs.t());
        for (x, y) in a.iter().zip(recon.iter()) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-10);
        }
        // orthonormality
        let vtv = vecs.t().dot(&vecs);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(vtv[[i, j]], want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn solve_and_invert_agree() {
        let a = array![[2.0, 1.0, -1.0], [-3.0, -1.0, 2.0], [-2.0, 1.0, 2.0]];
        let b = array![8.0, -11.0, -3.0];
        let x = solve_linear(&a, &b).unwrap();
        assert_abs_diff_eq!(x[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[2], -1.0, epsilon = 1e-12);
        let inv = invert(&a).unwrap();
        let xi = inv.dot(&b);
        for (u, v) in x.iter().zip(xi.iter()) {
            assert_abs_diff_eq!(*u, *v, epsilon = 1e-12);
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = array![[1.0, 2.0], [2.0, 4.0]];
        assert!(solve_linear(&a, &array![1.0, 2.0]).is_none());
        assert!(invert(&a).is_none());
    }
}
