//! Small dense and tridiagonal linear algebra used by the chain and spectral
//! modules.

use crate::error::{Error, Result};

/// Solves `A x = b` for a row-major `n x n` matrix by Gaussian elimination
/// with partial pivoting.
pub fn solve(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    if a.len() != n * n {
        return Err(Error::BadShape(format!(
            "system matrix has {} entries, expected {}",
            a.len(),
            n * n
        )));
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap_or(col);
        if a[pivot * n + col].abs() < 1e-300 {
            return Err(Error::Numerical(format!("singular system at column {col}")));
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            a[row * n + col] = 0.0;
            for j in col + 1..n {
                a[row * n + j] -= factor * a[col * n + j];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for j in row + 1..n {
            acc -= a[row * n + j] * x[j];
        }
        x[row] = acc / a[row * n + row];
    }
    Ok(x)
}

/// Number of eigenvalues strictly below `x` of the symmetric tridiagonal
/// matrix with diagonal `diag` and off-diagonal `off` (Sturm sequence count
/// from the LDLᵀ pivots).
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        q = (diag[i] - x) - off[i - 1] * off[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues of a symmetric tridiagonal matrix, ascending, by bisection
/// on Sturm counts. Each eigenvalue is bracketed until the interval is at the
/// resolution of the floating-point grid (well below `1e-12`).
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert_eq!(
        off.len() + 1,
        n.max(1),
        "off-diagonal must have n-1 entries"
    );
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![diag[0]];
    }

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut max_off_sq: f64 = 0.0;
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
        if i + 1 < n {
            max_off_sq = max_off_sq.max(off[i] * off[i]);
        }
    }
    let spread = (hi - lo).max(1.0);
    lo -= 2.0 * f64::EPSILON * spread;
    hi += 2.0 * f64::EPSILON * spread;
    let pivmin = f64::MIN_POSITIVE * max_off_sq.max(1.0) * 1e10;

    (0..n)
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..256 {
                let width_tol = 2.0 * f64::EPSILON * a.abs().max(b.abs()) + 1e-300;
                if b - a <= width_tol {
                    break;
                }
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if sturm_count(diag, off, mid, pivmin) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Householder reduction of a symmetric row-major `n x n` matrix to
/// tridiagonal form. Returns `(diagonal, off_diagonal)`; eigenvalues are
/// preserved.
pub fn householder_tridiagonalize(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n);
    let idx = |i: usize, j: usize| i * n + j;
    for k in 0..n.saturating_sub(2) {
        let norm = (k + 1..n).map(|i| a[idx(i, k)].powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[idx(k + 1, k)];
        let alpha = if x0 > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k + 1..n).map(|i| a[idx(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= vnorm);

        // Trailing block update A <- H A H with H = I - 2 v vᵀ.
        let m = n - k - 1;
        let p: Vec<f64> = (0..m)
            .map(|i| (0..m).map(|j| a[idx(k + 1 + i, k + 1 + j)] * v[j]).sum())
            .collect();
        let vp: f64 = v.iter().zip(&p).map(|(x, y)| x * y).sum();
        for i in 0..m {
            for j in 0..m {
                a[idx(k + 1 + i, k + 1 + j)] +=
                    -2.0 * v[i] * p[j] - 2.0 * p[i] * v[j] + 4.0 * vp * v[i] * v[j];
            }
        }
        a[idx(k + 1, k)] = alpha;
        a[idx(k, k + 1)] = alpha;
        for i in k + 2..n {
            a[idx(i, k)] = 0.0;
            a[idx(k, i)] = 0.0;
        }
    }
    let diag = (0..n).map(|i| a[idx(i, i)]).collect();
    let off = (0..n.saturating_sub(1)).map(|i| a[idx(i + 1, i)]).collect();
    (diag, off)
}

/// Eigenvalues of a symmetric row-major matrix, ascending.
pub fn symmetric_eigenvalues(a: Vec<f64>, n: usize) -> Vec<f64> {
    let (diag, off) = householder_tridiagonalize(a, n);
    tridiagonal_eigenvalues(&diag, &off)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_pivots() {
        // Zero leading pivot forces a row swap.
        let a = vec![0.0, 2.0, 1.0, 1.0];
        let x = solve(a, vec![4.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15);
        assert!((x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn solve_singular() {
        assert!(solve(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn path_laplacian_spectrum() {
        // Tridiagonal (-1, 2, -1) of size n has eigenvalues 2 - 2 cos(k pi/(n+1)).
        let n = 9;
        let ev = tridiagonal_eigenvalues(&vec![2.0; n], &vec![-1.0; n - 1]);
        for (k, x) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((x - exact).abs() < 1e-14, "{k}: {x} vs {exact}");
        }
    }

    #[test]
    fn zero_off_diagonal_splits() {
        let ev = tridiagonal_eigenvalues(&[3.0, 1.0, 2.0], &[0.0, 0.0]);
        assert_eq!(ev.len(), 3);
        for (x, e) in ev.iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - e).abs() < 1e-15);
        }
    }

    #[test]
    fn householder_preserves_trace_and_frobenius() {
        let a = vec![
            4.0, 1.0, -2.0, 2.0, 1.0, 2.0, 0.0, 1.0, -2.0, 0.0, 3.0, -2.0, 2.0, 1.0, -2.0, -1.0,
        ];
        let (d, e) = householder_tridiagonalize(a.clone(), 4);
        let trace: f64 = d.iter().sum();
        assert!((trace - 8.0).abs() < 1e-13);
        let fro: f64 = a.iter().map(|x| x * x).sum();
        let fro_t: f64 =
            d.iter().map(|x| x * x).sum::<f64>() + 2.0 * e.iter().map(|x| x * x).sum::<f64>();
        assert!((fro - fro_t).abs() < 1e-12);
    }
}
