//! Small dense linear-algebra kernels: symmetric tridiagonal eigensolve
//! (for quadrature nodes), cyclic Jacobi eigendecomposition (for covariance
//! square roots), and an underdetermined linear solver with a null vector
//! (for the moment-matched pair factory). Dimensions are tiny throughout,
//! so simplicity beats sophistication.

use crate::error::{Error, Result};
use crate::Scalar;

/// Eigenvalues of a symmetric tridiagonal matrix together with the first
/// component of each (normalized) eigenvector.
///
/// `diag` has length n, `offdiag` length n-1. Implicit-shift QL iteration.
/// Returns (eigenvalues ascending, first components), or a non-convergence
/// error.
pub fn tridiag_eigen_first_components<S: Scalar>(
    diag: &[S],
    offdiag: &[S],
) -> Result<(Vec<S>, Vec<S>)> {
    let n = diag.len();
    assert_eq!(offdiag.len() + 1, n);
    let mut d = diag.to_vec();
    let mut e: Vec<S> = offdiag.to_vec();
    e.push(S::zero());
    // z starts as e1; we only track the first row of the accumulated
    // rotation matrix, which is all that quadrature weights need.
    let mut z = vec![S::zero(); n];
    z[0] = S::one();

    for l in 0..n {
        let mut iter = 0;
        loop {
            // Find a small off-diagonal element to split at.
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= S::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::NonConvergence(
                    "tridiagonal QL exceeded 50 iterations".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (S::two() * e[l]);
            let mut r = g.hypot(S::one());
            let sign_r = if g >= S::zero() { r } else { -r };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let mut s = S::one();
            let mut c = S::one();
            let mut p = S::zero();
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == S::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = S::zero();
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + S::two() * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if r == S::zero() && m > l {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = S::zero();
        }
    }

    // Sort ascending by eigenvalue.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap());
    let vals = order.iter().map(|&i| d[i]).collect();
    let firsts = order.iter().map(|&i| z[i]).collect();
    Ok((vals, firsts))
}

/// Row-major square matrix helpers.
pub fn mat_mul<S: Scalar>(a: &[S], b: &[S], n: usize) -> Vec<S> {
    let mut c = vec![S::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == S::zero() {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

/// Cyclic Jacobi eigendecomposition of a symmetric n×n matrix (row-major).
/// Returns (eigenvalues, eigenvectors as columns of a row-major matrix).
pub fn jacobi_eigen<S: Scalar>(a: &[S], n: usize) -> Result<(Vec<S>, Vec<S>)> {
    let mut m = a.to_vec();
    let mut v = vec![S::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = S::one();
    }
    for _sweep in 0..100 {
        let mut off = S::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off.sqrt() <= S::epsilon() * S::from_usize_c(n * n) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= S::min_positive_value() {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let tau = (aqq - app) / (S::two() * apq);
                let t = if tau >= S::zero() {
                    S::one() / (tau + (S::one() + tau * tau).sqrt())
                } else {
                    -S::one() / (-tau + (S::one() + tau * tau).sqrt())
                };
                let c = S::one() / (S::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| m[i * n + i]).collect();
    Ok((vals, v))
}

/// Symmetric PSD square root via Jacobi eigendecomposition, flooring
/// eigenvalues at zero (discrete covariances can be rank-deficient).
pub fn sym_sqrt<S: Scalar>(a: &[S], n: usize) -> Result<Vec<S>> {
    let (vals, vecs) = jacobi_eigen(a, n)?;
    let mut out = vec![S::zero(); n * n];
    for k in 0..n {
        let lk = vals[k].max(S::zero()).sqrt();
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] += lk * vecs[i * n + k] * vecs[j * n + k];
            }
        }
    }
    Ok(out)
}

/// Solve A w = b for an underdetermined system with rank deficiency exactly
/// one (rows = unknowns - 1 after elimination). Returns a particular
/// solution and a null-space vector.
///
/// A is rows x cols row-major with cols = rows + 1 expected.
pub fn solve_with_null_vector<S: Scalar>(
    a: &[S],
    b: &[S],
    rows: usize,
    cols: usize,
) -> Result<(Vec<S>, Vec<S>)> {
    assert_eq!(a.len(), rows * cols);
    assert_eq!(b.len(), rows);
    let mut m: Vec<S> = Vec::with_capacity(rows * (cols + 1));
    for r in 0..rows {
        m.extend_from_slice(&a[r * cols..(r + 1) * cols]);
        m.push(b[r]);
    }
    let w = cols + 1; // augmented width
    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        // Partial pivoting.
        let (best, best_val) = (row..rows)
            .map(|r| (r, m[r * w + col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap_or((row, S::zero()));
        if best_val <= S::from_f64c(1e-12) {
            continue; // free column
        }
        for k in 0..w {
            m.swap(best * w + k, row * w + k);
        }
        let piv = m[row * w + col];
        for k in col..w {
            m[row * w + k] = m[row * w + k] / piv;
        }
        for r in 0..rows {
            if r == row {
                continue;
            }
            let f = m[r * w + col];
            if f == S::zero() {
                continue;
            }
            for k in col..w {
                let sub = f * m[row * w + k];
                m[r * w + k] = m[r * w + k] - sub;
            }
        }
        pivot_cols.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }
    if row < rows {
        // Check consistency of the remaining rows.
        for r in row..rows {
            if m[r * w + cols].abs() > S::from_f64c(1e-9) {
                return Err(Error::Numerical("inconsistent linear system".into()));
            }
        }
    }
    let free_cols: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
    if free_cols.len() != 1 {
        return Err(Error::Numerical(format!(
            "expected null-space dimension 1, found {}",
            free_cols.len()
        )));
    }
    let free = free_cols[0];

    let mut particular = vec![S::zero(); cols];
    let mut null = vec![S::zero(); cols];
    null[free] = S::one();
    for (r, &pc) in pivot_cols.iter().enumerate() {
        particular[pc] = m[r * w + cols];
        null[pc] = -m[r * w + free];
    }
    Ok((particular, null))
}
