//! Thin SVD by Householder QR followed by one-sided (Hestenes) Jacobi on the
//! triangular factor.
//!
//! Tall inputs are reduced to an `n x n` upper-triangular `R` first, so the
//! Jacobi sweeps never touch the long dimension. That keeps the cost at
//! roughly `4·m·n²` for an `m x n` input, which matters for event matrices
//! with a hundred thousand rows. Wide inputs are handled through the
//! transpose.

use crate::linalg::DenseMatrix;
use crate::sum::{axpy, dot};
use crate::{Error, Result};

/// Singular values below this fraction of the largest are set to zero.
pub const SVD_TRUNCATION: f64 = 1e-12;

const MAX_SWEEPS: usize = 80;

/// `A = U · diag(singular_values) · Vᵀ`, thin form with `q = min(m, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    /// `m x q` left singular vectors.
    pub u: DenseMatrix,
    /// Non-increasing, non-negative, length `q`.
    pub singular_values: Vec<f64>,
    /// `p x q` right singular vectors.
    pub v: DenseMatrix,
}

impl SvdResult {
    /// Number of non-zero singular values.
    pub fn rank(&self) -> usize {
        self.singular_values.iter().filter(|&&s| s > 0.0).count()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let (m, q) = self.u.shape();
        let p = self.v.rows();
        let mut out = DenseMatrix::zeros(m, p);
        for i in 0..m {
            let u_row = self.u.row(i);
            let out_row = out.row_mut(i);
            for (j, o) in out_row.iter_mut().enumerate() {
                let v_row = self.v.row(j);
                *o = (0..q)
                    .map(|t| u_row[t] * self.singular_values[t] * v_row[t])
                    .sum();
            }
        }
        out
    }
}

/// Thin singular value decomposition.
///
/// Each column of `U` is sign-normalized so its largest-magnitude entry is
/// non-negative (first such entry on ties), with the matching `V` column
/// flipped alongside. Columns belonging to truncated singular values are
/// completed to an orthonormal set.
pub fn svd(a: &DenseMatrix) -> Result<SvdResult> {
    if a.is_empty() {
        return Err(Error::invalid("cannot decompose an empty matrix"));
    }
    if a.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let (m, n) = a.shape();

    // Column-major buffers throughout; row-major A is column-major Aᵀ.
    let (mut u, sigma, mut v, rows_u, rows_v) = if m >= n {
        let (u, s, v) = tall_svd(m, n, to_column_major(a))?;
        (u, s, v, m, n)
    } else {
        let (u, s, v) = tall_svd(n, m, a.as_slice().to_vec())?;
        (v, s, u, m, n)
    };
    let q = sigma.len();

    for j in 0..q {
        let col = &u[j * rows_u..(j + 1) * rows_u];
        let mut best = 0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            u[j * rows_u..(j + 1) * rows_u]
                .iter_mut()
                .for_each(|x| *x = -*x);
            v[j * rows_v..(j + 1) * rows_v]
                .iter_mut()
                .for_each(|x| *x = -*x);
        }
    }

    Ok(SvdResult {
        u: from_column_major(rows_u, q, &u),
        singular_values: sigma,
        v: from_column_major(rows_v, q, &v),
    })
}

fn to_column_major(a: &DenseMatrix) -> Vec<f64> {
    let (m, n) = a.shape();
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for (j, &x) in a.row(i).iter().enumerate() {
            out[j * m + i] = x;
        }
    }
    out
}

fn from_column_major(rows: usize, cols: usize, data: &[f64]) -> DenseMatrix {
    let mut values = vec![0.0; rows * cols];
    for j in 0..cols {
        for i in 0..rows {
            values[i * cols + j] = data[j * rows + i];
        }
    }
    DenseMatrix::from_raw(rows, cols, values)
}

/// SVD of a column-major `m x n` matrix with `m >= n`. Returns column-major
/// `U` (`m x n`), the singular values and column-major `V` (`n x n`).
fn tall_svd(m: usize, n: usize, mut a: Vec<f64>) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    debug_assert!(m >= n);

    // Householder QR. Reflector k keeps its vector in a[k*m + k .. (k+1)*m].
    let mut tau = vec![0.0; n];
    let mut r_diag = vec![0.0; n];
    for k in 0..n {
        let (head, tail) = a.split_at_mut((k + 1) * m);
        let x = &mut head[k * m + k..];
        let norm = dot(x, x).sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if x[0] > 0.0 { -norm } else { norm };
        x[0] -= alpha;
        let t = 2.0 / dot(x, x);
        for col in tail.chunks_exact_mut(m) {
            let seg = &mut col[k..];
            let s = t * dot(x, seg);
            axpy(-s, x, seg);
        }
        tau[k] = t;
        r_diag[k] = alpha;
    }

    let mut w = vec![0.0; n * n];
    for j in 0..n {
        w[j * n..j * n + j].copy_from_slice(&a[j * m..j * m + j]);
        w[j * n + j] = r_diag[j];
    }
    let mut v = vec![0.0; n * n];
    for j in 0..n {
        v[j * n + j] = 1.0;
    }
    jacobi_sweeps(n, &mut w, &mut v)?;

    let norms: Vec<f64> = w.chunks_exact(n).map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));
    let cutoff = SVD_TRUNCATION * norms[order[0]];

    let mut sigma = vec![0.0; n];
    let mut u_small = vec![0.0; n * n];
    let mut v_sorted = vec![0.0; n * n];
    let mut filled = vec![false; n];
    for (t, &j) in order.iter().enumerate() {
        v_sorted[t * n..(t + 1) * n].copy_from_slice(&v[j * n..(j + 1) * n]);
        let s = norms[j];
        if s > 0.0 && s > cutoff {
            sigma[t] = s;
            for (dst, src) in u_small[t * n..(t + 1) * n]
                .iter_mut()
                .zip(&w[j * n..(j + 1) * n])
            {
                *dst = src / s;
            }
            filled[t] = true;
        }
    }
    complete_orthonormal(n, &mut u_small, &mut filled);

    // U = Q · [U_small; 0], applying reflectors last to first.
    let mut u = vec![0.0; m * n];
    for t in 0..n {
        u[t * m..t * m + n].copy_from_slice(&u_small[t * n..(t + 1) * n]);
    }
    for k in (0..n).rev() {
        if tau[k] == 0.0 {
            continue;
        }
        let reflector = &a[k * m + k..(k + 1) * m];
        for col in u.chunks_exact_mut(m) {
            let seg = &mut col[k..];
            let s = tau[k] * dot(reflector, seg);
            axpy(-s, reflector, seg);
        }
    }

    Ok((u, sigma, v_sorted))
}

/// Rotates column pairs of `w` until they are mutually orthogonal,
/// accumulating the rotations into `v`.
fn jacobi_sweeps(n: usize, w: &mut [f64], v: &mut [f64]) -> Result<usize> {
    let tol = f64::EPSILON * (n.max(16) as f64);
    // Columns at roundoff level relative to the whole matrix are truncated
    // later; rotating against them never converges.
    let negligible = (16.0 * f64::EPSILON).powi(2) * dot(w, w);
    for sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let (wp, wq) = column_pair(w, n, p, q);
                let alpha = dot(wp, wp);
                let beta = dot(wq, wq);
                let gamma = dot(wp, wq);
                if gamma == 0.0
                    || alpha.min(beta) <= negligible
                    || gamma.abs() <= tol * (alpha * beta).sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = c * t;
                rotate(wp, wq, c, s);
                let (vp, vq) = column_pair(v, n, p, q);
                rotate(vp, vq, c, s);
            }
        }
        if !rotated {
            return Ok(sweep);
        }
    }
    Err(Error::NumericalFailure {
        what: "one-sided Jacobi SVD",
        iterations: MAX_SWEEPS,
    })
}

fn column_pair(data: &mut [f64], n: usize, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let (left, right) = data.split_at_mut(q * n);
    (&mut left[p * n..(p + 1) * n], &mut right[..n])
}

#[inline]
fn rotate(xp: &mut [f64], xq: &mut [f64], c: f64, s: f64) {
    for (a, b) in xp.iter_mut().zip(xq.iter_mut()) {
        let x = *a;
        let y = *b;
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

/// Fills the unflagged columns of a column-major `n x n` matrix with unit
/// vectors orthogonal to every flagged column.
fn complete_orthonormal(n: usize, cols: &mut [f64], filled: &mut [bool]) {
    for t in 0..n {
        if filled[t] {
            continue;
        }
        // Residual mass of each basis vector e_i outside the current span.
        let mut residual = vec![1.0; n];
        for c in (0..n).filter(|&c| filled[c]) {
            for (r, x) in residual.iter_mut().zip(&cols[c * n..(c + 1) * n]) {
                *r -= x * x;
            }
        }
        let mut candidates: Vec<usize> = (0..n).collect();
        candidates.sort_by(|&x, &y| residual[y].total_cmp(&residual[x]).then(x.cmp(&y)));

        let mut chosen = None;
        for &i in &candidates {
            let mut x = vec![0.0; n];
            x[i] = 1.0;
            for _ in 0..2 {
                for c in (0..n).filter(|&c| filled[c]) {
                    let col = &cols[c * n..(c + 1) * n];
                    let proj = dot(col, &x);
                    axpy(-proj, col, &mut x);
                }
            }
            let norm = dot(&x, &x).sqrt();
            if norm > 1e-8 {
                x.iter_mut().for_each(|v| *v /= norm);
                chosen = Some(x);
                break;
            }
        }
        let x = chosen.expect("a basis vector outside a proper subspace always exists");
        cols[t * n..(t + 1) * n].copy_from_slice(&x);
        filled[t] = true;
    }
}
