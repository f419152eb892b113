#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankjoint_core::coding::{CodedMatrix, MatrixKind};
use rankjoint_core::linalg::DenseMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let values = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    DenseMatrix::new(rows, cols, values).unwrap()
}

/// Sparse-ish integer counts with every row and column margin non-zero.
pub fn random_counts(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let mut values: Vec<f64> = (0..rows * cols)
        .map(|_| {
            if rng.random_bool(0.3) {
                0.0
            } else {
                f64::from(rng.random_range(1u32..20))
            }
        })
        .collect();
    for i in 0..rows {
        values[i * cols + i % cols] += 1.0;
    }
    for j in 0..cols {
        values[(j % rows) * cols + j] += 1.0;
    }
    DenseMatrix::new(rows, cols, values).unwrap()
}

pub fn coded(matrix: DenseMatrix) -> CodedMatrix {
    let (m, p) = matrix.shape();
    CodedMatrix::new(
        matrix,
        (0..m).map(|i| format!("case{i:06}")).collect(),
        (0..p).map(|j| format!("var{j:04}")).collect(),
        MatrixKind::Generic,
    )
    .unwrap()
}

/// Worst deviation of `MᵀM` from the identity, by explicit loops.
pub fn orthonormality_error(m: &DenseMatrix) -> f64 {
    let (rows, cols) = m.shape();
    let mut worst: f64 = 0.0;
    for a in 0..cols {
        for b in 0..cols {
            let g: f64 = (0..rows).map(|i| m.get(i, a) * m.get(i, b)).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    worst
}

/// `‖A - U diag(σ) Vᵀ‖_F`, by explicit loops.
pub fn reconstruction_residual(
    a: &DenseMatrix,
    u: &DenseMatrix,
    sigma: &[f64],
    v: &DenseMatrix,
) -> f64 {
    let (m, p) = a.shape();
    let mut ss = 0.0;
    for i in 0..m {
        for j in 0..p {
            let r: f64 = (0..sigma.len()).map(|t| u.get(i, t) * sigma[t] * v.get(j, t)).sum();
            ss += (a.get(i, j) - r).powi(2);
        }
    }
    ss.sqrt()
}
