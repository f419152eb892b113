use crate::linalg::DenseMatrix;
use crate::{Error, Result};

/// Compressed sparse row matrix.
///
/// Only what the sparse-diagonal scaling strategy needs: construction from a
/// diagonal or triplets, and products with dense operands.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Square matrix with `diag` on the diagonal.
    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Builds from `(row, col, value)` triplets. Duplicates are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut sorted = triplets.to_vec();
        if let Some(&(i, j, _)) = sorted.iter().find(|&&(i, j, _)| i >= rows || j >= cols) {
            return Err(Error::invalid(format!(
                "triplet ({i}, {j}) outside {rows}x{cols}"
            )));
        }
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0; rows + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            col_idx.push(j);
            values.push(v);
            row_ptr[i + 1] += 1;
            last = Some((i, j));
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Heap bytes held by the three CSR arrays.
    pub fn heap_bytes(&self) -> usize {
        (self.row_ptr.len() + self.col_idx.len()) * std::mem::size_of::<usize>()
            + self.values.len() * std::mem::size_of::<f64>()
    }

    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// `out = x · self` for a row vector `x` of length `rows`.
    pub fn row_vector_mul(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (k, &xk) in x.iter().enumerate() {
            for (j, v) in self.row_entries(k) {
                out[j] += xk * v;
            }
        }
    }

    /// `self · x`
    pub fn mul_dense(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != x.rows() {
            return Err(Error::invalid(format!(
                "cannot multiply sparse {}x{} by dense {}x{}",
                self.rows,
                self.cols,
                x.rows(),
                x.cols()
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, x.cols());
        for i in 0..self.rows {
            let out_row = out.row_mut(i);
            for (k, v) in self.row_entries(i) {
                crate::sum::axpy(v, x.row(k), out_row);
            }
        }
        Ok(out)
    }

    /// `x · self`
    pub fn dense_mul(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.cols() != self.rows {
            return Err(Error::invalid(format!(
                "cannot multiply dense {}x{} by sparse {}x{}",
                x.rows(),
                x.cols(),
                self.rows,
                self.cols
            )));
        }
        let mut out = DenseMatrix::zeros(x.rows(), self.cols);
        for i in 0..x.rows() {
            self.row_vector_mul(x.row(i), out.row_mut(i));
        }
        Ok(out)
    }
}
