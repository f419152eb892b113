//! Dense matrices, thin SVD and the diagonal scaling strategies used to form
//! the correspondence-analysis target matrix and principal coordinates.

mod scaling;
mod sparse;
mod svd;

use std::fmt;
use std::ops::Index;

use crate::sum::compensated_sum;
use crate::{Axis, Error, Result};

pub use scaling::{
    ca_target, ca_target_full_diagonal, ca_target_sparse_diagonal, ca_target_vectorized,
    principal_coordinates, principal_coordinates_with, scratch_bytes, ScalingStrategy,
};
pub use sparse::CsrMatrix;
pub use svd::{svd, SvdResult, SVD_TRUNCATION};

/// Tolerance on `sum(margins) == 1`.
pub const MARGIN_SUM_TOLERANCE: f64 = 1e-12;

/// Row-major dense matrix of finite reals.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major values. Both dimensions must be at
    /// least one and every entry finite.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {} values for a {rows}x{cols} matrix, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::invalid(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, values)
    }

    /// The 0x0 matrix. Only produced by coding when no data survives the
    /// window; every numerical routine rejects it.
    pub fn empty() -> Self {
        Self {
            rows: 0,
            cols: 0,
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    pub(crate) fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    /// Wraps values already known to be finite and correctly sized.
    pub(crate) fn from_raw(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), rows * cols);
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                out.values[j * self.rows + i] = v;
            }
        }
        out
    }

    /// Dense product `self * rhs`, O(m·k·n) with no structure exploited.
    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.values[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                crate::sum::axpy(a, rhs.row(k), out_row);
            }
        }
        Ok(out)
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&j| j >= self.cols) {
            return Err(Error::invalid(format!(
                "column {bad} out of range for {} columns",
                self.cols
            )));
        }
        let mut values = Vec::with_capacity(self.rows * columns.len());
        for i in 0..self.rows {
            let row = self.row(i);
            values.extend(columns.iter().map(|&j| row[j]));
        }
        Self::new(self.rows, columns.len(), values)
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&i| i >= self.rows) {
            return Err(Error::invalid(format!(
                "row {bad} out of range for {} rows",
                self.rows
            )));
        }
        let mut values = Vec::with_capacity(rows.len() * self.cols);
        for &i in rows {
            values.extend_from_slice(self.row(i));
        }
        Self::new(rows.len(), self.cols, values)
    }

    pub fn frobenius_norm(&self) -> f64 {
        compensated_sum(self.values.iter().map(|v| v * v)).sqrt()
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> Option<f64> {
        (self.shape() == other.shape()).then(|| {
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
    }

    pub fn grand_total(&self) -> f64 {
        compensated_sum(self.values.iter().copied())
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| compensated_sum(self.row(i).iter().copied()))
            .collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| compensated_sum((0..self.rows).map(|i| self.get(i, j))))
            .collect()
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.values[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        if self.rows > 8 {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

/// Non-negative masses summing to one, e.g. the row or column margins of a
/// correspondence matrix. Diagonal matrices built from margins are stored as
/// this vector and never materialized, except by the full-diagonal strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginVector {
    entries: Vec<f64>,
}

impl MarginVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("margin vector is empty"));
        }
        if let Some(i) = entries.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(format!(
                "margin entry {i} is {} (must be finite and non-negative)",
                entries[i]
            )));
        }
        let total = compensated_sum(entries.iter().copied());
        if (total - 1.0).abs() > MARGIN_SUM_TOLERANCE {
            return Err(Error::invalid(format!("margins sum to {total}, not 1")));
        }
        Ok(Self { entries })
    }

    /// Equal mass `1/n` on every entry.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("margin vector is empty"));
        }
        Ok(Self {
            entries: vec![1.0 / n as f64; n],
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    /// `1 / sqrt(m)` for every mass, failing on the first zero.
    pub fn inverse_sqrt(&self, axis: Axis) -> Result<Vec<f64>> {
        self.entries
            .iter()
            .enumerate()
            .map(|(index, &m)| {
                if m > 0.0 {
                    Ok(1.0 / m.sqrt())
                } else {
                    Err(Error::ZeroMargin { axis, index })
                }
            })
            .collect()
    }
}

/// Row and column margins of a correspondence matrix `P`.
pub fn margins(p: &DenseMatrix) -> Result<(MarginVector, MarginVector)> {
    if p.is_empty() {
        return Err(Error::invalid("correspondence matrix is empty"));
    }
    Ok((
        MarginVector::new(p.row_sums())?,
        MarginVector::new(p.column_sums())?,
    ))
}

/// Divides a non-negative matrix by its grand total.
pub fn correspondence_matrix(n: &DenseMatrix) -> Result<DenseMatrix> {
    if n.is_empty() {
        return Err(Error::invalid("data matrix is empty"));
    }
    if n.as_slice().iter().any(|&v| v < 0.0) {
        return Err(Error::invalid("correspondence analysis needs non-negative data"));
    }
    let total = n.grand_total();
    if total <= 0.0 {
        return Err(Error::invalid("data matrix sums to zero"));
    }
    let values = n.as_slice().iter().map(|v| v / total).collect();
    Ok(DenseMatrix::from_raw(n.rows, n.cols, values))
}
