//! Three interchangeable ways to apply `D_r^(-1/2) · X · D_c^(-1/2)`.
//!
//! All three compute every output entry as `(x · r_i^(-1/2)) · c_j^(-1/2)`
//! with the same rounding, so their results agree bit for bit (up to the sign
//! of zero). They differ only in memory traffic:
//!
//! * full diagonal materializes `D_r` (`m x m`) and `D_c` (`p x p`) as dense
//!   matrices and multiplies densely, `Θ(m² + p²)` scratch;
//! * sparse diagonal stores the two scalings as CSR matrices and streams the
//!   centered rows through them, `Θ(m + p)` scratch;
//! * vectorized never forms a diagonal at all and scales each entry in place.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CsrMatrix, DenseMatrix, MarginVector, SvdResult};
use crate::{Axis, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingStrategy {
    FullDiagonal,
    SparseDiagonal,
    Vectorized,
}

impl ScalingStrategy {
    pub const ALL: [ScalingStrategy; 3] = [
        ScalingStrategy::FullDiagonal,
        ScalingStrategy::SparseDiagonal,
        ScalingStrategy::Vectorized,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScalingStrategy::FullDiagonal => "full-diagonal",
            ScalingStrategy::SparseDiagonal => "sparse-diagonal",
            ScalingStrategy::Vectorized => "vectorized",
        }
    }
}

impl fmt::Display for ScalingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScalingStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full-diagonal" | "full" => Ok(ScalingStrategy::FullDiagonal),
            "sparse-diagonal" | "sparse" => Ok(ScalingStrategy::SparseDiagonal),
            "vectorized" => Ok(ScalingStrategy::Vectorized),
            other => Err(Error::invalid(format!("unknown scaling strategy `{other}`"))),
        }
    }
}

/// Scratch bytes a strategy needs beyond its `m x p` output, for the target
/// matrix of an `m x p` correspondence matrix.
pub fn scratch_bytes(strategy: ScalingStrategy, m: usize, p: usize) -> usize {
    let f = std::mem::size_of::<f64>();
    let u = std::mem::size_of::<usize>();
    match strategy {
        // D_r, D_c, P - rcᵀ, D_r·(P - rcᵀ) and the two scaling vectors
        ScalingStrategy::FullDiagonal => (m * m + p * p + 2 * m * p + m + p) * f,
        // two CSR diagonals plus two row buffers
        ScalingStrategy::SparseDiagonal => (m + p) * (2 * u + f) + 2 * u + 2 * p * f,
        ScalingStrategy::Vectorized => (m + p) * f,
    }
}

fn check_shapes(p: &DenseMatrix, r: &MarginVector, c: &MarginVector) -> Result<()> {
    if p.is_empty() {
        return Err(Error::invalid("correspondence matrix is empty"));
    }
    if p.rows() != r.len() || p.cols() != c.len() {
        return Err(Error::invalid(format!(
            "margins of length {} and {} do not fit a {}x{} matrix",
            r.len(),
            c.len(),
            p.rows(),
            p.cols()
        )));
    }
    if p.as_slice().iter().any(|&v| v < 0.0) {
        return Err(Error::invalid("correspondence matrix has negative entries"));
    }
    Ok(())
}

/// `P - r·cᵀ` as a fresh dense matrix.
fn centered(p: &DenseMatrix, r: &[f64], c: &[f64]) -> DenseMatrix {
    let mut out = p.clone();
    for (i, &ri) in r.iter().enumerate() {
        for (x, &cj) in out.row_mut(i).iter_mut().zip(c) {
            *x -= ri * cj;
        }
    }
    out
}

fn dense_diagonal(diag: &[f64]) -> DenseMatrix {
    let n = diag.len();
    let mut d = DenseMatrix::zeros(n, n);
    for (i, &v) in diag.iter().enumerate() {
        d.values_mut()[i * n + i] = v;
    }
    d
}

/// Standardized residuals `D_r^(-1/2)(P - rcᵀ)D_c^(-1/2)` with dense
/// diagonal matrices and dense products. The memory-hungry baseline.
pub fn ca_target_full_diagonal(
    p: &DenseMatrix,
    r: &MarginVector,
    c: &MarginVector,
) -> Result<DenseMatrix> {
    check_shapes(p, r, c)?;
    let rsq = r.inverse_sqrt(Axis::Row)?;
    let csq = c.inverse_sqrt(Axis::Column)?;
    let dr = dense_diagonal(&rsq);
    let dc = dense_diagonal(&csq);
    let residual = centered(p, r.as_slice(), c.as_slice());
    dr.matmul(&residual)?.matmul(&dc)
}

/// Same result as [`ca_target_full_diagonal`], with the two scalings held
/// as sparse diagonal matrices. Rows of `P - rcᵀ` are formed on demand, so
/// no intermediate `m x p` matrix exists.
pub fn ca_target_sparse_diagonal(
    p: &DenseMatrix,
    r: &MarginVector,
    c: &MarginVector,
) -> Result<DenseMatrix> {
    check_shapes(p, r, c)?;
    let rsp = CsrMatrix::diagonal(&r.inverse_sqrt(Axis::Row)?);
    let csp = CsrMatrix::diagonal(&c.inverse_sqrt(Axis::Column)?);
    let (rm, cm) = (r.as_slice(), c.as_slice());
    let cols = p.cols();
    let mut out = DenseMatrix::zeros(p.rows(), cols);
    let mut left = vec![0.0; cols];
    for i in 0..p.rows() {
        left.iter_mut().for_each(|x| *x = 0.0);
        for (k, v) in rsp.row_entries(i) {
            for ((acc, &pk), &cj) in left.iter_mut().zip(p.row(k)).zip(cm) {
                *acc += v * (pk - rm[k] * cj);
            }
        }
        csp.row_vector_mul(&left, out.row_mut(i));
    }
    Ok(out)
}

/// Same result again, scaling each entry of `P - rcᵀ` in place by its row
/// and column factors. No diagonal structure is built.
pub fn ca_target_vectorized(
    p: &DenseMatrix,
    r: &MarginVector,
    c: &MarginVector,
) -> Result<DenseMatrix> {
    check_shapes(p, r, c)?;
    let rsq = r.inverse_sqrt(Axis::Row)?;
    let csq = c.inverse_sqrt(Axis::Column)?;
    let cm = c.as_slice();
    let mut out = p.clone();
    // Row-major storage: one contiguous pass per row.
    for (i, (&ri, &si)) in r.as_slice().iter().zip(&rsq).enumerate() {
        for ((x, &cj), &tj) in out.row_mut(i).iter_mut().zip(cm).zip(&csq) {
            *x = ((*x - ri * cj) * si) * tj;
        }
    }
    Ok(out)
}

pub fn ca_target(
    strategy: ScalingStrategy,
    p: &DenseMatrix,
    r: &MarginVector,
    c: &MarginVector,
) -> Result<DenseMatrix> {
    match strategy {
        ScalingStrategy::FullDiagonal => ca_target_full_diagonal(p, r, c),
        ScalingStrategy::SparseDiagonal => ca_target_sparse_diagonal(p, r, c),
        ScalingStrategy::Vectorized => ca_target_vectorized(p, r, c),
    }
}

/// Row principal coordinates `F = D_q^(-1/2) · U · diag(σ)`, i.e.
/// `F[i][j] = U[i][j] · σ_j / sqrt(row_scale[i])`.
pub fn principal_coordinates(svd: &SvdResult, row_scale: &MarginVector) -> Result<DenseMatrix> {
    principal_coordinates_with(ScalingStrategy::Vectorized, svd, row_scale)
}

pub fn principal_coordinates_with(
    strategy: ScalingStrategy,
    svd: &SvdResult,
    row_scale: &MarginVector,
) -> Result<DenseMatrix> {
    let (m, q) = svd.u.shape();
    if row_scale.len() != m {
        return Err(Error::invalid(format!(
            "row scale has {} entries for {m} rows",
            row_scale.len()
        )));
    }
    if svd.singular_values.len() != q {
        return Err(Error::invalid("singular values do not match U columns"));
    }
    let rsq = row_scale.inverse_sqrt(Axis::Row)?;
    let sigma = &svd.singular_values;
    match strategy {
        ScalingStrategy::FullDiagonal => dense_diagonal(&rsq)
            .matmul(&svd.u)?
            .matmul(&dense_diagonal(sigma)),
        ScalingStrategy::SparseDiagonal => {
            let scaled = CsrMatrix::diagonal(&rsq).mul_dense(&svd.u)?;
            CsrMatrix::diagonal(sigma).dense_mul(&scaled)
        }
        ScalingStrategy::Vectorized => {
            let mut f = svd.u.clone();
            for (i, &si) in rsq.iter().enumerate() {
                for (x, &s) in f.row_mut(i).iter_mut().zip(sigma) {
                    *x = (*x * si) * s;
                }
            }
            Ok(f)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn margins_of(p: &DenseMatrix) -> (MarginVector, MarginVector) {
        super::super::margins(p).unwrap()
    }

    #[test]
    fn uniform_p_gives_zero_target() {
        let p = DenseMatrix::from_rows(&[[0.25, 0.25], [0.25, 0.25]]).unwrap();
        let (r, c) = margins_of(&p);
        for s in ScalingStrategy::ALL {
            let t = ca_target(s, &p, &r, &c).unwrap();
            assert!(t.as_slice().iter().all(|&x| x == 0.0), "{s}");
        }
    }

    #[test]
    fn diagonal_p_hand_case() {
        let p = DenseMatrix::from_rows(&[[0.5, 0.0], [0.0, 0.5]]).unwrap();
        let (r, c) = margins_of(&p);
        for s in ScalingStrategy::ALL {
            let t = ca_target(s, &p, &r, &c).unwrap();
            let expected = [0.5, -0.5, -0.5, 0.5];
            for (a, b) in t.as_slice().iter().zip(expected) {
                assert!((a - b).abs() <= 1e-15, "{s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn zero_column_margin_is_reported() {
        let p = DenseMatrix::from_rows(&[[0.5, 0.0], [0.5, 0.0]]).unwrap();
        let (r, c) = margins_of(&p);
        for s in ScalingStrategy::ALL {
            assert_eq!(
                ca_target(s, &p, &r, &c),
                Err(Error::ZeroMargin {
                    axis: Axis::Column,
                    index: 1
                })
            );
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let p = DenseMatrix::from_rows(&[[0.5, 0.5]]).unwrap();
        let r = MarginVector::uniform(2).unwrap();
        let c = MarginVector::uniform(2).unwrap();
        assert!(matches!(
            ca_target_vectorized(&p, &r, &c),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn principal_coordinates_direct_formula() {
        let svd = SvdResult {
            u: DenseMatrix::identity(2),
            singular_values: vec![1.0, 0.0],
            v: DenseMatrix::identity(2),
        };
        let scale = MarginVector::new(vec![0.5, 0.5]).unwrap();
        for s in ScalingStrategy::ALL {
            let f = principal_coordinates_with(s, &svd, &scale).unwrap();
            assert!((f.get(0, 0) - 2.0_f64.sqrt()).abs() < 1e-15);
            assert_eq!(f.get(0, 1), 0.0);
            assert_eq!(f.get(1, 0), 0.0);
            assert_eq!(f.get(1, 1), 0.0);
        }
    }

    #[test]
    fn principal_coordinates_rejects_zero_scale() {
        let svd = SvdResult {
            u: DenseMatrix::identity(2),
            singular_values: vec![1.0, 0.5],
            v: DenseMatrix::identity(2),
        };
        let scale = MarginVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(
            principal_coordinates(&svd, &scale),
            Err(Error::ZeroMargin {
                axis: Axis::Row,
                index: 1
            })
        );
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in ScalingStrategy::ALL {
            assert_eq!(s.as_str().parse::<ScalingStrategy>().unwrap(), s);
        }
        assert!("dense".parse::<ScalingStrategy>().is_err());
    }

    #[test]
    fn full_scratch_is_quadratic() {
        let small = scratch_bytes(ScalingStrategy::FullDiagonal, 100, 10);
        let big = scratch_bytes(ScalingStrategy::FullDiagonal, 1000, 10);
        assert!(big > 50 * small);
        assert_eq!(scratch_bytes(ScalingStrategy::Vectorized, 100, 10), 110 * 8);
    }
}
