//! Correspondence analysis and principal components analysis of coded
//! partitions, both via the SVD of a normalized target matrix.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coding::CodedMatrix;
use crate::linalg::{
    ca_target, correspondence_matrix, margins, principal_coordinates, svd, DenseMatrix,
    MarginVector, ScalingStrategy,
};
use crate::sum::compensated_sum;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ca,
    Pca,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Ca => "ca",
            Method::Pca => "pca",
        })
    }
}

/// Result of an ordination.
///
/// `f` holds row principal coordinates (cases x q) and `v` the column
/// contribution coordinates (variables x q), i.e. the right singular
/// vectors with no display rescaling applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Ordination {
    pub method: Method,
    pub f: DenseMatrix,
    pub v: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub variance_fraction: Vec<f64>,
    pub case_ids: Vec<String>,
    pub variable_names: Vec<String>,
}

impl Ordination {
    pub fn components(&self) -> usize {
        self.singular_values.len()
    }

    /// Sum of eigenvalues: total inertia for CA, variable count for PCA.
    pub fn total_inertia(&self) -> f64 {
        compensated_sum(self.eigenvalues.iter().copied())
    }
}

fn assemble(
    method: Method,
    f: DenseMatrix,
    v: DenseMatrix,
    singular_values: Vec<f64>,
    coded: &CodedMatrix,
) -> Ordination {
    let eigenvalues: Vec<f64> = singular_values.iter().map(|s| s * s).collect();
    let total = compensated_sum(eigenvalues.iter().copied());
    let q = eigenvalues.len();
    // A flat spectrum of zeros carries no structure; spread it evenly so the
    // fractions still sum to one.
    let variance_fraction = if total > 0.0 {
        eigenvalues.iter().map(|e| e / total).collect()
    } else {
        vec![1.0 / q as f64; q]
    };
    Ordination {
        method,
        f,
        v,
        singular_values,
        eigenvalues,
        variance_fraction,
        case_ids: coded.case_ids().to_vec(),
        variable_names: coded.variable_names().to_vec(),
    }
}

fn check_dims(coded: &CodedMatrix, what: &str) -> Result<()> {
    if coded.is_empty() {
        return Err(Error::invalid(format!("{what} needs data, got an empty matrix")));
    }
    if coded.rows() < 2 {
        return Err(Error::invalid(format!(
            "{what} needs at least 2 cases, got {}",
            coded.rows()
        )));
    }
    Ok(())
}

/// Correspondence analysis using the vectorized scaling strategy.
pub fn ordinate_ca(coded: &CodedMatrix) -> Result<Ordination> {
    ordinate_ca_with(coded, ScalingStrategy::Vectorized)
}

/// Correspondence analysis: `P = N/n`, standardized residuals through the
/// chosen scaling strategy, SVD, and row principal coordinates with the row
/// masses as `D_q`.
pub fn ordinate_ca_with(coded: &CodedMatrix, strategy: ScalingStrategy) -> Result<Ordination> {
    check_dims(coded, "correspondence analysis")?;
    if coded.cols() < 2 {
        return Err(Error::invalid(format!(
            "correspondence analysis needs at least 2 variables, got {}",
            coded.cols()
        )));
    }
    let p = correspondence_matrix(coded.matrix())?;
    let (r, c) = margins(&p)?;
    let t = ca_target(strategy, &p, &r, &c)?;
    let decomposition = svd(&t)?;
    let f = principal_coordinates(&decomposition, &r)?;
    Ok(assemble(
        Method::Ca,
        f,
        decomposition.v,
        decomposition.singular_values,
        coded,
    ))
}

/// Principal components of the standardized variables.
///
/// Each column is centered and divided by its population standard
/// deviation, and the target is scaled by `1/sqrt(m)`, so the eigenvalues
/// are exactly those of the correlation matrix and sum to the number of
/// variables. Row coordinates use uniform masses `1/m`, giving
/// `F = sqrt(m)·U·diag(σ) = Z·V`.
pub fn ordinate_pca(coded: &CodedMatrix) -> Result<Ordination> {
    check_dims(coded, "principal components analysis")?;
    if let Some(name) = coded.constant_variables().into_iter().next() {
        return Err(Error::ConstantColumn(name));
    }
    let x = coded.matrix();
    let (m, p) = x.shape();
    let mut t = x.clone();
    for j in 0..p {
        let col = x.column(j);
        let mean = compensated_sum(col.iter().copied()) / m as f64;
        let ss = compensated_sum(col.iter().map(|v| (v - mean) * (v - mean)));
        // (x - mean) / sd_pop / sqrt(m) == (x - mean) / sqrt(ss)
        let scale = 1.0 / ss.sqrt();
        if !scale.is_finite() {
            return Err(Error::ConstantColumn(coded.variable_names()[j].clone()));
        }
        for i in 0..m {
            t.values_mut()[i * p + j] = (col[i] - mean) * scale;
        }
    }
    let decomposition = svd(&t)?;
    let f = principal_coordinates(&decomposition, &MarginVector::uniform(m)?)?;
    Ok(assemble(
        Method::Pca,
        f,
        decomposition.v,
        decomposition.singular_values,
        coded,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreePoint {
    /// 1-based component index.
    pub component: usize,
    pub eigenvalue: f64,
    pub cumulative_fraction: f64,
}

pub fn scree(ord: &Ordination) -> Vec<ScreePoint> {
    let mut running = Vec::with_capacity(ord.variance_fraction.len());
    let mut out = Vec::with_capacity(ord.eigenvalues.len());
    for (j, (&e, &frac)) in ord.eigenvalues.iter().zip(&ord.variance_fraction).enumerate() {
        running.push(frac);
        out.push(ScreePoint {
            component: j + 1,
            eigenvalue: e,
            cumulative_fraction: compensated_sum(running.iter().copied()),
        });
    }
    out
}
