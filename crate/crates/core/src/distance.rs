//! Stopping rules and per-case Euclidean distances in the retained
//! ordination dimensions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::DenseMatrix;
use crate::ordination::Ordination;
use crate::sum::compensated_sum;
use crate::{Error, Result};

/// How many leading components to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum StoppingRule {
    /// Eigenvalues strictly greater than one, at least one component.
    #[default]
    Kaiser,
    Fixed(usize),
    /// Smallest k whose cumulative variance fraction reaches the target.
    VarianceFraction(f64),
}

impl fmt::Display for StoppingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoppingRule::Kaiser => f.write_str("kaiser"),
            StoppingRule::Fixed(k) => write!(f, "{k}"),
            StoppingRule::VarianceFraction(t) => write!(f, "variance:{t}"),
        }
    }
}

impl FromStr for StoppingRule {
    type Err = Error;

    /// `kaiser`, a positive integer, or `variance:<fraction>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "kaiser" {
            return Ok(StoppingRule::Kaiser);
        }
        if let Some(t) = s.strip_prefix("variance:") {
            let t: f64 = t
                .parse()
                .map_err(|_| Error::invalid(format!("bad variance fraction `{t}`")))?;
            return Ok(StoppingRule::VarianceFraction(t));
        }
        s.parse::<usize>()
            .map(StoppingRule::Fixed)
            .map_err(|_| Error::invalid(format!("unknown stopping rule `{s}`")))
    }
}

/// Number of eigenvalues strictly above one; one if there are none.
pub fn kaiser_guttman_k(eigenvalues: &[f64]) -> Result<usize> {
    if eigenvalues.is_empty() {
        return Err(Error::invalid("no eigenvalues"));
    }
    if eigenvalues.iter().any(|e| !e.is_finite() || *e < 0.0) {
        return Err(Error::invalid("eigenvalues must be finite and non-negative"));
    }
    Ok(eigenvalues.iter().filter(|&&e| e > 1.0).count().max(1))
}

/// Applies a stopping rule to an ordination.
pub fn select_k(rule: StoppingRule, ord: &Ordination) -> Result<usize> {
    k_for_eigenvalues(rule, &ord.eigenvalues)
}

/// Applies a stopping rule to a descending eigenvalue spectrum.
pub fn k_for_eigenvalues(rule: StoppingRule, eigenvalues: &[f64]) -> Result<usize> {
    let available = eigenvalues.len();
    match rule {
        StoppingRule::Kaiser => kaiser_guttman_k(eigenvalues),
        StoppingRule::Fixed(k) if (1..=available).contains(&k) => Ok(k),
        StoppingRule::Fixed(k) => Err(Error::invalid(format!(
            "fixed k = {k} outside 1..={available}"
        ))),
        StoppingRule::VarianceFraction(target) => {
            if !(target > 0.0 && target <= 1.0) {
                return Err(Error::invalid(format!(
                    "variance fraction {target} outside (0, 1]"
                )));
            }
            if available == 0 {
                return Err(Error::invalid("no eigenvalues"));
            }
            let total = compensated_sum(eigenvalues.iter().copied());
            let mut running = Vec::with_capacity(available);
            for (j, &e) in eigenvalues.iter().enumerate() {
                running.push(if total > 0.0 { e / total } else { 1.0 / available as f64 });
                if compensated_sum(running.iter().copied()) >= target - 1e-12 {
                    return Ok(j + 1);
                }
            }
            Ok(available)
        }
    }
}

/// Per-case distances from the ordination origin.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceVector {
    pub case_ids: Vec<String>,
    pub distances: Vec<f64>,
    pub k_used: usize,
}

impl DistanceVector {
    pub fn new(case_ids: Vec<String>, distances: Vec<f64>, k_used: usize) -> Result<Self> {
        if case_ids.len() != distances.len() {
            return Err(Error::invalid(format!(
                "{} case ids for {} distances",
                case_ids.len(),
                distances.len()
            )));
        }
        if distances.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::invalid("distances must be finite and non-negative"));
        }
        if k_used == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        Ok(Self {
            case_ids,
            distances,
            k_used,
        })
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }
}

/// `d_i = sqrt(sum_{j<k} F[i][j]^2)`
pub fn ordinal_distances(f: &DenseMatrix, k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > f.cols() {
        return Err(Error::invalid(format!(
            "k = {k} outside 1..={}",
            f.cols()
        )));
    }
    Ok((0..f.rows())
        .map(|i| f.row(i)[..k].iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect())
}

/// Distances of every case in an ordination under a stopping rule.
pub fn case_distances(ord: &Ordination, rule: StoppingRule) -> Result<DistanceVector> {
    let k = select_k(rule, ord)?;
    DistanceVector::new(ord.case_ids.clone(), ordinal_distances(&ord.f, k)?, k)
}

/// One equal-width bin of a histogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

/// Equal-width histogram over `[0, max]`; the last bin is closed.
pub fn histogram(values: &[f64], bins: usize) -> Result<Vec<HistogramBin>> {
    if bins == 0 {
        return Err(Error::invalid("histogram needs at least one bin"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("histogram values must be finite"));
    }
    let lo = values.iter().copied().fold(0.0_f64, f64::min);
    let hi = values.iter().copied().fold(0.0_f64, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(b, count)| HistogramBin {
            lower: lo + b as f64 * width,
            upper: lo + (b + 1) as f64 * width,
            count,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kaiser_examples() {
        assert_eq!(kaiser_guttman_k(&[2.1, 1.5, 0.9, 0.2]).unwrap(), 2);
        assert_eq!(kaiser_guttman_k(&[0.8, 0.1]).unwrap(), 1);
        assert_eq!(kaiser_guttman_k(&[1.0, 1.0]).unwrap(), 1);
        assert!(kaiser_guttman_k(&[]).is_err());
    }

    #[test]
    fn distance_examples() {
        let f = DenseMatrix::from_rows(&[[3.0, 4.0]]).unwrap();
        assert_eq!(ordinal_distances(&f, 2).unwrap(), vec![5.0]);
        assert_eq!(ordinal_distances(&f, 1).unwrap(), vec![3.0]);
        assert!(ordinal_distances(&f, 0).is_err());
        assert!(ordinal_distances(&f, 3).is_err());
    }

    #[test]
    fn stopping_rule_parsing() {
        assert_eq!("kaiser".parse::<StoppingRule>().unwrap(), StoppingRule::Kaiser);
        assert_eq!("3".parse::<StoppingRule>().unwrap(), StoppingRule::Fixed(3));
        assert_eq!(
            "variance:0.8".parse::<StoppingRule>().unwrap(),
            StoppingRule::VarianceFraction(0.8)
        );
        assert!("broken-stick".parse::<StoppingRule>().is_err());
    }

    #[test]
    fn histogram_counts_everything() {
        let h = histogram(&[0.0, 0.5, 1.0, 1.0, 2.0], 2).unwrap();
        assert_eq!(h[0].count + h[1].count, 5);
        assert_eq!(h[1].upper, 2.0);
        assert_eq!(h[1].count, 3);
    }
}
