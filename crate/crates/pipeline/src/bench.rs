//! Wall-clock comparison of the three CA scaling strategies.
//!
//! Each timed run computes the target matrix and the principal coordinates
//! with one strategy. The SVD between them is shared and untimed.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankjoint_core::linalg::{
    ca_target, correspondence_matrix, margins, principal_coordinates_with, scratch_bytes, svd,
    DenseMatrix, ScalingStrategy,
};
use serde::{Deserialize, Serialize};

use crate::error::{AtStage, PipelineError, Result, Stage};

/// Cross-strategy agreement every timed run must meet.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Row counts, ascending.
    pub sizes: Vec<usize>,
    pub cols: usize,
    pub repeats: usize,
    pub seed: u64,
    /// Full-diagonal runs needing more scratch than this are skipped.
    pub memory_cap_bytes: usize,
    pub strategies: Vec<ScalingStrategy>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![500, 1000, 2000, 5000, 10_000],
            cols: 100,
            repeats: 3,
            seed: 0,
            memory_cap_bytes: 2 << 30,
            strategies: ScalingStrategy::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchStatus {
    Ok,
    SkippedMemory,
}

impl BenchStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BenchStatus::Ok => "ok",
            BenchStatus::SkippedMemory => "skipped(memory)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub strategy: ScalingStrategy,
    pub rows: usize,
    pub cols: usize,
    /// Seconds per repeat.
    pub timings: Vec<f64>,
    pub median_seconds: Option<f64>,
    pub scratch_bytes: usize,
    /// Largest elementwise difference from the vectorized strategy over the
    /// target and the coordinates.
    pub residual: Option<f64>,
    pub status: BenchStatus,
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

/// Seeded counts in `0..10` with no empty row or column.
pub fn seeded_counts(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<f64> = (0..rows * cols)
        .map(|_| f64::from(rng.random_range(0u32..10)))
        .collect();
    for i in 0..rows {
        values[i * cols + i % cols] += 1.0;
    }
    for j in 0..cols {
        values[(j % rows) * cols + j] += 1.0;
    }
    DenseMatrix::new(rows, cols, values).expect("finite counts")
}

fn config_err(msg: impl Into<String>) -> PipelineError {
    PipelineError::Config(msg.into())
}

pub fn bench(config: &BenchConfig) -> Result<Vec<BenchResult>> {
    if config.sizes.is_empty() || config.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(config_err("sizes must be non-empty and strictly ascending"));
    }
    if config.repeats < 3 {
        return Err(config_err("repeats must be at least 3"));
    }
    if config.cols < 2 || config.sizes[0] < 2 {
        return Err(config_err("need at least 2 rows and 2 columns"));
    }
    let mut results = Vec::new();
    for &rows in &config.sizes {
        let counts = seeded_counts(rows, config.cols, config.seed ^ rows as u64);
        let p = correspondence_matrix(&counts).at(Stage::S2)?;
        let (r, c) = margins(&p).at(Stage::S2)?;
        let reference_t = ca_target(ScalingStrategy::Vectorized, &p, &r, &c).at(Stage::S2)?;
        let decomposition = svd(&reference_t).at(Stage::S2)?;
        let reference_f =
            principal_coordinates_with(ScalingStrategy::Vectorized, &decomposition, &r)
                .at(Stage::S2)?;

        for &strategy in &config.strategies {
            let scratch = scratch_bytes(strategy, rows, config.cols);
            if strategy == ScalingStrategy::FullDiagonal && scratch > config.memory_cap_bytes {
                results.push(BenchResult {
                    strategy,
                    rows,
                    cols: config.cols,
                    timings: Vec::new(),
                    median_seconds: None,
                    scratch_bytes: scratch,
                    residual: None,
                    status: BenchStatus::SkippedMemory,
                });
                continue;
            }
            let mut timings = Vec::with_capacity(config.repeats);
            let mut residual = 0.0_f64;
            for _ in 0..config.repeats {
                let start = Instant::now();
                let t = ca_target(strategy, &p, &r, &c).at(Stage::S2)?;
                let f = principal_coordinates_with(strategy, &decomposition, &r).at(Stage::S2)?;
                timings.push(start.elapsed().as_secs_f64());
                let diff_t = t.max_abs_diff(&reference_t).unwrap_or(f64::INFINITY);
                let diff_f = f.max_abs_diff(&reference_f).unwrap_or(f64::INFINITY);
                residual = residual.max(diff_t).max(diff_f);
            }
            if !(residual <= EQUIVALENCE_TOLERANCE) {
                return Err(PipelineError::Stage {
                    stage: Stage::S2,
                    source: rankjoint_core::Error::InvalidInput(format!(
                        "{strategy} disagrees with vectorized by {residual} at {rows} rows"
                    )),
                });
            }
            results.push(BenchResult {
                strategy,
                rows,
                cols: config.cols,
                median_seconds: median(&timings),
                timings,
                scratch_bytes: scratch,
                residual: Some(residual),
                status: BenchStatus::Ok,
            });
        }
    }
    Ok(results)
}

pub fn write_bench_csv(path: &Path, results: &[BenchResult]) -> Result<()> {
    let mut text = String::from("strategy,rows,cols,repeats,median_seconds,timings,scratch_bytes,residual,status\n");
    for r in results {
        let timings: Vec<String> = r.timings.iter().map(f64::to_string).collect();
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.strategy,
            r.rows,
            r.cols,
            r.timings.len(),
            r.median_seconds.map_or(String::new(), |m| m.to_string()),
            timings.join(";"),
            r.scratch_bytes,
            r.residual.map_or(String::new(), |x| x.to_string()),
            r.status.as_str()
        ));
    }
    let mut file = std::fs::File::create(path).map_err(|e| PipelineError::io(path, e))?;
    file.write_all(text.as_bytes())
        .map_err(|e| PipelineError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn small_sizes_all_complete() {
        let results = bench(&BenchConfig {
            sizes: vec![500, 1000],
            cols: 20,
            repeats: 3,
            ..BenchConfig::default()
        })
        .unwrap();
        assert_eq!(results.len(), 6);
        for r in &results {
            assert_eq!(r.status, BenchStatus::Ok);
            assert_eq!(r.timings.len(), 3);
            assert!(r.residual.unwrap() <= EQUIVALENCE_TOLERANCE);
        }
    }

    #[test]
    fn memory_cap_skips_full_diagonal() {
        let results = bench(&BenchConfig {
            sizes: vec![300],
            cols: 10,
            repeats: 3,
            memory_cap_bytes: 1000,
            ..BenchConfig::default()
        })
        .unwrap();
        let full = results
            .iter()
            .find(|r| r.strategy == ScalingStrategy::FullDiagonal)
            .unwrap();
        assert_eq!(full.status, BenchStatus::SkippedMemory);
        assert!(full.timings.is_empty());
    }

    #[test]
    fn invalid_configs() {
        let bad_order = BenchConfig {
            sizes: vec![1000, 500],
            ..BenchConfig::default()
        };
        assert!(bench(&bad_order).is_err());
        let few = BenchConfig {
            sizes: vec![100],
            repeats: 2,
            ..BenchConfig::default()
        };
        assert!(bench(&few).is_err());
    }
}
