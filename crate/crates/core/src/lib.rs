//! Partitioned ordination and joint-rank density scoring for anomaly detection.
//!
//! A cases-by-variables dataset is split vertically into partitions. Each
//! partition is coded and ordinated independently (correspondence analysis
//! for count data, principal components for ratio-scale data), cases are
//! scored by their Euclidean distance from the ordination origin, and the
//! two rank-ordered distance lists are compared through a kernel density
//! estimate over the joint-rank scatter. Cases sitting in unusually dense
//! regions of that scatter, measured in standard deviations of density, are
//! reported as likely anomalies.
//!
//! The modules follow the data flow:
//!
//! * [`linalg`]: dense matrices, thin SVD and the diagonal scaling strategies
//!   that build the correspondence-analysis target matrix.
//! * [`coding`]: event-frequency and day-of-week consumption coding, the
//!   double-log transform and random partitioning.
//! * [`ordination`]: CA and PCA ordinations plus scree data.
//! * [`distance`]: stopping rules and per-case ordinal distances.
//! * [`joint`]: case alignment, mid-ranks, joint-rank density and detection.

pub mod coding;
pub mod distance;
mod error;
pub mod joint;
pub mod linalg;
pub mod ordination;
mod sum;

pub use error::{Axis, Error, Result};
