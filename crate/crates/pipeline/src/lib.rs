//! File-based driver for the rank-joint anomaly workflow: CSV ingestion,
//! JSON configuration, the staged pipeline, a seeded synthetic data
//! generator and the scaling-strategy benchmark.

pub mod artifacts;
pub mod bench;
pub mod config;
pub mod error;
pub mod ingest;
pub mod pipeline;
pub mod synth;

pub use config::PipelineConfig;
pub use error::{PipelineError, Result, Stage};
pub use pipeline::{run_pipeline, run_pipeline_detailed};
pub use synth::{generate_synthetic, SyntheticSpec};
