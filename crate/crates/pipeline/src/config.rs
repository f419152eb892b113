//! JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rankjoint_core::coding::PartitionMode;
use rankjoint_core::distance::StoppingRule;
use rankjoint_core::joint::{DEFAULT_GRID_SIZE, DEFAULT_THRESHOLD, MIN_GRID_SIZE};
use rankjoint_core::linalg::ScalingStrategy;
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};

/// Stopping rules written as strings: `kaiser`, `3`, `variance:0.8`.
mod rule_string {
    use rankjoint_core::distance::StoppingRule;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rule: &StoppingRule, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(rule)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<StoppingRule, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(de::Error::custom)
    }
}

/// Analysis window; missing ends are filled from the data.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StoppingConfig {
    #[serde(with = "rule_string")]
    pub events: StoppingRule,
    #[serde(with = "rule_string")]
    pub consumption: StoppingRule,
    /// Rule for every part in random partition mode.
    #[serde(with = "rule_string")]
    pub random: StoppingRule,
}

impl Default for StoppingConfig {
    fn default() -> Self {
        Self {
            events: StoppingRule::Kaiser,
            consumption: StoppingRule::Kaiser,
            random: StoppingRule::Kaiser,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionConfig {
    pub mode: PartitionMode,
    pub part_count: usize,
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self {
            mode: PartitionMode::ByType,
            part_count: 2,
            repetitions: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub event_input: Option<PathBuf>,
    pub consumption_input: Option<PathBuf>,
    pub window: WindowConfig,
    pub stopping: StoppingConfig,
    /// Kernel width in rank units; `m/50` when absent.
    pub bandwidth: Option<f64>,
    pub grid_size: usize,
    pub threshold: f64,
    pub quadrant_filter: Option<f64>,
    pub two_sided: bool,
    pub partition: PartitionConfig,
    pub strategy: ScalingStrategy,
    pub output_dir: PathBuf,
    /// Leading dimensions written to the biplot CSVs.
    pub biplot_dims: usize,
    pub histogram_bins: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            event_input: None,
            consumption_input: None,
            window: WindowConfig::default(),
            stopping: StoppingConfig::default(),
            bandwidth: None,
            grid_size: DEFAULT_GRID_SIZE,
            threshold: DEFAULT_THRESHOLD,
            quadrant_filter: None,
            two_sided: false,
            partition: PartitionConfig::default(),
            strategy: ScalingStrategy::Vectorized,
            output_dir: PathBuf::from("out"),
            biplot_dims: 2,
            histogram_bins: 50,
        }
    }
}

fn config_err(msg: impl Into<String>) -> PipelineError {
    PipelineError::Config(msg.into())
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let non_empty = |p: &Option<PathBuf>| p.as_ref().is_some_and(|p| !p.as_os_str().is_empty());
        if !non_empty(&self.event_input) {
            return Err(config_err("event_input is required"));
        }
        if !non_empty(&self.consumption_input) {
            return Err(config_err("consumption_input is required"));
        }
        if let (Some(s), Some(e)) = (self.window.start, self.window.end) {
            if s > e {
                return Err(config_err(format!("window start {s} is after end {e}")));
            }
        }
        if !self.threshold.is_finite() {
            return Err(config_err("threshold must be finite"));
        }
        if let Some(h) = self.bandwidth {
            if !(h.is_finite() && h > 0.0) {
                return Err(config_err(format!("bandwidth {h} must be positive")));
            }
        }
        if self.grid_size < MIN_GRID_SIZE {
            return Err(config_err(format!(
                "grid_size {} below minimum {MIN_GRID_SIZE}",
                self.grid_size
            )));
        }
        if let Some(q) = self.quadrant_filter {
            if !(0.0..1.0).contains(&q) {
                return Err(config_err(format!("quadrant_filter {q} outside [0, 1)")));
            }
        }
        if self.partition.repetitions == 0 {
            return Err(config_err("repetitions must be at least 1"));
        }
        if self.partition.mode == PartitionMode::Random && self.partition.part_count < 2 {
            return Err(config_err("random partitioning needs part_count >= 2"));
        }
        if self.biplot_dims == 0 || self.histogram_bins == 0 {
            return Err(config_err("biplot_dims and histogram_bins must be positive"));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(config_err("output_dir is required"));
        }
        Ok(())
    }
}
