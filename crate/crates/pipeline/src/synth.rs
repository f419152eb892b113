//! Seeded synthetic meter data with planted anomalies.
//!
//! Background cases draw event codes from one shared multinomial and
//! consumption from one shared weekly profile. Anomalous cases favour a few
//! codes that are rare in the background and use a raised, reshaped weekly
//! profile.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};

use chrono::{Datelike, Duration, NaiveDate};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Gamma, Normal, Poisson};
use rankjoint_core::coding::BINS_PER_DAY;
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};
use crate::ingest::{consumption_header, EVENT_HEADER};

/// Which partitions the planted anomalies stand out in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtremeIn {
    #[default]
    Both,
    Events,
    Consumption,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub cases: usize,
    pub codes: usize,
    pub anomaly_fraction: f64,
    pub seed: u64,
    pub start: NaiveDate,
    /// Days of data per case, starting at `start`.
    pub days: usize,
    /// Mean events per case over the whole period.
    pub event_rate: f64,
    /// Symmetric Dirichlet concentration of the background code distribution.
    pub code_concentration: f64,
    /// Number of background-rare codes anomalies favour.
    pub anomaly_codes: usize,
    /// Share of an anomalous case's events drawn from the favoured codes.
    pub anomaly_code_share: f64,
    pub daily_mean_kwh: f64,
    /// Log-scale spread of per-case consumption levels.
    pub level_sigma: f64,
    /// Log-scale day-to-day noise.
    pub noise_sigma: f64,
    /// Multiplier on anomalous consumption levels.
    pub anomaly_level_factor: f64,
    /// Weekday/weekend tilt of the anomalous weekly profile.
    pub anomaly_profile_shift: f64,
    pub extreme_in: ExtremeIn,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            cases: 1000,
            codes: 200,
            anomaly_fraction: 0.02,
            seed: 0,
            start: NaiveDate::from_ymd_opt(2024, 1, 1).expect("valid date"),
            days: 28,
            event_rate: 30.0,
            code_concentration: 0.5,
            anomaly_codes: 5,
            anomaly_code_share: 0.5,
            daily_mean_kwh: 10.0,
            level_sigma: 0.3,
            noise_sigma: 0.15,
            anomaly_level_factor: 4.0,
            anomaly_profile_shift: 0.2,
            extreme_in: ExtremeIn::Both,
        }
    }
}

const BACKGROUND_WEEK: [f64; 7] = [1.0, 0.98, 0.97, 0.99, 1.02, 1.12, 1.15];

fn spec_err(msg: impl Into<String>) -> PipelineError {
    PipelineError::Config(msg.into())
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.cases < 100 {
            return Err(spec_err(format!("cases = {} below 100", self.cases)));
        }
        if !(0.0..0.5).contains(&self.anomaly_fraction) {
            return Err(spec_err(format!(
                "anomaly_fraction {} outside [0, 0.5)",
                self.anomaly_fraction
            )));
        }
        if self.anomaly_codes == 0 || self.anomaly_codes >= self.codes {
            return Err(spec_err("need 0 < anomaly_codes < codes"));
        }
        if self.days == 0 {
            return Err(spec_err("days must be positive"));
        }
        let positive = [
            ("event_rate", self.event_rate),
            ("code_concentration", self.code_concentration),
            ("daily_mean_kwh", self.daily_mean_kwh),
            ("anomaly_level_factor", self.anomaly_level_factor),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(spec_err(format!("{name} must be positive")));
            }
        }
        let non_negative = [("level_sigma", self.level_sigma), ("noise_sigma", self.noise_sigma)];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(spec_err(format!("{name} must be non-negative")));
            }
        }
        if !(0.0..=1.0).contains(&self.anomaly_code_share) {
            return Err(spec_err("anomaly_code_share outside [0, 1]"));
        }
        if !(0.0..1.0).contains(&self.anomaly_profile_shift) {
            return Err(spec_err("anomaly_profile_shift outside [0, 1)"));
        }
        Ok(())
    }

    /// `floor(φ·m)`
    pub fn anomaly_count(&self) -> usize {
        (self.anomaly_fraction * self.cases as f64).floor() as usize
    }

    pub fn case_id(i: usize) -> String {
        format!("m{:06}", i + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticFiles {
    pub events: PathBuf,
    pub consumption: PathBuf,
    pub labels: PathBuf,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Indices of the planted anomalies, ascending.
fn planted(spec: &SyntheticSpec) -> Vec<bool> {
    let mut order: Vec<usize> = (0..spec.cases).collect();
    order.shuffle(&mut stream(spec.seed, 0));
    let mut flags = vec![false; spec.cases];
    for &i in &order[..spec.anomaly_count()] {
        flags[i] = true;
    }
    flags
}

fn background_codes(spec: &SyntheticSpec) -> Vec<f64> {
    let mut rng = stream(spec.seed, 1);
    let gamma = Gamma::new(spec.code_concentration, 1.0).expect("validated");
    let draws: Vec<f64> = (0..spec.codes).map(|_| gamma.sample(&mut rng).max(1e-300)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / total).collect()
}

/// The `k` least likely background codes.
fn rare_codes(probs: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..probs.len()).collect();
    idx.sort_by(|&a, &b| probs[a].total_cmp(&probs[b]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(|f| BufWriter::with_capacity(1 << 20, f))
        .map_err(|e| PipelineError::io(path, e))
}

/// Intraday shape: overnight trough, morning and evening peaks.
fn intraday_shape() -> [f64; BINS_PER_DAY] {
    let mut shape = [0.0; BINS_PER_DAY];
    for (b, s) in shape.iter_mut().enumerate() {
        let hour = (b as f64 + 0.5) / 2.0;
        let bump = |centre: f64, width: f64| (-((hour - centre) / width).powi(2) / 2.0).exp();
        *s = 0.4 + bump(8.0, 1.5) + 1.5 * bump(19.0, 2.0);
    }
    let total: f64 = shape.iter().sum();
    shape.iter_mut().for_each(|s| *s /= total);
    shape
}

/// Writes `events.csv`, `consumption.csv` and `labels.csv` into `dir`.
pub fn generate_synthetic(spec: &SyntheticSpec, dir: impl AsRef<Path>) -> Result<SyntheticFiles> {
    spec.validate()?;
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    let files = SyntheticFiles {
        events: dir.join("events.csv"),
        consumption: dir.join("consumption.csv"),
        labels: dir.join("labels.csv"),
    };
    let anomalous = planted(spec);
    write_labels(&files.labels, &anomalous)?;
    let events_odd = spec.extreme_in != ExtremeIn::Consumption;
    let consumption_odd = spec.extreme_in != ExtremeIn::Events;
    write_events(spec, &files.events, &anomalous, events_odd)?;
    write_consumption(spec, &files.consumption, &anomalous, consumption_odd)?;
    Ok(files)
}

fn write_labels(path: &Path, anomalous: &[bool]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| PipelineError::io(path, e);
    writeln!(w, "case_id,label").map_err(io)?;
    for (i, &a) in anomalous.iter().enumerate() {
        let label = if a { "anomaly" } else { "background" };
        writeln!(w, "{},{label}", SyntheticSpec::case_id(i)).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn write_events(spec: &SyntheticSpec, path: &Path, anomalous: &[bool], odd: bool) -> Result<()> {
    let probs = background_codes(spec);
    let favoured = rare_codes(&probs, spec.anomaly_codes);
    let background = WeightedIndex::new(&probs).expect("positive weights");
    let count = Poisson::new(spec.event_rate).expect("validated");
    let seconds = spec.days as i64 * 86_400;
    let t0 = spec.start.and_hms_opt(0, 0, 0).expect("midnight").and_utc();
    let mut rng = stream(spec.seed, 2);

    let mut w = create(path)?;
    let io = |e| PipelineError::io(path, e);
    writeln!(w, "{}", EVENT_HEADER.join(",")).map_err(io)?;
    let mut batch: Vec<(i64, usize)> = Vec::new();
    for (i, &a) in anomalous.iter().enumerate() {
        let n = (count.sample(&mut rng) as usize).max(1);
        batch.clear();
        for _ in 0..n {
            let code = if a && odd && rng.random_bool(spec.anomaly_code_share) {
                favoured[rng.random_range(0..favoured.len())]
            } else {
                background.sample(&mut rng)
            };
            batch.push((rng.random_range(0..seconds), code));
        }
        batch.sort_unstable();
        let id = SyntheticSpec::case_id(i);
        for &(s, code) in &batch {
            let ts = t0 + Duration::seconds(s);
            writeln!(w, "{id},{},E{code:03}", ts.format("%Y-%m-%dT%H:%M:%SZ")).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

fn write_consumption(
    spec: &SyntheticSpec,
    path: &Path,
    anomalous: &[bool],
    odd: bool,
) -> Result<()> {
    let shape = intraday_shape();
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let tilt = spec.anomaly_profile_shift;
    let anomaly_week: Vec<f64> = BACKGROUND_WEEK
        .iter()
        .enumerate()
        .map(|(d, &w)| if d < 5 { w * (1.0 + tilt) } else { w * (1.0 - tilt) })
        .collect();
    let mut rng = stream(spec.seed, 3);

    let mut w = create(path)?;
    let io = |e| PipelineError::io(path, e);
    writeln!(w, "{}", consumption_header().join(",")).map_err(io)?;
    let mut line = String::with_capacity(512);
    for (i, &a) in anomalous.iter().enumerate() {
        let shifted = a && odd;
        let mut level = spec.daily_mean_kwh * (spec.level_sigma * unit.sample(&mut rng)).exp();
        let week: &[f64] = if shifted {
            level *= spec.anomaly_level_factor;
            &anomaly_week
        } else {
            &BACKGROUND_WEEK
        };
        let id = SyntheticSpec::case_id(i);
        for d in 0..spec.days {
            let date = spec.start + Duration::days(d as i64);
            let dow = date.weekday().num_days_from_monday() as usize;
            let total = level * week[dow] * (spec.noise_sigma * unit.sample(&mut rng)).exp();
            line.clear();
            line.push_str(&id);
            line.push(',');
            let _ = write!(line, "{}", date.format("%Y-%m-%d"));
            for s in &shape {
                let _ = write!(line, ",{:.4}", total * s);
            }
            writeln!(w, "{line}").map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Case ids labelled `anomaly` in a labels file, sorted.
pub fn read_anomalous_ids(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    let mut ids: Vec<String> = text
        .lines()
        .skip(1)
        .filter_map(|l| l.split_once(','))
        .filter(|(_, label)| label.trim() == "anomaly")
        .map(|(id, _)| id.to_owned())
        .collect();
    ids.sort();
    Ok(ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(fraction: f64, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            cases: 1000,
            codes: 30,
            days: 3,
            event_rate: 4.0,
            anomaly_fraction: fraction,
            seed,
            ..SyntheticSpec::default()
        }
    }

    #[test]
    fn anomaly_count_is_floor() {
        assert_eq!(small(0.02, 0).anomaly_count(), 20);
        assert_eq!(small(0.0255, 0).anomaly_count(), 25);
        assert_eq!(small(0.0, 0).anomaly_count(), 0);
    }

    #[test]
    fn labels_match_fraction() {
        let dir = tempfile::tempdir().unwrap();
        let files = generate_synthetic(&small(0.02, 7), dir.path()).unwrap();
        assert_eq!(read_anomalous_ids(&files.labels).unwrap().len(), 20);
        let files = generate_synthetic(&small(0.0, 7), dir.path()).unwrap();
        assert!(read_anomalous_ids(&files.labels).unwrap().is_empty());
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let fa = generate_synthetic(&small(0.05, 3), a.path()).unwrap();
        let fb = generate_synthetic(&small(0.05, 3), b.path()).unwrap();
        for (x, y) in [
            (&fa.events, &fb.events),
            (&fa.consumption, &fb.consumption),
            (&fa.labels, &fb.labels),
        ] {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
        }
        let c = tempfile::tempdir().unwrap();
        let fc = generate_synthetic(&small(0.05, 4), c.path()).unwrap();
        assert_ne!(fs::read(&fa.events).unwrap(), fs::read(&fc.events).unwrap());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(small(0.5, 0).validate().is_err());
        assert!(SyntheticSpec { cases: 99, ..small(0.0, 0) }.validate().is_err());
        assert!(small(0.49, 0).validate().is_ok());
    }

    #[test]
    fn intraday_shape_sums_to_one() {
        let s: f64 = intraday_shape().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}
