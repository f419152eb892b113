//! The five-stage workflow: partition, transform, distance, joint
//! distance, detect.

use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use rankjoint_core::coding::{
    code_consumption, code_events, double_log_transform, join_columns, random_partition, Coded,
    CodedMatrix, ConsumptionRecord, DateWindow, EventRecord, PartitionMode, PartitionSpec,
};
use rankjoint_core::distance::{case_distances, DistanceVector, StoppingRule};
use rankjoint_core::joint::{
    align_common_cases, default_bandwidth, detect_anomalies, joint_density, rank_aligned,
    AnomalyReport, DetectOptions, JointRankDensity, RankVector,
};
use rankjoint_core::ordination::{ordinate_ca_with, ordinate_pca, Ordination};
use rankjoint_core::Error as CoreError;

use crate::artifacts;
use crate::config::PipelineConfig;
use crate::error::{AtStage, PipelineError, Result, Stage};
use crate::ingest::{parse_consumption_csv, parse_events_csv};

/// Window from the config, with a missing start taken from the earliest
/// record and a missing end three months after the start.
pub fn resolve_window(
    config: &PipelineConfig,
    events: &[EventRecord],
    consumption: &[ConsumptionRecord],
) -> Result<DateWindow> {
    let earliest = events
        .iter()
        .map(|e| e.timestamp.date_naive())
        .chain(consumption.iter().map(|c| c.date))
        .min();
    let start: Option<NaiveDate> = config.window.start.or(earliest);
    match (start, config.window.end) {
        (Some(s), Some(e)) => DateWindow::new(s, e).at(Stage::S1),
        (Some(s), None) => Ok(DateWindow::three_months_from(s)),
        (None, Some(e)) => DateWindow::new(e, e).at(Stage::S1),
        (None, None) => Err(PipelineError::Stage {
            stage: Stage::S2,
            source: CoreError::InvalidInput("no records to code".into()),
        }),
    }
}

/// One analysed partition: its ordination, retained k and distances.
pub struct PartitionResult {
    pub name: String,
    pub ordination: Ordination,
    pub distances: DistanceVector,
}

/// Everything a run produced besides the files it wrote.
pub struct RunOutput {
    pub report: AnomalyReport,
    pub joint: JointRankDensity,
    pub partitions: Vec<PartitionResult>,
}

fn analyse(name: &str, ordination: Ordination, rule: StoppingRule) -> Result<PartitionResult> {
    let distances = case_distances(&ordination, rule).at(Stage::S3)?;
    Ok(PartitionResult {
        name: name.to_owned(),
        ordination,
        distances,
    })
}

fn joint_of(config: &PipelineConfig, a: &DistanceVector, b: &DistanceVector) -> Result<JointRankDensity> {
    let aligned = align_common_cases(a, b).at(Stage::S4)?;
    let (ra, rb): (RankVector, RankVector) = rank_aligned(&aligned).at(Stage::S4)?;
    let h = config
        .bandwidth
        .unwrap_or_else(|| default_bandwidth(aligned.case_ids.len()));
    joint_density(&ra, &rb, config.grid_size, h).at(Stage::S4)
}

fn detect(config: &PipelineConfig, joint: &JointRankDensity) -> Result<AnomalyReport> {
    let options = DetectOptions {
        threshold: config.threshold,
        quadrant_filter: config.quadrant_filter,
        two_sided: config.two_sided,
    };
    detect_anomalies(joint, &options).at(Stage::S5)
}

/// Runs the workflow and writes every artifact to the output directory.
pub fn run_pipeline(config: &PipelineConfig) -> Result<AnomalyReport> {
    run_pipeline_detailed(config).map(|out| out.report)
}

pub fn run_pipeline_detailed(config: &PipelineConfig) -> Result<RunOutput> {
    config.validate()?;
    let events = parse_events_csv(config.event_input.as_ref().expect("validated"))?;
    let consumption = parse_consumption_csv(config.consumption_input.as_ref().expect("validated"))?;
    let window = resolve_window(config, &events, &consumption)?;

    let coded_events = code_events(&events, &window);
    drop(events);
    let coded_consumption = code_consumption(&consumption, &window);
    drop(consumption);

    let out = &config.output_dir;
    fs::create_dir_all(out).map_err(|e| PipelineError::io(out, e))?;
    artifacts::write_drops(
        &out.join("drops.json"),
        &[
            ("events", &coded_events.report),
            ("consumption", &coded_consumption.report),
        ],
    )?;

    let output = match config.partition.mode {
        PartitionMode::ByType => by_type(config, coded_events, coded_consumption)?,
        PartitionMode::Random => random(config, window, coded_events, coded_consumption)?,
    };

    for p in &output.partitions {
        write_partition(out, config, p)?;
    }
    artifacts::write_joint_artifacts(out, &output.joint)?;
    artifacts::write_report(&out.join("report.json"), &output.report)?;
    Ok(output)
}

fn write_partition(dir: &Path, config: &PipelineConfig, p: &PartitionResult) -> Result<()> {
    artifacts::write_scree(&dir.join(format!("scree_{}.csv", p.name)), &p.ordination)?;
    artifacts::write_distances(&dir.join(format!("distances_{}.csv", p.name)), &p.distances)?;
    artifacts::write_histogram(
        &dir.join(format!("histogram_{}.csv", p.name)),
        &p.distances.distances,
        config.histogram_bins,
    )?;
    artifacts::write_biplot(dir, &p.name, &p.ordination, config.biplot_dims)
}

/// Events through double-log and CA, consumption through PCA.
fn by_type(config: &PipelineConfig, events: Coded, consumption: Coded) -> Result<RunOutput> {
    // S1 is the fixed split by data type.
    let transformed = double_log_transform(&events.matrix).at(Stage::S2)?;
    drop(events);
    let ca = ordinate_ca_with(&transformed, config.strategy).at(Stage::S2)?;
    drop(transformed);
    let pca = ordinate_pca(&consumption.matrix).at(Stage::S2)?;

    let a = analyse("events", ca, config.stopping.events)?;
    let b = analyse("consumption", pca, config.stopping.consumption)?;
    let joint = joint_of(config, &a.distances, &b.distances)?;
    let mut report = detect(config, &joint)?;
    report.parameters.k_a = Some(a.distances.k_used);
    report.parameters.k_b = Some(b.distances.k_used);
    report.parameters.partition_mode = Some("by-type".into());
    report.parameters.repetitions = Some(1);
    Ok(RunOutput {
        report,
        joint,
        partitions: vec![a, b],
    })
}

fn without_constant_columns(part: CodedMatrix) -> Result<CodedMatrix> {
    let constant = part.constant_variables();
    if constant.is_empty() {
        return Ok(part);
    }
    let keep: Vec<&String> = part
        .variable_names()
        .iter()
        .filter(|v| !constant.contains(v))
        .collect();
    if keep.is_empty() {
        return Err(PipelineError::Stage {
            stage: Stage::S1,
            source: CoreError::InvalidPartition("a part holds only constant variables".into()),
        });
    }
    part.select_variables(&keep).at(Stage::S1)
}

/// Experimental: repeated random splits of the joined variables, PCA per
/// part, z-scores averaged over every pair of parts and every repetition.
fn random(
    config: &PipelineConfig,
    window: DateWindow,
    events: Coded,
    consumption: Coded,
) -> Result<RunOutput> {
    let transformed = double_log_transform(&events.matrix).at(Stage::S2)?;
    let joined = join_columns(&transformed, "event:", &consumption.matrix, "kwh:").at(Stage::S1)?;
    let settings = config.partition;
    let mut runs = Vec::new();
    let mut first_parts = Vec::new();
    for rep in 0..settings.repetitions {
        let spec = PartitionSpec {
            mode: PartitionMode::Random,
            part_count: settings.part_count,
            seed: settings.seed.wrapping_add(rep as u64),
            window,
        };
        let parts = random_partition(joined.variable_names(), &spec).at(Stage::S1)?;
        let mut results = Vec::with_capacity(parts.len());
        for (i, names) in parts.iter().enumerate() {
            let part = without_constant_columns(joined.select_variables(names).at(Stage::S1)?)?;
            let ord = ordinate_pca(&part).at(Stage::S2)?;
            results.push(analyse(&format!("part{}", i + 1), ord, config.stopping.random)?);
        }
        for i in 0..results.len() {
            for j in i + 1..results.len() {
                runs.push(joint_of(config, &results[i].distances, &results[j].distances)?);
            }
        }
        if rep == 0 {
            first_parts = results;
        }
    }
    let joint = JointRankDensity::average(&runs).at(Stage::S4)?;
    let mut report = detect(config, &joint)?;
    report.parameters.seed = Some(settings.seed);
    report.parameters.partition_mode = Some("random".into());
    report.parameters.repetitions = Some(settings.repetitions);
    Ok(RunOutput {
        report,
        joint,
        partitions: first_parts,
    })
}
