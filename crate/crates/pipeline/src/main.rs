use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rankjoint::artifacts::{self, JointMeta};
use rankjoint::bench::{bench, write_bench_csv, BenchConfig};
use rankjoint::config::PipelineConfig;
use rankjoint::error::{PipelineError, Result, Stage};
use rankjoint::ingest::{parse_consumption_csv, parse_events_csv};
use rankjoint::pipeline::resolve_window;
use rankjoint::synth::{generate_synthetic, ExtremeIn, SyntheticSpec};
use rankjoint_core::coding::{
    code_consumption, code_events, double_log_transform, MatrixKind, PartitionMode,
};
use rankjoint_core::distance::{k_for_eigenvalues, ordinal_distances, DistanceVector, StoppingRule};
use rankjoint_core::joint::{
    align_common_cases, default_bandwidth, detect_anomalies, joint_density, rank_aligned,
    DetectOptions, JointRankDensity,
};
use rankjoint_core::linalg::{DenseMatrix, ScalingStrategy};
use rankjoint_core::ordination::{ordinate_ca_with, ordinate_pca};

#[derive(Parser)]
#[command(name = "rankjoint", version, about = "Joint-rank anomaly detection over two partitions of meter data")]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic events, consumption and labels CSVs.
    Synth(SynthArgs),
    /// Count event codes per case over the window.
    CodeEvents(CodeArgs),
    /// Mean daily consumption per weekday and case.
    CodeConsumption(CodeArgs),
    /// CA or PCA of a coded matrix.
    Ordinate(OrdinateArgs),
    /// Per-case distances from ordination coordinates.
    Distances(DistanceArgs),
    /// Joint-rank density of two distance files.
    Joint(JointArgs),
    /// Flag high-density cases from a joint density.
    Detect(DetectArgs),
    /// Run every stage end to end.
    Pipeline(PipelineArgs),
    /// Time the three scaling strategies.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    cases: Option<usize>,
    #[arg(long)]
    codes: Option<usize>,
    #[arg(long)]
    anomaly_fraction: Option<f64>,
    #[arg(long)]
    days: Option<usize>,
    #[arg(long)]
    start: Option<NaiveDate>,
    #[arg(long, value_enum)]
    extreme_in: Option<Extreme>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Extreme {
    Both,
    Events,
    Consumption,
}

#[derive(Args)]
struct CodeArgs {
    /// Raw CSV; defaults to the matching config input.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    start: Option<NaiveDate>,
    #[arg(long)]
    end: Option<NaiveDate>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Ca,
    Pca,
}

#[derive(Args)]
struct OrdinateArgs {
    /// Coded matrix CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    method: Method,
    /// Apply the double-log transform before ordination.
    #[arg(long)]
    double_log: bool,
    #[arg(long, default_value = "vectorized")]
    strategy: ScalingStrategy,
    #[arg(long, default_value_t = 2)]
    biplot_dims: usize,
}

#[derive(Args)]
struct DistanceArgs {
    /// `coordinates.csv` from `ordinate`.
    #[arg(long)]
    coordinates: PathBuf,
    /// `scree.csv` from `ordinate`.
    #[arg(long)]
    scree: PathBuf,
    /// `kaiser`, a fixed k, or `variance:<fraction>`.
    #[arg(long, default_value = "kaiser")]
    rule: StoppingRule,
    #[arg(long, default_value_t = 50)]
    bins: usize,
}

#[derive(Args)]
struct JointArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long)]
    grid_size: Option<usize>,
}

#[derive(Args)]
struct DetectArgs {
    /// `joint.csv`; `joint_meta.json` is read from the same directory.
    #[arg(long)]
    joint: PathBuf,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    quadrant_filter: Option<f64>,
    #[arg(long)]
    two_sided: bool,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    events: Option<PathBuf>,
    #[arg(long)]
    consumption: Option<PathBuf>,
    #[arg(long)]
    start: Option<NaiveDate>,
    #[arg(long)]
    end: Option<NaiveDate>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long)]
    grid_size: Option<usize>,
    #[arg(long)]
    quadrant_filter: Option<f64>,
    #[arg(long)]
    two_sided: bool,
    #[arg(long)]
    strategy: Option<ScalingStrategy>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    parts: Option<usize>,
    #[arg(long)]
    repetitions: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    ByType,
    Random,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated ascending row counts.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    memory_cap_mb: Option<usize>,
}

fn config_err(msg: impl Into<String>) -> PipelineError {
    PipelineError::Config(msg.into())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn out_dir(cli_out: &Option<PathBuf>, fallback: &Path) -> Result<PathBuf> {
    let dir = cli_out.clone().unwrap_or_else(|| fallback.to_owned());
    fs::create_dir_all(&dir).map_err(|e| PipelineError::io(&dir, e))?;
    Ok(dir)
}

fn pipeline_config(cli: &Cli) -> Result<PipelineConfig> {
    match &cli.config {
        Some(path) => PipelineConfig::load(path),
        None => Ok(PipelineConfig::default()),
    }
}

fn core<T>(stage: Stage, r: rankjoint_core::Result<T>) -> Result<T> {
    r.map_err(|source| PipelineError::Stage { stage, source })
}

fn synth(cli: &Cli, args: &SynthArgs) -> Result<()> {
    let mut spec: SyntheticSpec = match &cli.config {
        Some(p) => read_json(p)?,
        None => SyntheticSpec::default(),
    };
    if let Some(s) = cli.seed {
        spec.seed = s;
    }
    if let Some(v) = args.cases {
        spec.cases = v;
    }
    if let Some(v) = args.codes {
        spec.codes = v;
    }
    if let Some(v) = args.anomaly_fraction {
        spec.anomaly_fraction = v;
    }
    if let Some(v) = args.days {
        spec.days = v;
    }
    if let Some(v) = args.start {
        spec.start = v;
    }
    if let Some(v) = args.extreme_in {
        spec.extreme_in = match v {
            Extreme::Both => ExtremeIn::Both,
            Extreme::Events => ExtremeIn::Events,
            Extreme::Consumption => ExtremeIn::Consumption,
        };
    }
    let dir = out_dir(&cli.out, Path::new("synthetic"))?;
    let files = generate_synthetic(&spec, &dir)?;
    println!(
        "wrote {}, {}, {} ({} anomalies of {} cases)",
        files.events.display(),
        files.consumption.display(),
        files.labels.display(),
        spec.anomaly_count(),
        spec.cases
    );
    Ok(())
}

fn code(cli: &Cli, args: &CodeArgs, events: bool) -> Result<()> {
    let mut config = pipeline_config(cli)?;
    config.window.start = args.start.or(config.window.start);
    config.window.end = args.end.or(config.window.end);
    let configured = if events {
        &config.event_input
    } else {
        &config.consumption_input
    };
    let input = args
        .input
        .clone()
        .or_else(|| configured.clone())
        .ok_or_else(|| config_err("no input file given"))?;
    let dir = out_dir(&cli.out, &config.output_dir)?;
    let (coded, name) = if events {
        let records = parse_events_csv(&input)?;
        let window = resolve_window(&config, &records, &[])?;
        (code_events(&records, &window), "events")
    } else {
        let records = parse_consumption_csv(&input)?;
        let window = resolve_window(&config, &[], &records)?;
        (code_consumption(&records, &window), "consumption")
    };
    let path = dir.join(format!("coded_{name}.csv"));
    artifacts::write_coded(&path, &coded.matrix)?;
    artifacts::write_drops(&dir.join(format!("drops_{name}.json")), &[(name, &coded.report)])?;
    println!(
        "wrote {} ({} cases x {} variables)",
        path.display(),
        coded.matrix.rows(),
        coded.matrix.cols()
    );
    Ok(())
}

fn ordinate(cli: &Cli, args: &OrdinateArgs) -> Result<()> {
    let mut coded = artifacts::read_coded(&args.input, MatrixKind::Generic)?;
    if args.double_log {
        coded = core(Stage::S2, double_log_transform(&coded))?;
    }
    let ord = core(
        Stage::S2,
        match args.method {
            Method::Ca => ordinate_ca_with(&coded, args.strategy),
            Method::Pca => ordinate_pca(&coded),
        },
    )?;
    let dir = out_dir(&cli.out, Path::new("."))?;
    artifacts::write_scree(&dir.join("scree.csv"), &ord)?;
    artifacts::write_coordinates(
        &dir.join("coordinates.csv"),
        "case_id",
        &ord.case_ids,
        &ord.f,
        ord.components(),
    )?;
    artifacts::write_biplot(&dir, "ordination", &ord, args.biplot_dims)?;
    println!(
        "{} components, leading eigenvalue {}",
        ord.components(),
        ord.eigenvalues[0]
    );
    Ok(())
}

fn distances(cli: &Cli, args: &DistanceArgs) -> Result<()> {
    let scree = artifacts::read_table(&args.scree)?;
    let eigenvalues = scree
        .column("eigenvalue")
        .ok_or_else(|| config_err("scree file lacks an eigenvalue column"))?;
    let k = core(Stage::S3, k_for_eigenvalues(args.rule, &eigenvalues))?;
    let coords = artifacts::read_table(&args.coordinates)?;
    let (ids, _, f): (Vec<String>, Vec<String>, DenseMatrix) =
        coords.into_matrix().map_err(config_err)?;
    let d = core(Stage::S3, ordinal_distances(&f, k))?;
    let dv = core(Stage::S3, DistanceVector::new(ids, d, k))?;
    let dir = out_dir(&cli.out, Path::new("."))?;
    artifacts::write_distances(&dir.join("distances.csv"), &dv)?;
    artifacts::write_histogram(&dir.join("histogram.csv"), &dv.distances, args.bins)?;
    println!("k = {k}, {} cases", dv.len());
    Ok(())
}

fn read_distances(path: &Path) -> Result<DistanceVector> {
    let t = artifacts::read_table(path)?;
    let d = t
        .column("distance")
        .ok_or_else(|| config_err(format!("{} lacks a distance column", path.display())))?;
    core(Stage::S4, DistanceVector::new(t.ids, d, 1))
}

fn joint(cli: &Cli, args: &JointArgs) -> Result<()> {
    let config = pipeline_config(cli)?;
    let a = read_distances(&args.a)?;
    let b = read_distances(&args.b)?;
    let aligned = core(Stage::S4, align_common_cases(&a, &b))?;
    let (ra, rb) = core(Stage::S4, rank_aligned(&aligned))?;
    let h = args
        .bandwidth
        .or(config.bandwidth)
        .unwrap_or_else(|| default_bandwidth(ra.len()));
    let g = args.grid_size.unwrap_or(config.grid_size);
    let jrd = core(Stage::S4, joint_density(&ra, &rb, g, h))?;
    let dir = out_dir(&cli.out, Path::new("."))?;
    artifacts::write_joint_artifacts(&dir, &jrd)?;
    println!("{} common cases, bandwidth {h}, grid {g}", jrd.len());
    Ok(())
}

fn detect(cli: &Cli, args: &DetectArgs) -> Result<()> {
    let config = pipeline_config(cli)?;
    let table = artifacts::read_table(&args.joint)?;
    let column = |name: &str| {
        table
            .column(name)
            .ok_or_else(|| config_err(format!("joint file lacks `{name}`")))
    };
    let meta_path = args.joint.with_file_name("joint_meta.json");
    let meta: Option<JointMeta> = if meta_path.exists() {
        Some(read_json(&meta_path)?)
    } else {
        None
    };
    let jrd = JointRankDensity {
        rank_a: column("rank_a")?,
        rank_b: column("rank_b")?,
        density: column("density")?,
        z_score: column("z")?,
        case_ids: table.ids.clone(),
        grid: Vec::new(),
        grid_size: meta.map_or(config.grid_size, |m| m.grid_size),
        bandwidth: meta.map_or(f64::NAN, |m| m.bandwidth),
        density_mean: meta.map_or(f64::NAN, |m| m.density_mean),
        density_std: meta.map_or(f64::NAN, |m| m.density_std),
    };
    let options = DetectOptions {
        threshold: args.threshold.unwrap_or(config.threshold),
        quadrant_filter: args.quadrant_filter.or(config.quadrant_filter),
        two_sided: args.two_sided || config.two_sided,
    };
    let report = core(Stage::S5, detect_anomalies(&jrd, &options))?;
    let dir = out_dir(&cli.out, Path::new("."))?;
    artifacts::write_report(&dir.join("report.json"), &report)?;
    println!("{} of {} cases flagged", report.counts.flagged, report.counts.total_cases);
    Ok(())
}

fn pipeline(cli: &Cli, args: &PipelineArgs) -> Result<()> {
    let mut c = pipeline_config(cli)?;
    if let Some(v) = &args.events {
        c.event_input = Some(v.clone());
    }
    if let Some(v) = &args.consumption {
        c.consumption_input = Some(v.clone());
    }
    if let Some(v) = &cli.out {
        c.output_dir = v.clone();
    }
    if let Some(v) = cli.seed {
        c.partition.seed = v;
    }
    c.window.start = args.start.or(c.window.start);
    c.window.end = args.end.or(c.window.end);
    c.threshold = args.threshold.unwrap_or(c.threshold);
    c.bandwidth = args.bandwidth.or(c.bandwidth);
    c.grid_size = args.grid_size.unwrap_or(c.grid_size);
    c.quadrant_filter = args.quadrant_filter.or(c.quadrant_filter);
    c.two_sided |= args.two_sided;
    c.strategy = args.strategy.unwrap_or(c.strategy);
    if let Some(m) = args.mode {
        c.partition.mode = match m {
            Mode::ByType => PartitionMode::ByType,
            Mode::Random => PartitionMode::Random,
        };
    }
    c.partition.part_count = args.parts.unwrap_or(c.partition.part_count);
    c.partition.repetitions = args.repetitions.unwrap_or(c.partition.repetitions);
    let report = rankjoint::run_pipeline(&c)?;
    println!(
        "{} of {} cases flagged; artifacts in {}",
        report.counts.flagged,
        report.counts.total_cases,
        c.output_dir.display()
    );
    Ok(())
}

fn run_bench(cli: &Cli, args: &BenchArgs) -> Result<()> {
    let mut config: BenchConfig = match &cli.config {
        Some(p) => read_json(p)?,
        None => BenchConfig::default(),
    };
    if let Some(v) = &args.sizes {
        config.sizes = v.clone();
    }
    config.cols = args.cols.unwrap_or(config.cols);
    config.repeats = args.repeats.unwrap_or(config.repeats);
    config.seed = cli.seed.unwrap_or(config.seed);
    if let Some(mb) = args.memory_cap_mb {
        config.memory_cap_bytes = mb << 20;
    }
    let results = bench(&config)?;
    let dir = out_dir(&cli.out, Path::new("."))?;
    let path = dir.join("bench.csv");
    write_bench_csv(&path, &results)?;
    println!("{:<16} {:>8} {:>14} {:>12}", "strategy", "rows", "median_s", "residual");
    for r in &results {
        println!(
            "{:<16} {:>8} {:>14} {:>12}",
            r.strategy.as_str(),
            r.rows,
            r.median_seconds.map_or(r.status.as_str().to_owned(), |m| format!("{m:.6}")),
            r.residual.map_or(String::from("-"), |x| format!("{x:.1e}"))
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(a) => synth(&cli, a),
        Command::CodeEvents(a) => code(&cli, a, true),
        Command::CodeConsumption(a) => code(&cli, a, false),
        Command::Ordinate(a) => ordinate(&cli, a),
        Command::Distances(a) => distances(&cli, a),
        Command::Joint(a) => joint(&cli, a),
        Command::Detect(a) => detect(&cli, a),
        Command::Pipeline(a) => pipeline(&cli, a),
        Command::Bench(a) => run_bench(&cli, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
