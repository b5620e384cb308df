//! Command-line front end: ingestion, index building, trend profiles, bias
//! reports and synthetic data, wired end to end by `pipeline`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use repindex_core::bias::{analyze, AnalysisConfig, BiasReport, Sweep};
use repindex_core::index::{average_entities, build_all, AggregatorSpec};
use repindex_core::ingest::{
    parse_opinions_jsonl, read_series_csv, write_rejections_jsonl, write_scores_csv, LineRejection,
    NativeRange,
};
use repindex_core::model::ReputationSeries;
use repindex_core::report::{self, file_stem};
use repindex_core::synth::{generate, SynthSpec};
use repindex_core::trend;

pub const REJECTIONS_FILE: &str = "opinions.rejections.jsonl";
pub const TABLE1_FILE: &str = "table1.csv";
pub const TABLE2_FILE: &str = "table2.csv";
pub const PER_W_FILE: &str = "per_w.csv";
pub const REPORT_FILE: &str = "report.json";
pub const GROUND_TRUTH_FILE: &str = "synth_ground_truth.json";
pub const SYNTH_FULL_FILE: &str = "synth_full.csv";
pub const SYNTH_SUPPRESSED_FILE: &str = "synth_suppressed.csv";

pub fn index_file(entity: &str) -> String {
    format!("index_{}.csv", file_stem(entity))
}

pub fn cumulative_file(entity: &str) -> String {
    format!("cumulative_{}.csv", file_stem(entity))
}

#[derive(Parser, Debug)]
#[command(name = "repindex", version, about = "Reputation index and missing-positive-sentiment analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate an opinion feed (JSONL) or scale a score file (CSV)
    Ingest(StageArgs),
    /// Build daily reputation series and the cross-entity composite
    Index(StageArgs),
    /// Write cumulative profiles and classify their trend
    Trend(StageArgs),
    /// Skewness, band ratios and missing-sentiment percentage per entity
    Bias(StageArgs),
    /// Generate a synthetic series with suppressed mild positives
    Synth(SynthArgs),
    /// ingest, index, trend and bias in one run
    Pipeline(StageArgs),
}

#[derive(Args, Debug, Clone)]
pub struct StageArgs {
    /// Input file(s): `.jsonl` opinion feed or `.csv` score series
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Lower end of the native score range of CSV inputs
    #[arg(long, requires = "native_max")]
    pub native_min: Option<f64>,
    /// Upper end of the native score range of CSV inputs
    #[arg(long, requires = "native_min")]
    pub native_max: Option<f64>,
    /// Band semi-widths in percent of range: `start:end:step` or `a,b,c`
    #[arg(long, default_value = "2.5:16.5:1.0")]
    pub sweep: String,
    #[arg(long, default_value_t = 0.0)]
    pub slope_epsilon: f64,
    /// Entity name of the composite series
    #[arg(long, default_value = "All")]
    pub composite_label: String,
}

#[derive(Args, Debug, Clone)]
pub struct SynthArgs {
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 730)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub mean: f64,
    #[arg(long, default_value_t = 0.3)]
    pub sd: f64,
    #[arg(long, default_value_t = 0.0)]
    pub suppress_fraction: f64,
    /// Deletion band semi-width, percent of range
    #[arg(long, default_value_t = 16.5)]
    pub suppress_band: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Index,
    Trend,
    Bias,
    Synth,
    Pipeline,
}

/// Validated settings for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub stage: Stage,
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub native: Option<NativeRange>,
    pub analysis: AnalysisConfig,
    pub composite_label: String,
    pub synth: SynthSpec,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<RunConfig> {
        let (stage, args) = match cli.command {
            Command::Synth(s) => {
                let synth = SynthSpec {
                    n: s.n,
                    mean: s.mean,
                    sd: s.sd,
                    seed: s.seed,
                    suppress_fraction: s.suppress_fraction,
                    suppress_band_pct: s.suppress_band,
                };
                synth.validate()?;
                return Ok(RunConfig {
                    stage: Stage::Synth,
                    inputs: Vec::new(),
                    out_dir: s.out_dir,
                    native: None,
                    analysis: AnalysisConfig::default(),
                    composite_label: "All".into(),
                    synth,
                });
            }
            Command::Ingest(a) => (Stage::Ingest, a),
            Command::Index(a) => (Stage::Index, a),
            Command::Trend(a) => (Stage::Trend, a),
            Command::Bias(a) => (Stage::Bias, a),
            Command::Pipeline(a) => (Stage::Pipeline, a),
        };
        let native = match (args.native_min, args.native_max) {
            (Some(lo), Some(hi)) => Some(NativeRange::new(lo, hi)?),
            _ => None,
        };
        let sweep: Sweep = args.sweep.parse().context("parsing --sweep")?;
        ensure!(
            args.slope_epsilon >= 0.0,
            "--slope-epsilon must be non-negative, got {}",
            args.slope_epsilon
        );
        ensure!(!args.composite_label.is_empty(), "--composite-label must not be empty");
        Ok(RunConfig {
            stage,
            inputs: args.input,
            out_dir: args.out_dir,
            native,
            analysis: AnalysisConfig {
                sweep,
                slope_epsilon: args.slope_epsilon,
            },
            composite_label: args.composite_label,
            synth: SynthSpec::default(),
        })
    }
}

/// What a run produced.
#[derive(Debug, Default)]
pub struct RunSummary {
    pub written: Vec<PathBuf>,
    pub rejected_lines: usize,
    pub accepted_opinions: usize,
    pub reports: Vec<BiasReport>,
    pub trends: Vec<(String, trend::Trend)>,
}

/// Write `path` through a temporary file in the same directory, then rename.
fn write_atomic(
    path: &Path,
    summary: &mut RunSummary,
    body: impl FnOnce(&mut BufWriter<&mut File>) -> std::io::Result<()>,
) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        body(&mut w).with_context(|| format!("writing {}", path.display()))?;
        w.flush()?;
    }
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    summary.written.push(path.to_path_buf());
    Ok(())
}

fn is_jsonl(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("jsonl" | "ndjson" | "json")
    )
}

/// Series loaded from all inputs, keyed by entity.
struct Loaded {
    series: BTreeMap<String, ReputationSeries>,
    rejections: Vec<LineRejection>,
    accepted: usize,
    csv_entities: Vec<String>,
}

fn load_inputs(config: &RunConfig) -> Result<Loaded> {
    let jsonl_count = config.inputs.iter().filter(|p| is_jsonl(p)).count();
    ensure!(jsonl_count <= 1, "at most one JSONL opinion feed per run, got {jsonl_count}");

    let mut loaded = Loaded {
        series: BTreeMap::new(),
        rejections: Vec::new(),
        accepted: 0,
        csv_entities: Vec::new(),
    };
    for path in &config.inputs {
        let file = File::open(path).with_context(|| format!("opening input {}", path.display()))?;
        let found: Vec<ReputationSeries> = if is_jsonl(path) {
            let (opinions, rejections) = parse_opinions_jsonl(BufReader::new(file))
                .with_context(|| format!("ingest: reading {}", path.display()))?;
            loaded.accepted += opinions.len();
            loaded.rejections = rejections;
            build_all(&opinions, AggregatorSpec::default())
                .context("index: aggregating opinions")?
                .into_values()
                .collect()
        } else {
            let series = read_series_csv(BufReader::new(file), config.native)
                .with_context(|| format!("ingest: reading {}", path.display()))?;
            loaded
                .csv_entities
                .extend(series.iter().map(|s| s.target().to_owned()));
            series
        };
        for s in found {
            if loaded.series.contains_key(s.target()) {
                bail!("entity {:?} appears in more than one input", s.target());
            }
            loaded.series.insert(s.target().to_owned(), s);
        }
    }
    Ok(loaded)
}

fn add_composite(config: &RunConfig, series: &mut BTreeMap<String, ReputationSeries>) -> Result<()> {
    if series.len() < 2 {
        return Ok(());
    }
    ensure!(
        !series.contains_key(&config.composite_label),
        "composite label {:?} collides with an entity name",
        config.composite_label
    );
    let all: Vec<ReputationSeries> = series.values().cloned().collect();
    let composite = average_entities(&all, &config.composite_label).context("index: averaging entities")?;
    series.insert(config.composite_label.clone(), composite);
    Ok(())
}

fn write_index_files(config: &RunConfig, series: &BTreeMap<String, ReputationSeries>, summary: &mut RunSummary) -> Result<()> {
    for (entity, s) in series {
        write_atomic(&config.out_dir.join(index_file(entity)), summary, |w| {
            report::write_index_csv(w, s)
        })?;
    }
    Ok(())
}

fn write_trend_files(config: &RunConfig, series: &BTreeMap<String, ReputationSeries>, summary: &mut RunSummary) -> Result<()> {
    for (entity, s) in series {
        let (profile, outcome) = trend::profile(s, config.analysis.slope_epsilon);
        write_atomic(&config.out_dir.join(cumulative_file(entity)), summary, |w| {
            profile.write_csv(w)
        })?;
        summary.trends.push((entity.clone(), outcome.trend));
    }
    Ok(())
}

fn write_bias_files(config: &RunConfig, series: &BTreeMap<String, ReputationSeries>, summary: &mut RunSummary) -> Result<()> {
    let reports = series
        .iter()
        .map(|(entity, s)| analyze(s, &config.analysis).with_context(|| format!("bias: analyzing {entity:?}")))
        .collect::<Result<Vec<_>>>()?;
    let dir = &config.out_dir;
    write_atomic(&dir.join(TABLE1_FILE), summary, |w| report::write_table1(w, &reports))?;
    write_atomic(&dir.join(TABLE2_FILE), summary, |w| report::write_table2(w, &reports))?;
    write_atomic(&dir.join(PER_W_FILE), summary, |w| report::write_per_w(w, &reports))?;
    write_atomic(&dir.join(REPORT_FILE), summary, |w| report::write_report_json(w, &reports))?;
    summary.reports = reports;
    Ok(())
}

fn write_rejections(config: &RunConfig, loaded: &Loaded, summary: &mut RunSummary) -> Result<()> {
    summary.rejected_lines = loaded.rejections.len();
    summary.accepted_opinions = loaded.accepted;
    if config.inputs.iter().any(|p| is_jsonl(p)) {
        write_atomic(&config.out_dir.join(REJECTIONS_FILE), summary, |w| {
            write_rejections_jsonl(w, &loaded.rejections)
        })?;
    }
    Ok(())
}

/// Execute one stage. Rejected feed lines are reported in the summary and the
/// rejections file but are not errors.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    fs::create_dir_all(&config.out_dir)
        .with_context(|| format!("creating output directory {}", config.out_dir.display()))?;
    let mut summary = RunSummary::default();

    if config.stage == Stage::Synth {
        let out = generate(&config.synth).context("synth")?;
        let dir = &config.out_dir;
        write_atomic(&dir.join(SYNTH_FULL_FILE), &mut summary, |w| {
            write_scores_csv(w, std::slice::from_ref(&out.full)).map_err(std::io::Error::other)
        })?;
        write_atomic(&dir.join(SYNTH_SUPPRESSED_FILE), &mut summary, |w| {
            write_scores_csv(w, std::slice::from_ref(&out.suppressed)).map_err(std::io::Error::other)
        })?;
        write_atomic(&dir.join(GROUND_TRUTH_FILE), &mut summary, |w| {
            serde_json::to_writer_pretty(&mut *w, &out.ground_truth)?;
            w.write_all(b"\n")
        })?;
        return Ok(summary);
    }

    let mut loaded = load_inputs(config)?;
    match config.stage {
        Stage::Ingest => {
            write_rejections(config, &loaded, &mut summary)?;
            // scaled CSV series are re-emitted in index form
            let csv_only: BTreeMap<_, _> = loaded
                .series
                .into_iter()
                .filter(|(entity, _)| loaded.csv_entities.contains(entity))
                .collect();
            write_index_files(config, &csv_only, &mut summary)?;
        }
        Stage::Index => {
            summary.rejected_lines = loaded.rejections.len();
            summary.accepted_opinions = loaded.accepted;
            add_composite(config, &mut loaded.series)?;
            write_index_files(config, &loaded.series, &mut summary)?;
        }
        Stage::Trend => write_trend_files(config, &loaded.series, &mut summary)?,
        Stage::Bias => write_bias_files(config, &loaded.series, &mut summary)?,
        Stage::Pipeline => {
            write_rejections(config, &loaded, &mut summary)?;
            add_composite(config, &mut loaded.series)?;
            write_index_files(config, &loaded.series, &mut summary)?;
            write_trend_files(config, &loaded.series, &mut summary)?;
            write_bias_files(config, &loaded.series, &mut summary)?;
        }
        Stage::Synth => unreachable!("handled above"),
    }
    Ok(summary)
}
