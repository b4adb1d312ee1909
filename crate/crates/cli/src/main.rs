//! Command-line harness: train a model, run the symbolic search or the
//! random baseline against it, and emit reports.
//!
//! Exit codes: 0 = run completed, 1 = usage or data error, 2 = the model
//! process misbehaved (protocol violation, timeout, or early exit).

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use fairtest_core::baseline::random_baseline;
use fairtest_core::model::{train_logistic, ExternalModel, ExternalModelConfig};
use fairtest_core::report::{emit_report, ReportFormat};
use fairtest_core::search::{self, SeedOrder, SeedSource};
use fairtest_core::synth::synth_biased_dataset;
use fairtest_core::tabular::load_csv;
use fairtest_core::{
    Dataset, Error, FeatureSchema, LogisticModel, PredictionModel, RunReport, SearchConfig,
};

#[derive(Parser)]
#[command(
    name = "fairtest-sym",
    version,
    about = "Generates test inputs that expose individual discrimination in binary classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit the built-in logistic regression on a CSV and save it as JSON.
    Train(TrainArgs),
    /// Run the symbolic search against a model.
    Generate(RunArgs),
    /// Run the random-generation baseline against a model.
    Baseline(BaselineArgs),
    /// Run both the symbolic search and the baseline, merged into one report.
    Compare(RunArgs),
    /// Emit a synthetic biased dataset (CSV plus schema sidecar).
    Synth(SynthArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Training CSV (header row, final label column).
    #[arg(long)]
    data: PathBuf,
    /// Schema sidecar JSON.
    #[arg(long)]
    schema: PathBuf,
    /// Where to write the model JSON.
    #[arg(long)]
    out: PathBuf,
    /// L2 regularization strength.
    #[arg(long, default_value_t = 1.0)]
    l2: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct ModelArgs {
    /// Saved logistic model JSON.
    #[arg(long, conflicts_with = "model_cmd")]
    model: Option<PathBuf>,
    /// Command line serving the line-delimited JSON model protocol.
    #[arg(long)]
    model_cmd: Option<String>,
    /// Reply timeout for an external model, in milliseconds.
    #[arg(long, default_value_t = 10_000)]
    model_timeout_ms: u64,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format: json, csv, or text.
    #[arg(long, default_value = "json")]
    format: ReportFormat,
}

#[derive(Args)]
struct RunArgs {
    /// Training CSV; seeds come from here.
    #[arg(long)]
    data: PathBuf,
    /// Schema sidecar JSON.
    #[arg(long)]
    schema: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Run file (JSON or TOML) with base settings; explicit flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Main-loop iteration budget.
    #[arg(long)]
    limit: Option<usize>,
    /// Undirected walks stop below this confidence.
    #[arg(long)]
    t1: Option<f64>,
    /// Directed expansion toggles only below this confidence.
    #[arg(long)]
    t2: Option<f64>,
    /// Seed clustering: number of k-means clusters.
    #[arg(long)]
    clusters: Option<usize>,
    /// RNG seed for the whole run.
    #[arg(long)]
    rng: Option<u64>,
    /// Ablation: disable directed expansion after hits.
    #[arg(long)]
    no_directed: bool,
    /// Ablation: disable undirected prefix toggling.
    #[arg(long)]
    no_undirected: bool,
    /// Seed ordering across clusters: roundrobin or iterative.
    #[arg(long)]
    seed_order: Option<SeedOrder>,
    /// Where seeds come from: training or random.
    #[arg(long)]
    seed_source: Option<SeedSource>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct BaselineArgs {
    /// Schema sidecar JSON describing the input space.
    #[arg(long)]
    schema: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Unique tests to generate.
    #[arg(long, default_value_t = 1000)]
    limit: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 42)]
    rng: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// Bias strength in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Number of rows (at least 100).
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 42)]
    rng: u64,
    /// Dataset CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Schema sidecar path; defaults to <out>.schema.json.
    #[arg(long)]
    schema_out: Option<PathBuf>,
}

enum Model {
    Builtin(LogisticModel),
    External(ExternalModel),
}

impl Model {
    fn open(args: &ModelArgs) -> anyhow::Result<Model> {
        match (&args.model, &args.model_cmd) {
            (Some(path), None) => Ok(Model::Builtin(
                LogisticModel::load(path).with_context(|| format!("loading model {path:?}"))?,
            )),
            (None, Some(cmd)) => Ok(Model::External(ExternalModel::spawn(&ExternalModelConfig {
                command: cmd.clone(),
                timeout_ms: args.model_timeout_ms,
            })?)),
            _ => anyhow::bail!("exactly one of --model or --model-cmd is required"),
        }
    }

    fn as_dyn(&self) -> &dyn PredictionModel {
        match self {
            Model::Builtin(m) => m,
            Model::External(m) => m,
        }
    }
}

fn build_config(args: &RunArgs) -> anyhow::Result<SearchConfig> {
    let mut cfg = match &args.config {
        Some(path) => SearchConfig::from_file(path)
            .with_context(|| format!("loading run file {path:?}"))?,
        None => SearchConfig::default(),
    };
    if let Some(v) = args.limit {
        cfg.limit = v;
    }
    if let Some(v) = args.t1 {
        cfg.t1 = v;
    }
    if let Some(v) = args.t2 {
        cfg.t2 = v;
    }
    if let Some(v) = args.clusters {
        cfg.num_clusters = v;
    }
    if let Some(v) = args.rng {
        cfg.rng_seed = v;
    }
    if args.no_directed {
        cfg.directed = false;
    }
    if args.no_undirected {
        cfg.undirected = false;
    }
    if let Some(v) = args.seed_order {
        cfg.seed_order = v;
    }
    if let Some(v) = args.seed_source {
        cfg.seed_source = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_report(report: &RunReport, output: &OutputArgs) -> anyhow::Result<()> {
    let rendered = emit_report(report, output.format)?;
    match &output.out {
        Some(path) => std::fs::write(path, rendered)
            .with_context(|| format!("writing report to {path:?}"))?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn load_data(args: &RunArgs) -> anyhow::Result<Dataset> {
    load_csv(&args.data, &args.schema)
        .with_context(|| format!("loading {:?} with schema {:?}", args.data, args.schema))
}

fn cmd_train(args: &TrainArgs) -> anyhow::Result<()> {
    let data = load_csv(&args.data, &args.schema)?;
    let model = train_logistic(&data, args.l2, args.max_iter, args.tol)?;
    model.save(&args.out)?;
    log::info!("trained on {} rows, saved to {:?}", data.len(), args.out);
    Ok(())
}

fn cmd_generate(args: &RunArgs) -> anyhow::Result<()> {
    let data = load_data(args)?;
    let cfg = build_config(args)?;
    let model = Model::open(&args.model)?;
    let started = Instant::now();
    let mut report = search::run(model.as_dyn(), &data, &cfg)?;
    report.duration_ms = Some(started.elapsed().as_millis() as u64);
    log::info!(
        "generated {} unique tests, {} discriminatory",
        report.total_generated(),
        report.total_discriminatory()
    );
    write_report(&report, &args.output)
}

fn cmd_baseline(args: &BaselineArgs) -> anyhow::Result<()> {
    let schema = FeatureSchema::load(&args.schema)?;
    let model = Model::open(&args.model)?;
    let started = Instant::now();
    let mut report = random_baseline(model.as_dyn(), &schema, args.limit, args.rng)?;
    report.duration_ms = Some(started.elapsed().as_millis() as u64);
    write_report(&report, &args.output)
}

fn cmd_compare(args: &RunArgs) -> anyhow::Result<()> {
    let data = load_data(args)?;
    let cfg = build_config(args)?;
    let model = Model::open(&args.model)?;
    let started = Instant::now();
    let symbolic = search::run(model.as_dyn(), &data, &cfg)?;
    let random = random_baseline(model.as_dyn(), &data.schema, cfg.limit, cfg.rng_seed)?;
    let mut merged = symbolic.merged(&random);
    merged.duration_ms = Some(started.elapsed().as_millis() as u64);
    write_report(&merged, &args.output)
}

fn cmd_synth(args: &SynthArgs) -> anyhow::Result<()> {
    let data = synth_biased_dataset(args.beta, args.n, args.rng);
    data.save_csv(&args.out)?;
    let schema_path = args
        .schema_out
        .clone()
        .unwrap_or_else(|| schema_sidecar_path(&args.out));
    std::fs::write(&schema_path, data.schema.to_json())?;
    log::info!("wrote {} rows to {:?}, schema to {schema_path:?}", data.len(), args.out);
    Ok(())
}

fn schema_sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".schema.json");
    out.with_file_name(name)
}

/// Protocol failures get their own exit code so scripted runs can tell a
/// broken model apart from a broken invocation.
fn exit_code_for(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(Error::Protocol(_) | Error::Timeout(_) | Error::ChildExited) => 2,
        _ => 1,
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("FAIRTEST_LOG")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not usage errors.
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match &cli.command {
        Cmd::Train(args) => cmd_train(args),
        Cmd::Generate(args) => cmd_generate(args),
        Cmd::Baseline(args) => cmd_baseline(args),
        Cmd::Compare(args) => cmd_compare(args),
        Cmd::Synth(args) => cmd_synth(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code_for(&err));
    }
}
