//! `spoofbench`: enumerate a replicator landscape, train the classifier,
//! run spoofing campaigns, and emit the analysis reports — individually or
//! as one reproducible pipeline.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use clap::{Args, Parser, Subcommand};
use spoofbench_core::analysis::{analyze_campaign, emit_report, LandscapeInfo};
use spoofbench_core::landscape::{
    enumerate_landscape, load_replicators, program_space_size, EnumerationMeta, MiniRepConfig,
};
use spoofbench_core::neural::{load_model, save_model, MlpModel, TrainerState};
use spoofbench_core::pipeline::{reproduce, ExperimentConfig, MetricsFile};
use spoofbench_core::seq::{derive_seed, Alphabet, RngState, SeedDomain};
use spoofbench_core::spoof::{load_trajectories, run_campaign, save_trajectories, SpoofConfig};
use spoofbench_core::training::{build_splits, evaluate, load_splits, save_splits, SplitName};
use spoofbench_core::{Error, LOG_FORMAT_VERSION, MODEL_FORMAT_VERSION, VM_SEMANTICS_VERSION};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "spoofbench", version, about = "Replicator-classifier spoofing benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustively enumerate a MiniRep VM landscape to a list file.
    Enumerate(EnumerateArgs),
    /// Train the classifier on a replicator list file.
    Train(TrainArgs),
    /// Evaluate a trained model on persisted splits.
    Eval(EvalArgs),
    /// Run a spoofing campaign against a trained model.
    Spoof(SpoofArgs),
    /// Aggregate a campaign log into CSV tables and SVG charts.
    Analyze(AnalyzeArgs),
    /// Run the whole pipeline from one config: landscape, splits, training,
    /// evaluation, campaign, verification, analysis, manifest.
    Reproduce(ReproduceArgs),
    /// Print the semantics/format version tags.
    Info(InfoArgs),
}

#[derive(Args)]
struct EnumerateArgs {
    /// VM alphabet size (2..=8)
    #[arg(short = 'k', long)]
    k: usize,
    /// Program length
    #[arg(long)]
    len: usize,
    /// Step budget per program
    #[arg(long, default_value_t = 100)]
    budget: u32,
    /// Output list file; metadata goes to <out>.meta.json
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (defaults to all cores)
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    /// Replicator list file (ground truth)
    #[arg(long)]
    landscape: PathBuf,
    /// Master seed for splits, init, and shuffling
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_model: PathBuf,
    #[arg(long)]
    out_metrics: PathBuf,
    /// Also persist the dataset splits to this directory
    #[arg(long)]
    out_splits: Option<PathBuf>,
    #[arg(long, default_value_t = 26)]
    alphabet_size: usize,
    #[arg(long, default_value_t = 9)]
    length: usize,
    #[arg(long, default_value_t = 32)]
    embed_dim: usize,
    #[arg(long, default_value_t = 512)]
    hidden1: usize,
    #[arg(long, default_value_t = 256)]
    hidden2: usize,
    #[arg(long, default_value_t = 0.1)]
    dropout: f64,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 8192)]
    batch_size: usize,
    #[arg(long, default_value_t = 2e-3)]
    learning_rate: f64,
    #[arg(long, default_value_t = 1e-4)]
    weight_decay: f64,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Directory written by `train --out-splits` or `reproduce`
    #[arg(long)]
    splits: PathBuf,
    /// Which split to score
    #[arg(long, default_value = "test")]
    split: String,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Write metrics JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpoofArgs {
    #[arg(long)]
    model: PathBuf,
    /// Replicator list file (for random-start rejection and verification)
    #[arg(long)]
    landscape: PathBuf,
    #[arg(long, default_value_t = 300)]
    budget: u32,
    #[arg(long, default_value_t = 30)]
    replicates: u32,
    #[arg(long)]
    seed: u64,
    /// Output directory for trajectories.jsonl
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Directory containing trajectories.jsonl
    #[arg(long)]
    runs: PathBuf,
    #[arg(long)]
    landscape: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// metrics.json from training, to include the loss/accuracy curves
    #[arg(long)]
    metrics: Option<PathBuf>,
    #[arg(long, default_value_t = 26)]
    alphabet_size: usize,
    #[arg(long, default_value_t = 9)]
    length: usize,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Experiment config (TOML); see README for the schema
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in config: "micro" (seconds) or "paper" (full scale)
    #[arg(long)]
    preset: Option<String>,
    /// Override the config's master seed
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "spoofbench-out")]
    out: PathBuf,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct InfoArgs {
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with exit 0
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            if e.is_numerical() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn with_jobs<T>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

fn run(cli: Cli) -> spoofbench_core::Result<()> {
    match cli.command {
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Spoof(args) => cmd_spoof(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Reproduce(args) => cmd_reproduce(args),
        Command::Info(args) => cmd_info(args),
    }
}

fn cmd_enumerate(args: EnumerateArgs) -> spoofbench_core::Result<()> {
    let config = MiniRepConfig::new(args.k, args.len, args.budget);
    let space = program_space_size(&config)?;
    let started = std::time::Instant::now();
    let set = with_jobs(args.jobs, || enumerate_landscape(&config))?;
    let wall_time_secs = started.elapsed().as_secs_f64();
    set.save(&args.out)?;
    let meta = EnumerationMeta {
        count: set.count(),
        space,
        fraction: set.fraction(),
        semantics_version: config.semantics_version.clone(),
        config,
        wall_time_secs,
    };
    let meta_path = args.out.with_extension("meta.json");
    let json =
        serde_json::to_string_pretty(&meta).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    std::fs::write(&meta_path, json + "\n")
        .map_err(|e| Error::io(meta_path.display().to_string(), e))?;
    println!(
        "enumerated {} programs: {} viable ({:.3e} of the space) in {:.1}s",
        space,
        set.count(),
        set.fraction(),
        wall_time_secs
    );
    println!("list: {}", args.out.display());
    println!("meta: {}", meta_path.display());
    Ok(())
}

fn cmd_train(args: TrainArgs) -> spoofbench_core::Result<()> {
    let alphabet = Alphabet::lowercase_prefix(args.alphabet_size)?;
    let set = load_replicators(&args.landscape, &alphabet, args.length)?;
    let splits = build_splits(
        &set,
        &mut RngState::new(derive_seed(args.seed, SeedDomain::Splits, 0)),
    )?;
    if let Some(dir) = &args.out_splits {
        save_splits(&splits, &set, dir)?;
    }
    let config = spoofbench_core::neural::MlpConfig {
        alphabet_size: args.alphabet_size,
        seq_len: args.length,
        embed_dim: args.embed_dim,
        hidden1: args.hidden1,
        hidden2: args.hidden2,
        dropout: args.dropout,
    };
    let mut model = MlpModel::init(config.clone(), derive_seed(args.seed, SeedDomain::ModelInit, 0))?;
    let mut trainer = TrainerState::new(
        &config,
        spoofbench_core::neural::AdamWParams {
            learning_rate: args.learning_rate,
            weight_decay: args.weight_decay,
            ..Default::default()
        },
    );
    let curves = spoofbench_core::training::train_model(
        &mut model,
        &splits,
        &mut trainer,
        &mut RngState::new(derive_seed(args.seed, SeedDomain::Training, 0)),
        spoofbench_core::training::TrainSettings {
            epochs: args.epochs,
            batch_size: args.batch_size,
        },
    )?;
    let test = evaluate(&model, &splits.test, 0.5)?;
    save_model(&model, &args.out_model)?;
    let curves_path = args
        .out_metrics
        .parent()
        .unwrap_or_else(|| std::path::Path::new("."))
        .join("curves.csv");
    std::fs::write(&curves_path, spoofbench_core::analysis::curves_csv(&curves))
        .map_err(|e| Error::io(curves_path.display().to_string(), e))?;
    let metrics = MetricsFile {
        test: test.clone(),
        curves,
    };
    let json =
        serde_json::to_string_pretty(&metrics).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    std::fs::write(&args.out_metrics, json + "\n")
        .map_err(|e| Error::io(args.out_metrics.display().to_string(), e))?;
    println!(
        "trained on {} examples: test accuracy {:.4}, recall {:.4}, BCE {:.5}",
        splits.train.len(),
        test.accuracy,
        test.recall,
        test.mean_bce
    );
    println!("model: {}", args.out_model.display());
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> spoofbench_core::Result<()> {
    let model = load_model(&args.model)?;
    let alphabet = Alphabet::lowercase_prefix(model.config.alphabet_size)?;
    let splits = load_splits(&args.splits, &alphabet, model.config.seq_len)?;
    let which: SplitName = args.split.parse()?;
    let metrics = evaluate(&model, splits.split(which), args.threshold)?;
    let json =
        serde_json::to_string_pretty(&metrics).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, json + "\n")
                .map_err(|e| Error::io(path.display().to_string(), e))?;
            println!("metrics: {}", path.display());
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_spoof(args: SpoofArgs) -> spoofbench_core::Result<()> {
    let model = load_model(&args.model)?;
    let alphabet = Alphabet::lowercase_prefix(model.config.alphabet_size)?;
    let set = load_replicators(&args.landscape, &alphabet, model.config.seq_len)?;
    let config = SpoofConfig {
        query_budget: args.budget,
        replicates: args.replicates,
    };
    let trajectories = with_jobs(args.jobs, || run_campaign(&model, &set, &config, args.seed))?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| Error::io(args.out.display().to_string(), e))?;
    let log_path = args.out.join("trajectories.jsonl");
    save_trajectories(&trajectories, set.alphabet(), &log_path)?;
    let reached: usize = trajectories
        .iter()
        .filter(|t| t.final_confidence >= 0.999)
        .count();
    println!(
        "{} runs ({} queries each): {} reached confidence >= 0.999",
        trajectories.len(),
        args.budget,
        reached
    );
    println!("log: {}", log_path.display());
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> spoofbench_core::Result<()> {
    let alphabet = Alphabet::lowercase_prefix(args.alphabet_size)?;
    let set = load_replicators(&args.landscape, &alphabet, args.length)?;
    let log_path = args.runs.join("trajectories.jsonl");
    let trajectories = load_trajectories(&log_path, set.alphabet())?;
    let metrics: Option<MetricsFile> = match &args.metrics {
        Some(path) => Some(
            serde_json::from_str(
                &std::fs::read_to_string(path)
                    .map_err(|e| Error::io(path.display().to_string(), e))?,
            )
            .map_err(|e| Error::ConfigParse(e.to_string()))?,
        ),
        None => None,
    };
    let landscape_info = LandscapeInfo::new("file", false, &set);
    let report = analyze_campaign(
        &trajectories,
        &set,
        landscape_info,
        metrics.as_ref().map(|m| m.curves.clone()),
        metrics.map(|m| m.test),
    )?;
    let files = emit_report(&report, &args.out)?;
    println!("wrote {} report files to {}", files.len(), args.out.display());
    Ok(())
}

fn cmd_reproduce(args: ReproduceArgs) -> spoofbench_core::Result<()> {
    let mut config = match (&args.config, args.preset.as_deref()) {
        (Some(path), None) => ExperimentConfig::load(path)?,
        (None, Some("micro")) => ExperimentConfig::micro(20_260_810),
        (None, Some("paper")) => ExperimentConfig::paper(20_260_810),
        (None, Some(other)) => {
            return Err(Error::InvalidConfig(format!(
                "unknown preset {other:?}; use micro or paper"
            )))
        }
        (None, None) => {
            return Err(Error::InvalidConfig(
                "reproduce needs --config <path> or --preset micro|paper".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let outputs = with_jobs(args.jobs, || reproduce(&config, &args.out))?;
    let summary = &outputs.report;
    println!(
        "landscape: {} members ({}; fraction {:.3e})",
        summary.landscape.count, summary.landscape.source, summary.landscape.fraction
    );
    println!(
        "test accuracy {:.4}, recall {:.4}",
        outputs.test_metrics.accuracy, outputs.test_metrics.recall
    );
    println!(
        "campaign: {} runs, {} endpoints verified as true replicators, false-attractor rate {:.4}",
        summary.verification.total,
        summary.verification.replicator_endpoints,
        summary.verification.false_attractor_rate
    );
    println!("outputs: {}", outputs.out_dir.display());
    println!("manifest: {}", outputs.out_dir.join("manifest.json").display());
    Ok(())
}

fn cmd_info(args: InfoArgs) -> spoofbench_core::Result<()> {
    if args.json {
        let tags = serde_json::json!({
            "vm_semantics": VM_SEMANTICS_VERSION,
            "model_format": MODEL_FORMAT_VERSION,
            "log_format": LOG_FORMAT_VERSION,
        });
        println!("{}", serde_json::to_string_pretty(&tags).unwrap());
    } else {
        println!("vm semantics:  {VM_SEMANTICS_VERSION}");
        println!("model format:  {MODEL_FORMAT_VERSION}");
        println!("log format:    {LOG_FORMAT_VERSION}");
    }
    Ok(())
}
