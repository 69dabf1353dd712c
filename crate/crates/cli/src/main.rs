//! `qlock` command line: run a single experiment from a JSON config (with
//! flag overrides) or sweep a directory of configs into a CSV table.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qlock_cli::config::{ExperimentConfig, ExperimentKind, SubsetKind};
use qlock_cli::{runner, sweep, CliError};
use qlock_core::randomness::Seed;

#[derive(Parser)]
#[command(name = "qlock", version, about = "Uncertainty, locking and embedding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write a JSON report.
    Run(RunArgs),
    /// Run every config in a directory and write a CSV table.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    d_a: Option<usize>,
    #[arg(long)]
    d_b: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Seed value; the stream id stays 0 unless the config file sets it.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    subset: Option<String>,
    #[arg(long)]
    n_effects: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    support_size: Option<usize>,
    #[arg(long)]
    memory_cap_gib: Option<f64>,
    #[arg(long)]
    export_map: bool,
    /// Write per-trial values as CSV to this path (uncertainty, moments).
    #[arg(long)]
    trial_table_path: Option<String>,

    /// Worker threads; QLOCK_THREADS is the fallback. Results do not depend
    /// on this.
    #[arg(long)]
    threads: Option<usize>,

    /// Report output path (defaults to the config's output_path, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Directory of JSON configs (one experiment kind).
    #[arg(long)]
    configs: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_experiment(name: &str) -> Result<ExperimentKind, CliError> {
    serde_json::from_value(serde_json::Value::String(name.to_string()))
        .map_err(|_| CliError::Config(format!("unknown experiment '{name}'")))
}

fn parse_subset(name: &str) -> Result<SubsetKind, CliError> {
    serde_json::from_value(serde_json::Value::String(name.to_string()))
        .map_err(|_| CliError::Config(format!("unknown subset '{name}'")))
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut value: serde_json::Value = match &args.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)
            .map_err(|e| CliError::Config(e.to_string()))?,
        None => serde_json::json!({}),
    };
    let obj = value
        .as_object_mut()
        .ok_or_else(|| CliError::Config("config must be a JSON object".into()))?;

    // Flags override file fields.
    if let Some(e) = &args.experiment {
        parse_experiment(e)?;
        obj.insert("experiment".into(), serde_json::json!(e));
    }
    if let Some(v) = args.d_a {
        obj.insert("d_a".into(), serde_json::json!(v));
    }
    if let Some(v) = args.d_b {
        obj.insert("d_b".into(), serde_json::json!(v));
    }
    if let Some(v) = args.t {
        obj.insert("t".into(), serde_json::json!(v));
    }
    if let Some(v) = args.eps {
        obj.insert("eps".into(), serde_json::json!(v));
    }
    if let Some(v) = args.trials {
        obj.insert("trials".into(), serde_json::json!(v));
    }
    if let Some(v) = args.seed {
        obj.insert("seed".into(), serde_json::json!(Seed::new(v)));
    }
    if let Some(s) = &args.subset {
        parse_subset(s)?;
        obj.insert("subset".into(), serde_json::json!(s));
    }
    if let Some(v) = args.n_effects {
        obj.insert("n_effects".into(), serde_json::json!(v));
    }
    if let Some(v) = args.restarts {
        obj.insert("restarts".into(), serde_json::json!(v));
    }
    if let Some(v) = args.max_iters {
        obj.insert("max_iters".into(), serde_json::json!(v));
    }
    if let Some(v) = args.support_size {
        obj.insert("support_size".into(), serde_json::json!(v));
    }
    if let Some(v) = args.memory_cap_gib {
        obj.insert("memory_cap_gib".into(), serde_json::json!(v));
    }
    if args.export_map {
        obj.insert("export_map".into(), serde_json::json!(true));
    }
    if let Some(p) = &args.trial_table_path {
        obj.insert("trial_table_path".into(), serde_json::json!(p));
    }

    let cfg: ExperimentConfig =
        serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn thread_count(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| {
        std::env::var("QLOCK_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
}

fn with_pool<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    match threads {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            pool.install(f)
        }
        _ => f(),
    }
}

fn run_command(args: RunArgs) -> Result<(), CliError> {
    let config = build_config(&args)?;
    let threads = thread_count(args.threads);
    let report = with_pool(threads, || runner::run(&config))?;
    let text = report.to_json_pretty()?;
    let out = args
        .out
        .clone()
        .or_else(|| config.output_path.as_ref().map(PathBuf::from));
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn sweep_command(args: SweepArgs) -> Result<(), CliError> {
    let configs = sweep::load_configs(&args.configs)?;
    let threads = thread_count(args.threads);
    let csv = with_pool(threads, || sweep::sweep(&configs))?;
    std::fs::write(&args.out, csv)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run_command(args),
        Command::Sweep(args) => sweep_command(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
