//! `kpplab`: config-driven runner for the spreading-speed experiments.

mod artifacts;
mod config;
mod error;
mod ini;
mod jobs;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use crate::artifacts::{sha256_hex, write_atomic, MANIFEST};
use crate::config::{ExperimentName, RunConfig};
use crate::error::{CliError, EXIT_PASS};
use crate::jobs::{execute, Outcome};

#[derive(Debug, Parser)]
#[command(name = "kpplab", version, about = "Spreading-speed experiments for KPP equations")]
struct Cli {
    /// Worker threads for running jobs (default: all cores).
    #[arg(long, global = true, env = "KPPLAB_JOBS")]
    jobs: Option<usize>,

    /// Artifact directory, replacing `[output] directory`. With several
    /// configs, each job writes to a subdirectory named after its file.
    #[arg(long, global = true, env = "KPPLAB_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,

    /// Seed replacing the config's `seed`.
    #[arg(long, global = true, env = "KPPLAB_SEED")]
    seed: Option<u64>,

    /// Print nothing on success; errors still go to stderr.
    #[arg(long, global = true, env = "KPPLAB_QUIET")]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment named in each config.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
    /// Theoretical spreading speed only.
    Speed { config: PathBuf },
    /// Dispersion curve of the periodic cell problem.
    Eigen { config: PathBuf },
    /// Positive stationary state.
    Stationary { config: PathBuf },
    /// List experiment names.
    ListExperiments,
    /// Check configs without running them.
    Validate {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
}

struct Job {
    path: PathBuf,
    config: RunConfig,
    seed_overridden: bool,
    output: PathBuf,
}

fn load(path: &Path, forced: Option<ExperimentName>, seed: Option<u64>) -> Result<(RunConfig, bool), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Schema(format!("{}: cannot read config: {e}", path.display())))?;
    let mut cfg = RunConfig::from_text(&text, forced)
        .map_err(|e| match e {
            CliError::Schema(m) => CliError::Schema(format!("{}: {m}", path.display())),
            other => other,
        })?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok((cfg, seed.is_some()))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "job".to_string(), |s| s.to_string_lossy().into_owned())
}

fn output_dir(cli: &Cli, path: &Path, cfg: &RunConfig, batch: bool) -> PathBuf {
    match (&cli.output_dir, &cfg.output.directory) {
        (Some(dir), _) if batch => dir.join(stem(path)),
        (Some(dir), _) => dir.clone(),
        (None, Some(dir)) => dir.clone(),
        (None, None) => PathBuf::from("kpplab-out").join(stem(path)),
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Run { .. } => "run",
        Command::Speed { .. } => "speed",
        Command::Eigen { .. } => "eigen",
        Command::Stationary { .. } => "stationary",
        Command::ListExperiments => "list-experiments",
        Command::Validate { .. } => "validate",
    }
}

fn write_job(cli: &Cli, job: &Job, outcome: &Outcome, wall: f64, jobs: usize) -> Result<(), CliError> {
    let cfg = &job.config;
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    if cfg.output.json {
        let text = serde_json::to_string_pretty(&outcome.summary()).expect("summary serializes") + "\n";
        files.push(("summary.json".into(), text.into_bytes()));
    }
    if cfg.output.csv {
        for (name, text) in &outcome.tables {
            files.push((name.clone(), text.clone().into_bytes()));
        }
    }
    let listed: Vec<_> = files
        .iter()
        .map(|(name, bytes)| json!({ "name": name, "sha256": sha256_hex(bytes), "bytes": bytes.len() }))
        .collect();
    let command = command_name(&cli.command);
    let manifest = json!({
        "tool": "kpplab",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": kpplab_core::VERSION,
        "command": command,
        "experiment": outcome.experiment.name(),
        "verdict": outcome.verdict(),
        "exit_code": outcome.exit_code(),
        "config_path": job.path.display().to_string(),
        "config_sha256": sha256_hex(cfg.source.as_bytes()),
        "config": cfg.source,
        "seed": cfg.seed,
        "seed_overridden": job.seed_overridden,
        "jobs": jobs,
        "wall_time_seconds": wall,
        "platform": { "os": std::env::consts::OS, "arch": std::env::consts::ARCH },
        "artifacts": listed,
        "rerun": format!("kpplab {command} {} --seed {}", job.path.display(), cfg.seed),
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    files.push((MANIFEST.into(), text.into_bytes()));
    write_atomic(&job.output, &files)
}

fn report(job: &Job, outcome: &Outcome) {
    println!("{}: {} -> {}", job.path.display(), outcome.verdict(), job.output.display());
    for c in &outcome.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        if c.detail.is_empty() {
            println!("  [{tag}] {}", c.name);
        } else {
            println!("  [{tag}] {}: {}", c.name, c.detail);
        }
    }
}

fn run_jobs(cli: &Cli, paths: &[PathBuf], forced: Option<ExperimentName>) -> Result<u8, CliError> {
    let batch = paths.len() > 1;
    let mut jobs = Vec::new();
    for path in paths {
        let (config, seed_overridden) = load(path, forced, cli.seed)?;
        let output = output_dir(cli, path, &config, batch);
        jobs.push(Job {
            path: path.clone(),
            config,
            seed_overridden,
            output,
        });
    }
    let threads = match cli.jobs {
        Some(0) => return Err(CliError::Schema("--jobs: must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let results: Vec<_> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let start = Instant::now();
                execute(&job.config).map(|o| (o, start.elapsed().as_secs_f64()))
            })
            .collect()
    });
    let mut code = EXIT_PASS;
    for (job, result) in jobs.iter().zip(results) {
        let step = result.and_then(|(outcome, wall)| {
            write_job(cli, job, &outcome, wall, threads)?;
            Ok(outcome)
        });
        match step {
            Ok(outcome) => {
                if !cli.quiet {
                    report(job, &outcome);
                }
                code = code.max(outcome.exit_code());
            }
            Err(e) => {
                eprintln!("kpplab: {}: {e}", job.path.display());
                code = code.max(e.exit_code());
            }
        }
    }
    Ok(code)
}

fn dispatch(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::Run { configs } => run_jobs(cli, configs, None),
        Command::Speed { config } => run_jobs(cli, std::slice::from_ref(config), Some(ExperimentName::Speed)),
        Command::Eigen { config } => {
            run_jobs(cli, std::slice::from_ref(config), Some(ExperimentName::DispersionCurve))
        }
        Command::Stationary { config } => {
            run_jobs(cli, std::slice::from_ref(config), Some(ExperimentName::Stationary))
        }
        Command::ListExperiments => {
            if !cli.quiet {
                for e in ExperimentName::ALL {
                    println!("{:<20} {}", e.name(), e.description());
                }
            }
            Ok(EXIT_PASS)
        }
        Command::Validate { configs } => {
            for path in configs {
                let (cfg, _) = load(path, None, cli.seed)?;
                if !cli.quiet {
                    println!("{}: ok ({})", path.display(), cfg.experiment.name.name());
                }
            }
            Ok(EXIT_PASS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("kpplab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
