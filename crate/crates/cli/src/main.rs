use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

mod commands;
mod config;
mod manifest;

use commands::{RunContext, RunOutput};
use config::{config_error, ConfigError, Mode, ScenarioConfig};
use manifest::{Manifest, Status, CONVENTIONS};

/// Scenario runner for the IPM spectral laboratory.
#[derive(Parser, Debug)]
#[command(name = "ipmlab", version)]
struct Cli {
    /// Worker threads for the parallel kernels (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Seed for randomized initial data; overrides the scenario's `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact linear decay on a log-spaced time grid, with oracle comparison.
    LinearDecay(RunArgs),
    /// Slow-decay family: oracle decay and the explicit lower bound.
    Sharpness(RunArgs),
    /// Nonlinear simulation with diagnostics and the decay report.
    Simulate(RunArgs),
    /// Level-set decomposition and potential energy of one density.
    Stratify(RunArgs),
    /// Runs several scenarios concurrently, one subdirectory each.
    Sweep {
        /// Output root; each scenario writes to `<out>/<file stem>`.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Scenario files; each must set `mode`.
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("cannot configure {n} threads: {e}");
            return ExitCode::from(Status::ConfigError.exit_code());
        }
    }
    let status = match cli.command {
        Command::LinearDecay(a) => execute(Some(Mode::LinearDecay), &a.config, &a.out, a.seed),
        Command::Sharpness(a) => execute(Some(Mode::Sharpness), &a.config, &a.out, a.seed),
        Command::Simulate(a) => execute(Some(Mode::Simulate), &a.config, &a.out, a.seed),
        Command::Stratify(a) => execute(Some(Mode::Stratify), &a.config, &a.out, a.seed),
        Command::Sweep { out, seed, configs } => sweep(&configs, &out, seed),
    };
    ExitCode::from(status.exit_code())
}

fn sweep(configs: &[PathBuf], out: &Path, seed: Option<u64>) -> Status {
    let statuses: Vec<Status> = configs
        .par_iter()
        .map(|path| {
            let stem = path
                .file_stem()
                .map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned());
            execute(None, path, &out.join(stem), seed)
        })
        .collect();
    for (path, s) in configs.iter().zip(&statuses) {
        println!("{:<12} {}", format!("{s:?}"), path.display());
    }
    statuses
        .into_iter()
        .max_by_key(|s| s.exit_code())
        .unwrap_or(Status::Passed)
}

/// Runs one scenario and always leaves a manifest in `out`.
fn execute(mode: Option<Mode>, config_path: &Path, out: &Path, seed: Option<u64>) -> Status {
    let start = Instant::now();
    let loaded = ScenarioConfig::load(config_path);
    let seed = seed
        .or_else(|| loaded.as_ref().ok().and_then(|c| c.seed))
        .unwrap_or(0);
    let mut ctx = RunContext::new(out, seed);
    let resolved = loaded.and_then(|cfg| {
        let mode = match mode {
            Some(m) => {
                cfg.check_mode(m)?;
                m
            }
            None => cfg
                .mode
                .ok_or_else(|| config_error("sweep scenarios must set mode"))?,
        };
        Ok((cfg, mode))
    });
    let command = resolved
        .as_ref()
        .map(|(_, m)| m.name())
        .unwrap_or_else(|_| mode.map_or("unknown", Mode::name));
    let (config_echo, result) = match resolved {
        Ok((cfg, m)) => {
            let echo = serde_json::to_value(&cfg).unwrap_or(serde_json::Value::Null);
            (echo, dispatch(m, &cfg, &mut ctx))
        }
        Err(e) => (serde_json::Value::Null, Err(e)),
    };

    let (status, output, message) = match result {
        Ok(o) => {
            let status = if o.aborted.is_some() {
                Status::Aborted
            } else if o.checks.iter().any(|c| c.gating && !c.passed) {
                Status::CheckFailed
            } else {
                Status::Passed
            };
            let msg = o.aborted.clone();
            (status, o, msg)
        }
        Err(e) => {
            let status = if e.downcast_ref::<ConfigError>().is_some() {
                Status::ConfigError
            } else {
                Status::Aborted
            };
            (status, RunOutput::default(), Some(format!("{e:#}")))
        }
    };
    for c in &output.checks {
        let tag = match (c.passed, c.gating) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "WARN",
        };
        println!("[{tag}] {}: {}", c.name, c.detail);
    }
    if let Some(m) = &message {
        eprintln!("{m}");
    }

    let manifest = Manifest {
        status,
        exit_code: status.exit_code(),
        command,
        code_version: env!("CARGO_PKG_VERSION"),
        seed,
        config: config_echo,
        conventions: CONVENTIONS,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        checks: output.checks,
        files: ctx.files().to_vec(),
        results: output.results,
        message,
    };
    if let Err(e) = manifest::write_atomic(out, &manifest) {
        eprintln!("cannot write manifest in {}: {e}", out.display());
        return Status::Aborted;
    }
    status
}

fn dispatch(mode: Mode, cfg: &ScenarioConfig, ctx: &mut RunContext) -> Result<RunOutput> {
    match mode {
        Mode::LinearDecay => commands::linear_decay(cfg, ctx),
        Mode::Sharpness => commands::sharpness(cfg, ctx),
        Mode::Simulate => commands::simulate(cfg, ctx),
        Mode::Stratify => commands::stratify(cfg, ctx),
    }
}
