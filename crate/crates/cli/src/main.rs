//! Command-line front end: runs simulations, threshold searches, density
//! evolution traces and neighborhood counts, and writes plot-ready CSV.
//!
//! Settings come from the defaults, then `--config FILE`, then the dedicated
//! flags, then `--set key=value` overrides in order. Every run that writes to
//! `--out` also writes `<out>.meta` with the full effective configuration.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand as ClapSubcommand};
use ldpc2d::config::{ConfigError, RunConfig, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "ldpc2d",
    version,
    about = "LDPC-coded 2D interference channel laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    shared: Shared,
}

#[derive(ClapSubcommand, Debug, Clone, Copy)]
enum Command {
    /// BER/FER of joint detection and decoding over an SNR or sigma grid.
    Simulate,
    /// Noise threshold by density evolution and bisection.
    Threshold,
    /// Uncoded BER of the full and the windowed detector.
    DetectorCompare,
    /// Density-evolution error-probability trajectory.
    DeTrace,
    /// Message-flow neighborhood node counts and tree bound.
    Neighborhood,
    /// Build a regular parity-check matrix and write it as alist.
    CodeGen,
}

impl Command {
    fn subcommand(self) -> Subcommand {
        match self {
            Command::Simulate => Subcommand::Simulate,
            Command::Threshold => Subcommand::Threshold,
            Command::DetectorCompare => Subcommand::DetectorCompare,
            Command::DeTrace => Subcommand::DeTrace,
            Command::Neighborhood => Subcommand::Neighborhood,
            Command::CodeGen => Subcommand::CodeGen,
        }
    }
}

#[derive(clap::Args, Debug)]
struct Shared {
    /// key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// alist path or regular:N:dv:dc.
    #[arg(long, global = true)]
    code: Option<String>,
    /// HA, HB, AWGN or a channel-matrix file.
    #[arg(long, global = true)]
    channel: Option<String>,
    /// SNR grid in dB, start:stop:step or a single value.
    #[arg(long, global = true)]
    snr: Option<String>,
    /// Noise standard deviation grid, start:stop:step or a single value.
    #[arg(long, global = true)]
    sigma: Option<String>,
    /// Sigma values are given divided by the channel norm.
    #[arg(long, global = true)]
    normalized: bool,
    /// Iteration schedule DET/IC/IOUT.
    #[arg(long, global = true)]
    iters: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    max_frames: Option<u64>,
    #[arg(long, global = true)]
    min_errors: Option<u64>,
    /// te or non-te.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write zero elapsed times so output is byte-reproducible.
    #[arg(long, global = true)]
    no_timing: bool,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override any configuration key, e.g. --set de_samples=20000.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn build_config(cli: &Cli) -> Result<RunConfig, String> {
    let mut cfg = match &cli.shared.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("config file {}: {e}", path.display()))?;
            RunConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => RunConfig::default(),
    };
    cfg.subcommand = cli.command.subcommand();
    let s = &cli.shared;
    let mut pairs: Vec<(&str, String)> = Vec::new();
    let mut opt = |k: &'static str, v: &Option<String>| {
        if let Some(v) = v {
            pairs.push((k, v.clone()));
        }
    };
    opt("code", &s.code);
    opt("channel", &s.channel);
    opt("iters", &s.iters);
    opt("mode", &s.mode);
    opt("seed", &s.seed.map(|x| x.to_string()));
    opt("max_frames", &s.max_frames.map(|x| x.to_string()));
    opt("min_errors", &s.min_errors.map(|x| x.to_string()));
    opt("out", &s.out.as_ref().map(|p| p.display().to_string()));
    if let Some(v) = &s.snr {
        pairs.push(("snr", v.clone()));
        pairs.push(("sigma", "none".into()));
    }
    if let Some(v) = &s.sigma {
        pairs.push(("sigma", v.clone()));
        pairs.push(("snr", "none".into()));
    }
    if s.normalized {
        pairs.push(("sigma_normalized", "true".into()));
    }
    if s.no_timing {
        pairs.push(("timing", "false".into()));
    }
    let mut apply = |k: &str, v: &str| cfg.set(k, v).map_err(|e: ConfigError| e.to_string());
    for (k, v) in &pairs {
        apply(k, v)?;
    }
    for kv in &s.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
        apply(k.trim(), v.trim())?;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.shared.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: threads: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cfg) {
        Ok(commands::Outcome::Done) => ExitCode::SUCCESS,
        Ok(commands::Outcome::NotConverged(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(3)
        }
        Err(commands::Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(commands::Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
