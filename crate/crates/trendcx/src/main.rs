use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use trendcx::commands::{execute, Command};
use trendcx::config;
use trendcx::RunError;

/// Default output directory when neither `--out` nor `output_dir` is set.
const OUT_ENV: &str = "TRENDCX_OUT";
const OUT_FALLBACK: &str = "trendcx-out";

#[derive(Parser)]
#[command(name = "trendcx", version, about = "Trend-following convexity experiments")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Signature plots of synthetic walks or CSV prices.
    Signature(Common),
    /// Single-asset EMA trend: ledger, binned profile, fits and theorem check.
    Trend(Common),
    /// Tau scan of a multi-asset replicator against a reference index.
    Replicate(Common),
    /// Risk-parity convexity bound on a panel.
    Riskparity(Common),
    /// Strangle payoffs, variance-swap identity and hedging-frequency sweep.
    Strangles(Common),
    /// Exact-identity suite; exits 3 on any residual breach.
    Selftest(Common),
}

#[derive(Args)]
struct Common {
    /// RNG seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// TOML config, or a manifest.toml from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: $TRENDCX_OUT, else ./trendcx-out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override one config value, e.g. `--set trend.config.tau=90.0`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Verb {
    fn split(self) -> (Command, Common) {
        match self {
            Verb::Signature(c) => (Command::Signature, c),
            Verb::Trend(c) => (Command::Trend, c),
            Verb::Replicate(c) => (Command::Replicate, c),
            Verb::Riskparity(c) => (Command::RiskParity, c),
            Verb::Strangles(c) => (Command::Strangles, c),
            Verb::Selftest(c) => (Command::Selftest, c),
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (command, args) = cli.verb.split();
    let (mut cfg, recorded) = match &args.config {
        Some(p) => config::load(p, &args.set)?,
        None => config::parse("", &args.set)?,
    };
    if let Some(rec) = recorded {
        if rec != command.name() {
            return Err(RunError::Validation(format!("manifest was written by `{rec}`, not `{command}`")).into());
        }
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let dir = args
        .out
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(OUT_FALLBACK));
    cfg.output_dir = Some(dir.clone());

    let done = execute(command, &cfg, &dir).with_context(|| format!("{command} run into {}", dir.display()))?;
    for line in &done.report.lines {
        println!("{line}");
    }
    println!("wrote {} files and {}", done.artifacts.len(), done.manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<RunError>().map_or(2, RunError::exit_code);
            ExitCode::from(code)
        }
    }
}
