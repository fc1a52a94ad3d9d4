//! One module per CLI verb. Each writes its artifacts into an [`OutputDir`];
//! [`execute`] closes the run with the manifest.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::config::ExperimentConfig;
use crate::error::{Result, RunError};
use crate::output::OutputDir;

mod replicate;
mod riskparity;
mod selftest;
mod signature;
mod strangles;
mod trend;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Signature,
    Trend,
    Replicate,
    RiskParity,
    Strangles,
    Selftest,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Signature,
        Command::Trend,
        Command::Replicate,
        Command::RiskParity,
        Command::Strangles,
        Command::Selftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Signature => "signature",
            Command::Trend => "trend",
            Command::Replicate => "replicate",
            Command::RiskParity => "riskparity",
            Command::Strangles => "strangles",
            Command::Selftest => "selftest",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| RunError::Validation(format!("unknown command `{s}`")))
    }
}

/// What a command found: summary lines for the terminal and, when an exact
/// check was breached, the reason.
#[derive(Debug, Default)]
pub struct Report {
    pub lines: Vec<String>,
    pub failure: Option<String>,
}

impl Report {
    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn check(&mut self, pass: bool, what: impl FnOnce() -> String) {
        if !pass && self.failure.is_none() {
            self.failure = Some(what());
        }
    }
}

#[derive(Debug)]
pub struct Finished {
    pub manifest: PathBuf,
    pub artifacts: Vec<String>,
    pub report: Report,
}

/// Runs `command` and writes its files plus `manifest.toml` into `dir`. An
/// acceptance breach is returned as an error after everything is written.
pub fn execute(command: Command, config: &ExperimentConfig, dir: &Path) -> Result<Finished> {
    let mut out = OutputDir::create(dir)?;
    let report = match command {
        Command::Signature => signature::run(config, &mut out)?,
        Command::Trend => trend::run(config, &mut out)?,
        Command::Replicate => replicate::run(config, &mut out)?,
        Command::RiskParity => riskparity::run(config, &mut out)?,
        Command::Strangles => strangles::run(config, &mut out)?,
        Command::Selftest => selftest::run(config, &mut out)?,
    };
    let artifacts = out.artifacts().to_vec();
    let manifest = out.finish(command.name(), config)?;
    if let Some(f) = &report.failure {
        return Err(RunError::Acceptance(f.clone()));
    }
    Ok(Finished {
        manifest,
        artifacts,
        report,
    })
}

/// File-name-safe form of an asset or kernel name.
fn slug(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Every `step`-th index from `start`.
fn sample(x: &[f64], start: usize, step: usize) -> Vec<f64> {
    x.get(start..).unwrap_or(&[]).iter().step_by(step.max(1)).copied().collect()
}
