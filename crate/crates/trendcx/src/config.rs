//! Experiment configuration: one TOML file per run, every block optional.
//!
//! ```toml
//! seed = 42
//!
//! [trend]
//! length = 200000
//! config = { tau = 180.0, shape = { kind = "sign" } }
//! ```
//!
//! Unknown keys are rejected. A manifest written by a previous run is itself
//! a valid config: its `[run]` table is checked and then ignored.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use trendcx_core::analysis::{BinOptions, StderrMethod};
use trendcx_core::portfolio::{FeeSchedule, PortfolioConfig};
use trendcx_core::strategy::TrendConfig;
use trendcx_core::synth::CorrelationKernel;

use crate::csv_io::{CsvInput, ReferenceInput};
use crate::error::{Result, RunError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub signature: SignatureParams,
    pub trend: TrendParams,
    pub replicate: ReplicateParams,
    pub riskparity: RiskParityParams,
    pub strangles: StrangleParams,
    pub selftest: SelftestParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            output_dir: None,
            signature: SignatureParams::default(),
            trend: TrendParams::default(),
            replicate: ReplicateParams::default(),
            riskparity: RiskParityParams::default(),
            strangles: StrangleParams::default(),
            selftest: SelftestParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedKernel {
    pub name: String,
    pub kernel: CorrelationKernel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignatureParams {
    pub kernels: Vec<NamedKernel>,
    pub length: usize,
    pub tau_max: usize,
    /// Empirical curves of user prices instead of synthetic walks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<CsvInput>,
}

impl Default for SignatureParams {
    fn default() -> Self {
        let k = |name: &str, kernel| NamedKernel {
            name: name.into(),
            kernel,
        };
        Self {
            kernels: vec![
                k("iid", CorrelationKernel::iid(1.0)),
                k("trend", CorrelationKernel::exp_decay(1.0, 0.1, 5.0)),
                k("mean-reverting", CorrelationKernel::exp_decay(1.0, -0.02, 10.0)),
            ],
            length: 1_000_000,
            tau_max: 50,
            input: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrendParams {
    pub config: TrendConfig,
    /// Synthetic price changes, used when `input` is absent.
    pub kernel: CorrelationKernel,
    pub length: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<CsvInput>,
    /// Asset of `input` to trade; defaults to the first.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asset: Option<String>,
    pub bins: usize,
    pub binning: BinOptions,
    /// Ticks between sampled `(𝓣, 𝓖)` pairs; defaults to `round(τ')`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<usize>,
}

impl Default for TrendParams {
    fn default() -> Self {
        Self {
            config: TrendConfig::default(),
            kernel: CorrelationKernel::iid(1.0),
            length: 200_000,
            input: None,
            asset: None,
            bins: 10,
            binning: BinOptions {
                stderr: StderrMethod::BatchMeans(20),
                ..BinOptions::default()
            },
            sample_every: None,
        }
    }
}

/// Closed-loop panel: `hidden` of `assets` factor-correlated walks carry the
/// reference trend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticPanel {
    pub assets: usize,
    pub loading: f64,
    pub length: usize,
    pub hidden: usize,
    pub hidden_tau: f64,
}

impl Default for SyntheticPanel {
    fn default() -> Self {
        Self {
            assets: 10,
            loading: 0.2,
            length: 100_000,
            hidden: 8,
            hidden_tau: 180.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReplicateParams {
    pub portfolio: PortfolioConfig,
    pub tau_grid: Vec<f64>,
    /// Fees charged on the candidate replicator during the scan.
    pub scan_fees: FeeSchedule,
    pub synthetic: SyntheticPanel,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<CsvInput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceInput>,
    /// Asset whose trend is the x-axis of the convexity fit; defaults to the first.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<String>,
}

impl Default for ReplicateParams {
    fn default() -> Self {
        Self {
            portfolio: PortfolioConfig::default(),
            tau_grid: (0..13).map(|k| 60.0 + 20.0 * k as f64).collect(),
            scan_fees: FeeSchedule::default(),
            synthetic: SyntheticPanel::default(),
            input: None,
            reference: None,
            benchmark: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RiskParityParams {
    pub portfolio: PortfolioConfig,
    pub assets: usize,
    pub loading: f64,
    pub length: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<CsvInput>,
    pub parabola_points: usize,
}

impl Default for RiskParityParams {
    fn default() -> Self {
        Self {
            portfolio: PortfolioConfig {
                fees: FeeSchedule::none(),
                ..PortfolioConfig::default()
            },
            assets: 5,
            loading: 0.5,
            length: 50_000,
            input: None,
            parabola_points: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrangleParams {
    pub s0: f64,
    pub dk: f64,
    pub half_range: f64,
    /// Ticks to maturity.
    pub maturity: usize,
    /// Per-tick vol of the pricer and of the synthetic path.
    pub vol: f64,
    pub hedge_every: Vec<usize>,
    /// Payoff curve grid over `s0 ± payoff_span`.
    pub payoff_span: f64,
    pub payoff_points: usize,
    /// Grid spacings of the convergence sweep.
    pub dk_sweep: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub book: Option<PathBuf>,
}

impl Default for StrangleParams {
    fn default() -> Self {
        Self {
            s0: 100.0,
            dk: 1.0,
            half_range: 50.0,
            maturity: 21,
            vol: 1.0,
            hedge_every: vec![1, 2, 5, 10, 21],
            payoff_span: 60.0,
            payoff_points: 241,
            dk_sweep: vec![4.0, 2.0, 1.0, 0.5, 0.25],
            book: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelftestParams {
    pub paths: usize,
    pub length: usize,
    pub tolerance: f64,
}

impl Default for SelftestParams {
    fn default() -> Self {
        Self {
            paths: 50,
            length: 5_000,
            tolerance: 1e-10,
        }
    }
}

fn validation(e: impl std::fmt::Display) -> RunError {
    RunError::Validation(e.to_string())
}

/// Parses `text`, applying `overrides` (`dotted.key=value`) on top. Returns
/// the config and the command recorded in a manifest's `[run]` table, if any.
pub fn parse(text: &str, overrides: &[String]) -> Result<(ExperimentConfig, Option<String>)> {
    let mut table: toml::Table = text.parse().map_err(validation)?;
    let command = match table.remove("run") {
        None => None,
        Some(toml::Value::Table(mut run)) => match run.remove("command") {
            Some(toml::Value::String(c)) => Some(c),
            _ => return Err(validation("manifest `[run]` table has no `command`")),
        },
        Some(_) => return Err(validation("`run` must be a table")),
    };
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let config = ExperimentConfig::deserialize(table).map_err(validation)?;
    Ok((config, command))
}

pub fn load(path: &Path, overrides: &[String]) -> Result<(ExperimentConfig, Option<String>)> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::data(path, format!("cannot read config: {e}")))?;
    parse(&text, overrides).map_err(|e| match e {
        RunError::Validation(m) => RunError::Validation(format!("{}: {m}", path.display())),
        e => e,
    })
}

fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| validation(format!("override `{spec}` is not key=value")))?;
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, path) = parts.split_last().expect("split yields at least one part");
    let mut cur = table;
    for p in path {
        let next = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = next
            .as_table_mut()
            .ok_or_else(|| validation(format!("override `{key}`: `{p}` is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_default() {
        assert_eq!(parse("", &[]).unwrap().0, ExperimentConfig::default());
    }

    #[test]
    fn default_round_trips_through_toml() {
        let c = ExperimentConfig::default();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(parse(&text, &[]).unwrap().0, c);
    }

    #[test]
    fn unknown_field_is_named() {
        let err = parse("[trend]\nlenght = 5\n", &[]).unwrap_err();
        assert!(matches!(err, RunError::Validation(ref m) if m.contains("lenght")), "{err}");
    }

    #[test]
    fn overrides_win() {
        let (c, _) = parse(
            "seed = 1\n[trend.config]\ntau = 50.0\n",
            &["seed=9".into(), "trend.config.tau=20.0".into(), "trend.config.shape.kind=sign".into()],
        )
        .unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.trend.config.tau, 20.0);
        assert_eq!(c.trend.config.shape, trendcx_core::strategy::PositionShape::Sign);
    }

    #[test]
    fn manifest_run_table_is_stripped() {
        let (c, cmd) = parse("seed = 3\n[run]\ncommand = \"trend\"\nversion = \"0\"\n", &[]).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(cmd.as_deref(), Some("trend"));
    }
}
