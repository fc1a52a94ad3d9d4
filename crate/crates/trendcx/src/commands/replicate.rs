use serde::Serialize;
use trendcx_core::analysis::{fit_quadratic, pearson, FitResult};
use trendcx_core::filters::FilterSpec;
use trendcx_core::portfolio::{run_multi_trend, sharpe, tau_scan, PortfolioConfig};
use trendcx_core::strategy::{aggregate, ema_trend, TrendConfig};
use trendcx_core::synth::factor_returns;
use trendcx_core::timeseries::{cumsum, AssetPanel};

use super::{sample, Report};
use crate::config::{ExperimentConfig, ReplicateParams};
use crate::csv_io::{load_csv, load_reference};
use crate::error::{Result, RunError};
use crate::output::{num, OutputDir};

#[derive(Serialize)]
struct Convexity {
    benchmark: String,
    tau: f64,
    samples: usize,
    fit: FitResult,
}

#[derive(Serialize)]
struct ReplicationReport {
    source: &'static str,
    assets: usize,
    ticks: usize,
    window_start: usize,
    argmax_tau: f64,
    max_correlation: f64,
    lambda: f64,
    correlation_gross: f64,
    sharpe_net: f64,
    sharpe_gross: f64,
    sharpe_reference: f64,
    convexity: Convexity,
}

pub(crate) fn panel_of(names: &[String], cols: Vec<Vec<f64>>) -> Result<AssetPanel> {
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    Ok(AssetPanel::from_columns(&names, cols)?)
}

fn synthetic(cfg: &ExperimentConfig) -> Result<(AssetPanel, Vec<f64>)> {
    let s = &cfg.replicate.synthetic;
    if s.assets == 0 || s.hidden == 0 || s.hidden > s.assets {
        return Err(RunError::Validation(format!(
            "replicate.synthetic: need 1 <= hidden ({}) <= assets ({})",
            s.hidden, s.assets
        )));
    }
    if s.length < 2 {
        return Err(RunError::Validation("replicate.synthetic.length: must be >= 2".into()));
    }
    let cols: Vec<Vec<f64>> = factor_returns(&vec![s.loading; s.assets], s.length - 1, cfg.seed)?
        .into_iter()
        .map(|r| cumsum(100.0, &r))
        .collect();
    let names: Vec<String> = (0..s.assets).map(|k| format!("asset{k}")).collect();
    let hidden = panel_of(&names[..s.hidden], cols[..s.hidden].to_vec())?;
    let mut index_cfg = cfg.replicate.portfolio.clone();
    index_cfg.weights = None;
    index_cfg.trend.tau = s.hidden_tau;
    let reference = run_multi_trend(&hidden, &index_cfg)?.net;
    Ok((panel_of(&names, cols)?, reference))
}

fn inputs(cfg: &ExperimentConfig) -> Result<(AssetPanel, Vec<f64>, &'static str)> {
    let p: &ReplicateParams = &cfg.replicate;
    match (&p.input, &p.reference) {
        (Some(input), Some(reference)) => {
            let panel = load_csv(&input.path, &input.spec)?;
            let r = load_reference(reference, &panel)?;
            Ok((panel, r, "csv"))
        }
        (Some(_), None) => Err(RunError::Validation(
            "replicate.reference: required when replicate.input is set".into(),
        )),
        (None, Some(_)) => Err(RunError::Validation(
            "replicate.input: required when replicate.reference is set".into(),
        )),
        (None, None) => {
            let (panel, r) = synthetic(cfg)?;
            Ok((panel, r, "synthetic"))
        }
    }
}

pub(super) fn run(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Report> {
    let p = &cfg.replicate;
    p.portfolio.trend.validate()?;
    let (panel, reference, source) = inputs(cfg)?;
    let scan = tau_scan(&panel, &reference, &p.tau_grid, &p.scan_fees, &p.portfolio)?;
    out.csv(
        "tau_scan.csv",
        &["tau", "correlation", "lambda"],
        (0..scan.taus.len()).map(|i| vec![num(scan.taus[i]), num(scan.correlations[i]), num(scan.lambdas[i])]),
    )?;

    let best = PortfolioConfig {
        trend: TrendConfig {
            tau: scan.argmax_tau,
            ..p.portfolio.trend
        },
        fees: p.scan_fees.clone(),
        ..p.portfolio.clone()
    };
    let start = scan.window_start;
    let best_idx = scan.taus.iter().position(|t| *t == scan.argmax_tau).unwrap_or(0);
    let lambda = scan.lambdas[best_idx];
    let ledger = run_multi_trend(
        &panel,
        &PortfolioConfig {
            trend: TrendConfig { lambda, ..best.trend },
            ..best.clone()
        },
    )?;
    let (gross, net) = (ledger.gross, ledger.net);
    let mut cum = (0.0, 0.0);
    out.csv(
        "pnl.csv",
        &["tick", "gross", "net", "reference", "cumulative_net", "cumulative_reference"],
        (0..net.len()).map(|k| {
            if k >= start {
                cum.0 += net[k];
                cum.1 += reference[k];
            }
            vec![
                k.to_string(),
                num(gross[k]),
                num(net[k]),
                num(reference[k]),
                num(cum.0),
                num(cum.1),
            ]
        }),
    )?;

    let bench = match &p.benchmark {
        Some(name) => panel
            .asset(name)
            .ok_or_else(|| RunError::Validation(format!("replicate.benchmark: no asset `{name}`")))?,
        None => &panel.assets()[0],
    };
    let spec = FilterSpec::from_tau(scan.argmax_tau)?;
    let indicator = ema_trend(bench.series.values(), &best.trend)?.indicator;
    let agg = aggregate(&reference, spec);
    let step = spec.tau_prime().round().max(1.0) as usize;
    let x = sample(&indicator, start, step);
    let y = sample(&agg, start, step);
    out.csv(
        "convexity.csv",
        &["benchmark_trend", "aggregated_reference"],
        x.iter().zip(&y).map(|(a, b)| vec![num(*a), num(*b)]),
    )?;
    let fit = fit_quadratic(&x, &y, None)?;

    let tpy = p.portfolio.ticks_per_year;
    let rep = ReplicationReport {
        source,
        assets: panel.len(),
        ticks: panel.ticks(),
        window_start: start,
        argmax_tau: scan.argmax_tau,
        max_correlation: scan.max_correlation,
        lambda,
        correlation_gross: pearson(&gross[start..], &reference[start..])?,
        sharpe_net: sharpe(&net[start..], tpy)?,
        sharpe_gross: sharpe(&gross[start..], tpy)?,
        sharpe_reference: sharpe(&reference[start..], tpy)?,
        convexity: Convexity {
            benchmark: bench.name.clone(),
            tau: scan.argmax_tau,
            samples: x.len(),
            fit,
        },
    };
    out.json("report.json", &rep)?;
    let mut report = Report::default();
    report.line(format!(
        "argmax tau {} with correlation {:.4}; net Sharpe {:.3} vs reference {:.3}; convexity R2 {:.3}",
        rep.argmax_tau, rep.max_correlation, rep.sharpe_net, rep.sharpe_reference, rep.convexity.fit.r2
    ));
    Ok(report)
}
