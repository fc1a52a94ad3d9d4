use serde::Serialize;
use trendcx_core::portfolio::{convexity_bound_check, run_multi_trend, trend_warmup};
use trendcx_core::synth::factor_returns;
use trendcx_core::timeseries::cumsum;

use super::replicate::panel_of;
use super::Report;
use crate::config::ExperimentConfig;
use crate::csv_io::load_csv;
use crate::error::{Result, RunError};
use crate::output::{num, OutputDir};

#[derive(Serialize)]
struct BoundSummary {
    ticks_checked: usize,
    violations: usize,
    /// Up to the first 20 `(tick, lhs - rhs)`.
    first_violations: Vec<(usize, f64)>,
    min_gap: f64,
    max_ledger_deviation: f64,
    tolerance: f64,
    pass: bool,
}

pub(super) fn run(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Report> {
    let p = &cfg.riskparity;
    let pc = &p.portfolio;
    pc.trend.validate()?;
    let panel = match &p.input {
        Some(input) => load_csv(&input.path, &input.spec)?,
        None => {
            if p.assets == 0 || p.length < 2 {
                return Err(RunError::Validation("riskparity: need assets >= 1 and length >= 2".into()));
            }
            let cols = factor_returns(&vec![p.loading; p.assets], p.length - 1, cfg.seed)?
                .into_iter()
                .enumerate()
                .map(|(k, r)| {
                    let scale = 1.0 + k as f64;
                    cumsum(100.0, &r.iter().map(|v| v * scale).collect::<Vec<_>>())
                })
                .collect();
            let names: Vec<String> = (0..p.assets).map(|k| format!("asset{k}")).collect();
            panel_of(&names, cols)?
        }
    };
    let ledger = run_multi_trend(&panel, pc)?;
    let bound = convexity_bound_check(&ledger, pc)?;
    let start = trend_warmup(&pc.trend, pc.trend.tau).min(bound.lhs.len());
    let n = bound.lhs.len();
    let aggregated: Vec<f64> = (0..n)
        .map(|k| ledger.per_asset.iter().map(|l| l.aggregated[k]).sum())
        .collect();
    out.csv(
        "scatter.csv",
        &["tick", "rp_trend", "aggregated_gain", "lhs", "rhs"],
        (start..n).map(|k| {
            vec![
                k.to_string(),
                num(ledger.rp_indicator[k]),
                num(aggregated[k]),
                num(bound.lhs[k]),
                num(bound.rhs[k]),
            ]
        }),
    )?;

    let ups = pc.trend.upsilon();
    let t = &ledger.rp_indicator[start..];
    let lo = t.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let m = p.parabola_points.max(2);
    if lo.is_finite() && hi.is_finite() {
        out.csv(
            "parabola.csv",
            &["rp_trend", "upsilon_t2_minus_1"],
            (0..m).map(|i| {
                let x = lo + (hi - lo) * i as f64 / (m - 1) as f64;
                vec![num(x), num(ups * (x * x - 1.0))]
            }),
        )?;
    }

    let summary = BoundSummary {
        ticks_checked: n,
        violations: bound.violations.len(),
        first_violations: bound.violations.iter().take(20).copied().collect(),
        min_gap: bound.min_gap,
        max_ledger_deviation: bound.max_ledger_deviation,
        tolerance: bound.tolerance,
        pass: bound.violations.is_empty() && bound.max_ledger_deviation < bound.tolerance,
    };
    out.json("bound.json", &summary)?;
    let mut report = Report::default();
    report.line(format!(
        "{} assets, {} ticks: {} bound violations, min gap {:.3e}",
        panel.len(),
        n,
        summary.violations,
        summary.min_gap
    ));
    report.check(summary.pass, || {
        format!(
            "risk-parity bound: {} violations, ledger deviation {:.3e}",
            summary.violations, summary.max_ledger_deviation
        )
    });
    Ok(report)
}
