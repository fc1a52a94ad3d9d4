use serde::Serialize;
use trendcx_core::analysis::{bin_conditional, fit_quadratic, fit_vshape, BinOptions, FitResult, Sampling, StderrMethod};
use trendcx_core::portfolio::trend_warmup;
use trendcx_core::strategy::{ema_trend, theorem_check, theoretical_profile, PositionShape, StrategyLedger};
use trendcx_core::synth::generate_walk;

use super::{sample, Report};
use crate::config::{ExperimentConfig, TrendParams};
use crate::csv_io::load_csv;
use crate::error::{Result, RunError};
use crate::output::{num, OutputDir};

pub const THEOREM_TOLERANCE: f64 = 1e-10;

#[derive(Serialize)]
struct Fits {
    shape: PositionShape,
    upsilon: f64,
    samples: usize,
    sample_every: usize,
    first_tick: usize,
    quadratic: FitResult,
    vshape: FitResult,
}

#[derive(Serialize)]
struct TheoremSummary {
    checked: bool,
    reason: Option<&'static str>,
    ticks: usize,
    max_abs_residual: Option<f64>,
    tolerance: f64,
    pass: bool,
}

fn prices(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let p = &cfg.trend;
    match &p.input {
        Some(input) => {
            let panel = load_csv(&input.path, &input.spec)?;
            let asset = match &p.asset {
                Some(name) => panel
                    .asset(name)
                    .ok_or_else(|| RunError::data(&input.path, format!("no asset `{name}`")))?,
                None => &panel.assets()[0],
            };
            Ok(asset.series.values().to_vec())
        }
        None => {
            if p.length == 0 {
                return Err(RunError::Validation("trend.length: must be > 0".into()));
            }
            Ok(generate_walk(&p.kernel, p.length, cfg.seed)?.into_values())
        }
    }
}

fn ledger_rows(l: &StrategyLedger) -> Vec<Vec<String>> {
    (0..l.len())
        .map(|k| {
            vec![
                k.to_string(),
                num(l.positions[k]),
                num(l.gains[k]),
                num(l.aggregated[k]),
                num(l.indicator[k]),
            ]
        })
        .collect()
}

fn binned(p: &TrendParams, x: &[f64], y: &[f64]) -> Result<Vec<Vec<String>>> {
    let curve = bin_conditional(x, y, p.bins, &p.binning)?;
    let theory = match theoretical_profile(p.config.shape, p.config.tau, p.config.lambda, x) {
        Ok(th) => {
            let plain = BinOptions {
                sampling: Sampling::All,
                min_bin_count: p.binning.min_bin_count,
                stderr: StderrMethod::Naive,
            };
            let sampled_x: Vec<f64> = match p.binning.sampling {
                Sampling::All => x.to_vec(),
                Sampling::Every(k) => x.iter().step_by(k.max(1)).copied().collect(),
            };
            let sampled_th = match p.binning.sampling {
                Sampling::All => th,
                Sampling::Every(k) => th.iter().step_by(k.max(1)).copied().collect(),
            };
            Some(bin_conditional(&sampled_x, &sampled_th, p.bins, &plain)?.means)
        }
        Err(_) => None,
    };
    Ok((0..curve.means.len())
        .map(|i| {
            vec![
                num(curve.bin_centers[i]),
                num(curve.means[i]),
                num(curve.stderrs[i]),
                curve.counts[i].to_string(),
                theory.as_ref().map_or(String::new(), |t| num(t[i])),
            ]
        })
        .collect())
}

pub(super) fn run(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Report> {
    let p = &cfg.trend;
    let spec = p.config.validate()?;
    let prices = prices(cfg)?;
    let ledger = ema_trend(&prices, &p.config)?;
    let mut report = Report::default();

    out.csv(
        "ledger.csv",
        &["tick", "position", "gain", "aggregated_gain", "indicator"],
        ledger_rows(&ledger),
    )?;

    let start = trend_warmup(&p.config, p.config.tau);
    let step = p.sample_every.unwrap_or_else(|| spec.tau_prime().round() as usize).max(1);
    let x = sample(&ledger.indicator, start, step);
    let y = sample(&ledger.aggregated, start, step);
    if x.len() < 3 {
        return Err(RunError::Compute(trendcx_core::Error::TooShort {
            needed: start + 3 * step,
            got: ledger.len(),
        }));
    }
    out.csv(
        "binned.csv",
        &["bin_center", "mean", "stderr", "count", "theory"],
        binned(p, &x, &y)?,
    )?;

    let fits = Fits {
        shape: p.config.shape,
        upsilon: p.config.upsilon(),
        samples: x.len(),
        sample_every: step,
        first_tick: start,
        quadratic: fit_quadratic(&x, &y, None)?,
        vshape: fit_vshape(&x, &y, None)?,
    };
    out.json("fit.json", &fits)?;
    report.line(format!(
        "quadratic a = {:.4e} (Upsilon {:.4e}), R2 {:.3}; V-shape kink {:.4}",
        fits.quadratic.params[0], fits.upsilon, fits.quadratic.r2, fits.vshape.params[1]
    ));

    let summary = match theorem_check(&ledger, &p.config) {
        Ok(r) => {
            let worst = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            TheoremSummary {
                checked: true,
                reason: None,
                ticks: r.len(),
                max_abs_residual: Some(worst),
                tolerance: THEOREM_TOLERANCE,
                pass: worst < THEOREM_TOLERANCE,
            }
        }
        Err(trendcx_core::Error::Unsupported(why)) => TheoremSummary {
            checked: false,
            reason: Some(why),
            ticks: 0,
            max_abs_residual: None,
            tolerance: THEOREM_TOLERANCE,
            pass: true,
        },
        Err(e) => return Err(e.into()),
    };
    out.json("theorem.json", &summary)?;
    if let Some(w) = summary.max_abs_residual {
        report.line(format!("theorem max |residual| {w:.2e}"));
    }
    report.check(summary.pass, || {
        format!(
            "trend theorem residual {:.3e} exceeds {THEOREM_TOLERANCE:e}",
            summary.max_abs_residual.unwrap_or(f64::NAN)
        )
    });
    Ok(report)
}
