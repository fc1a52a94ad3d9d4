use serde::Serialize;
use trendcx_core::filters::{ema_theorem_residual, FilterSpec};
use trendcx_core::options::{variance_swap_pnl, StrangleBook};
use trendcx_core::portfolio::{convexity_bound_check, run_multi_trend, PortfolioConfig};
use trendcx_core::strategy::{ema_trend, ema_trend_on_returns, theorem_check, toy_trend, TrendConfig};
use trendcx_core::synth::{factor_returns, gaussian_vec, rng_for, uniform01, Rng};
use trendcx_core::timeseries::cumsum;

use super::replicate::panel_of;
use super::Report;
use crate::config::ExperimentConfig;
use crate::error::{Result, RunError};
use crate::output::OutputDir;

#[derive(Serialize)]
struct Check {
    name: &'static str,
    cases: usize,
    max_residual: f64,
    tolerance: f64,
    pass: bool,
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * uniform01(rng)
}

pub(super) fn run(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Report> {
    let p = &cfg.selftest;
    if p.paths == 0 || p.length < 600 {
        return Err(RunError::Validation("selftest: need paths >= 1 and length >= 600".into()));
    }
    if !(p.tolerance > 0.0) {
        return Err(RunError::Validation("selftest.tolerance: must be > 0".into()));
    }
    let (n, len) = (p.paths, p.length);
    let mut worst = [0.0f64; 6];
    for i in 0..n as u64 {
        let mut rng = rng_for(cfg.seed, i);
        let tau = uniform(&mut rng, 2.0, 200.0);
        let x = gaussian_vec(&mut rng, len);

        worst[0] = worst[0].max(max_abs(&ema_theorem_residual(&x, FilterSpec::from_tau(tau)?)));

        let prices = cumsum(uniform(&mut rng, -100.0, 100.0), &x);
        let toy = toy_trend(&prices, uniform(&mut rng, 0.01, 10.0), i % 2 == 1, None)?;
        worst[1] = worst[1].max(toy.report.relative_residual());

        let tc = TrendConfig {
            tau,
            lambda: 1.0,
            ..TrendConfig::default()
        };
        worst[2] = worst[2].max(max_abs(&theorem_check(&ema_trend_on_returns(&x, &tc)?, &tc)?));
        worst[3] = worst[3].max(max_abs(&theorem_check(&ema_trend(&prices, &tc)?, &tc)?));

        let k = 1 + (i as usize % 8);
        let cols = factor_returns(&vec![uniform01(&mut rng); k], len - 1, cfg.seed ^ i)?
            .into_iter()
            .enumerate()
            .map(|(j, r)| cumsum(0.0, &r.iter().map(|v| v * (1.0 + j as f64)).collect::<Vec<_>>()))
            .collect();
        let names: Vec<String> = (0..k).map(|j| format!("a{j}")).collect();
        let pc = PortfolioConfig {
            trend: TrendConfig {
                tau: tau.min(100.0),
                ..TrendConfig::default()
            },
            ..PortfolioConfig::default()
        };
        let bound = convexity_bound_check(&run_multi_trend(&panel_of(&names, cols)?, &pc)?, &pc)?;
        let breach = if bound.violations.is_empty() { 0.0 } else { -bound.min_gap };
        worst[4] = worst[4].max(breach.max(bound.max_ledger_deviation));

        let t = 1 + (i as usize * 37) % 500;
        let book = StrangleBook::uniform(100.0, 1.0, 50.0, t, 1.0)?;
        let path = cumsum(100.0, &x[..t]);
        let every = 1 + i as usize % 10;
        let vs = variance_swap_pnl(&path, &book, every)?;
        worst[5] = worst[5].max(vs.residual.abs() / vs.realized_half_variance.max(1.0));
    }

    let names = [
        "ema_filter_theorem",
        "toy_trend_identity",
        "trend_theorem_returns",
        "trend_theorem_prices",
        "risk_parity_bound",
        "variance_swap_identity",
    ];
    let checks: Vec<Check> = names
        .iter()
        .zip(worst)
        .map(|(name, w)| Check {
            name,
            cases: n,
            max_residual: w,
            tolerance: p.tolerance,
            pass: w < p.tolerance,
        })
        .collect();
    out.json("selftest.json", &checks)?;
    let mut report = Report::default();
    for c in &checks {
        report.line(format!(
            "{} {:<24} max residual {:.2e}",
            if c.pass { "ok  " } else { "FAIL" },
            c.name,
            c.max_residual
        ));
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    report.check(failed.is_empty(), || format!("residual breach in {}", failed.join(", ")));
    Ok(report)
}
