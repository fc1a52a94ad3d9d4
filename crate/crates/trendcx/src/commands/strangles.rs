use serde::Serialize;
use trendcx_core::options::{
    continuum_payoff, effective_implied_vol, strangle_payoff, variance_swap_pnl, EffectiveImpliedVol, StrangleBook,
    VarianceSwapReport,
};
use trendcx_core::synth::{gaussian_vec, rng_for};
use trendcx_core::timeseries::cumsum;

use super::Report;
use crate::config::{ExperimentConfig, StrangleParams};
use crate::csv_io::load_book;
use crate::error::{Result, RunError};
use crate::output::{num, OutputDir};

/// Identity residuals are judged relative to `max(1, realized half variance)`.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

#[derive(Serialize)]
struct Identity {
    strikes: usize,
    effective_implied_vol: EffectiveImpliedVol,
    tick_hedge: VarianceSwapReport,
    tolerance: f64,
    worst_relative_residual: f64,
    pass: bool,
}

fn book(p: &StrangleParams) -> Result<StrangleBook> {
    match &p.book {
        Some(path) => load_book(path, p.s0, p.maturity),
        None => Ok(StrangleBook::uniform(p.s0, p.dk, p.half_range, p.maturity, p.vol)?),
    }
}

fn grid(p: &StrangleParams, span: f64) -> Vec<f64> {
    let m = p.payoff_points.max(2);
    (0..m)
        .map(|i| p.s0 - span + 2.0 * span * i as f64 / (m - 1) as f64)
        .collect()
}

pub(super) fn run(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Report> {
    let p = &cfg.strangles;
    if p.hedge_every.is_empty() || p.hedge_every.contains(&0) {
        return Err(RunError::Validation("strangles.hedge_every: need at least one period, all >= 1".into()));
    }
    if !(p.vol >= 0.0 && p.vol.is_finite()) {
        return Err(RunError::Validation("strangles.vol: must be finite and >= 0".into()));
    }
    let book = book(p)?;
    let d: Vec<f64> = gaussian_vec(&mut rng_for(cfg.seed, 0), p.maturity)
        .into_iter()
        .map(|v| v * p.vol)
        .collect();
    let path = cumsum(p.s0, &d);

    out.csv(
        "payoff.csv",
        &["s_t", "strangles", "continuum"],
        grid(p, p.payoff_span)
            .into_iter()
            .map(|s| vec![num(s), num(strangle_payoff(&book, s)), num(continuum_payoff(p.s0, s))]),
    )?;

    let mut worst = 0.0f64;
    let mut reports = Vec::with_capacity(p.hedge_every.len());
    for &n in &p.hedge_every {
        let r = variance_swap_pnl(&path, &book, n)?;
        worst = worst.max(r.residual.abs() / r.realized_half_variance.max(1.0));
        reports.push(r);
    }
    out.csv(
        "hedging.csv",
        &[
            "rebalance_every",
            "realized_half_variance",
            "hedge",
            "lhs",
            "rhs",
            "residual",
            "lhs_discrete",
        ],
        reports.iter().map(|r| {
            vec![
                r.rebalance_every.to_string(),
                num(r.realized_half_variance),
                num(r.hedge),
                num(r.lhs),
                num(r.rhs),
                num(r.residual),
                num(r.lhs_discrete),
            ]
        }),
    )?;

    // Sup-norm gap to the continuum payoff over the inner half of the strike range.
    let inner = grid(p, p.half_range / 2.0);
    let mut prev: Option<f64> = None;
    let mut sweep = Vec::with_capacity(p.dk_sweep.len());
    for &dk in &p.dk_sweep {
        let b = StrangleBook::uniform(p.s0, dk, p.half_range, p.maturity, p.vol)?;
        let err = inner
            .iter()
            .map(|&s| (strangle_payoff(&b, s) - continuum_payoff(p.s0, s)).abs())
            .fold(0.0, f64::max);
        let ratio = prev.map_or(String::new(), |e| num(e / err));
        sweep.push(vec![num(dk), num(err), ratio]);
        prev = Some(err);
    }
    out.csv("convergence.csv", &["dk", "sup_error", "ratio_to_previous"], sweep)?;

    let tick_hedge = variance_swap_pnl(&path, &book, 1)?;
    worst = worst.max(tick_hedge.residual.abs() / tick_hedge.realized_half_variance.max(1.0));
    let identity = Identity {
        strikes: book.strikes().len(),
        effective_implied_vol: effective_implied_vol(&book)?,
        tick_hedge,
        tolerance: IDENTITY_TOLERANCE,
        worst_relative_residual: worst,
        pass: worst < IDENTITY_TOLERANCE,
    };
    out.json("identity.json", &identity)?;

    let mut report = Report::default();
    report.line(format!(
        "{} strikes, sigma_bar {:.4}; worst identity residual {:.2e}",
        identity.strikes, identity.effective_implied_vol.sigma_bar, worst
    ));
    report.check(identity.pass, || {
        format!("variance-swap identity residual {worst:.3e} exceeds {IDENTITY_TOLERANCE:e}")
    });
    Ok(report)
}
