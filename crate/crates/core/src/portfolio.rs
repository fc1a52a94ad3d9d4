//! Multi-asset trend portfolio, fee accounting, the Risk-Parity leg and its
//! convexity bound, and the τ-scan against a reference index.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::analysis::{mean, pearson, std_dev};
use crate::error::{invalid, Error, Result};
use crate::filters::{self, risk_normalize, FilterSpec};
use crate::strategy::{ema_trend, upsilon, PositionShape, StrategyLedger, TrendConfig};
use crate::timeseries::{diff_values, AssetPanel};

pub const TICKS_PER_YEAR: usize = 252;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(untagged))]
pub enum RiskFree {
    /// Annualized rate, accrued at `rate / ticks_per_year` per tick.
    Flat(f64),
    /// Per-tick returns aligned with the gains.
    Series(Vec<f64>),
}

impl Default for RiskFree {
    fn default() -> Self {
        RiskFree::Flat(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct FeeSchedule {
    /// Annualized drag.
    pub transaction_cost_rate: f64,
    /// Annualized.
    pub management_fee: f64,
    /// Fraction of performance above the high-water mark.
    pub incentive_fee: f64,
    pub risk_free: RiskFree,
}

impl Default for FeeSchedule {
    fn default() -> Self {
        Self {
            transaction_cost_rate: 0.02,
            management_fee: 0.01,
            incentive_fee: 0.2,
            risk_free: RiskFree::default(),
        }
    }
}

impl FeeSchedule {
    pub fn none() -> Self {
        Self {
            transaction_cost_rate: 0.0,
            management_fee: 0.0,
            incentive_fee: 0.0,
            risk_free: RiskFree::Flat(0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("transaction_cost_rate", self.transaction_cost_rate),
            ("management_fee", self.management_fee),
            ("incentive_fee", self.incentive_fee),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(invalid(name, "rate must lie in [0, 1)"));
            }
        }
        match &self.risk_free {
            RiskFree::Flat(r) if !r.is_finite() => Err(invalid("risk_free", "must be finite")),
            RiskFree::Series(s) if s.iter().any(|v| !v.is_finite()) => {
                Err(invalid("risk_free", "series must be finite"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FeeBreakdown {
    pub net: Vec<f64>,
    pub transaction: Vec<f64>,
    pub management: Vec<f64>,
    /// Change in the incentive accrual; negative when an accrual reverses.
    pub incentive: Vec<f64>,
    pub risk_free: Vec<f64>,
}

/// `𝐆̃_t = 𝐆_t - c_t - f_t + r_t`.
///
/// Transaction and management costs accrue at `rate / ticks_per_year`. The
/// incentive fee accrues on performance (after costs, including the
/// risk-free leg) above the high-water mark, may reverse within the year,
/// and crystallizes every `ticks_per_year` ticks.
pub fn apply_fees(gross: &[f64], schedule: &FeeSchedule, ticks_per_year: usize) -> Result<FeeBreakdown> {
    schedule.validate()?;
    if ticks_per_year == 0 {
        return Err(invalid("ticks_per_year", "must be > 0"));
    }
    let n = gross.len();
    let tpy = ticks_per_year as f64;
    let rf: Vec<f64> = match &schedule.risk_free {
        RiskFree::Flat(r) => vec![r / tpy; n],
        RiskFree::Series(s) if s.len() == n => s.clone(),
        RiskFree::Series(s) => {
            return Err(Error::LengthMismatch {
                left: n,
                right: s.len(),
            })
        }
    };
    let c = schedule.transaction_cost_rate / tpy;
    let m = schedule.management_fee / tpy;
    let (mut pre_fee, mut crystallized, mut accrued, mut hwm) = (0.0, 0.0, 0.0, 0.0f64);
    let mut out = FeeBreakdown {
        net: Vec::with_capacity(n),
        transaction: vec![c; n],
        management: vec![m; n],
        incentive: Vec::with_capacity(n),
        risk_free: rf,
    };
    for t in 0..n {
        pre_fee += gross[t] - c - m + out.risk_free[t];
        let a = schedule.incentive_fee * ((pre_fee - crystallized) - hwm).max(0.0);
        let f = a - accrued;
        accrued = a;
        out.incentive.push(f);
        out.net.push(gross[t] - c - m - f + out.risk_free[t]);
        if (t + 1) % ticks_per_year == 0 {
            crystallized += accrued;
            accrued = 0.0;
            hwm = hwm.max(pre_fee - crystallized);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PortfolioConfig {
    /// `w_k`; `None` means `1/N`.
    pub weights: Option<Vec<f64>>,
    pub trend: TrendConfig,
    /// `ω_k` of the Risk-Parity leg; `None` means `1/N`.
    pub rp_weights: Option<Vec<f64>>,
    pub fees: FeeSchedule,
    pub ticks_per_year: usize,
}

impl Default for PortfolioConfig {
    fn default() -> Self {
        Self {
            weights: None,
            trend: TrendConfig::default(),
            rp_weights: None,
            fees: FeeSchedule::default(),
            ticks_per_year: TICKS_PER_YEAR,
        }
    }
}

fn resolve(w: &Option<Vec<f64>>, n: usize, name: &'static str) -> Result<Vec<f64>> {
    match w {
        None => Ok(vec![1.0 / n as f64; n]),
        Some(w) if w.len() != n => Err(invalid(name, format!("{} weights for {} assets", w.len(), n))),
        Some(w) if w.iter().any(|v| !(*v >= 0.0 && v.is_finite())) => {
            Err(invalid(name, "weights must be finite and nonnegative"))
        }
        Some(w) if (w.iter().sum::<f64>() - 1.0).abs() > 1e-12 => Err(invalid(name, "weights must sum to 1")),
        Some(w) => Ok(w.clone()),
    }
}

impl PortfolioConfig {
    pub fn weights_for(&self, n: usize) -> Result<Vec<f64>> {
        resolve(&self.weights, n, "weights")
    }

    pub fn rp_weights_for(&self, n: usize) -> Result<Vec<f64>> {
        resolve(&self.rp_weights, n, "rp_weights")
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PortfolioLedger {
    /// Per-asset ledgers, run with risk factor `λ w_k`.
    pub per_asset: Vec<StrategyLedger>,
    pub weights: Vec<f64>,
    pub rp_weights: Vec<f64>,
    pub gross: Vec<f64>,
    pub net: Vec<f64>,
    pub fees: FeeBreakdown,
    pub rp: Vec<f64>,
    pub rp_indicator: Vec<f64>,
}

fn check_panel(panel: &AssetPanel) -> Result<()> {
    if !panel.is_aligned() {
        return Err(invalid("panel", "assets must share one timestamp axis; align first"));
    }
    Ok(())
}

/// Per-asset EMA trends with `Π_{k,t} = λ τ w_k L_τ[R_k]/σ_k`, summed into
/// the portfolio gain.
pub fn run_multi_trend(panel: &AssetPanel, config: &PortfolioConfig) -> Result<PortfolioLedger> {
    check_panel(panel)?;
    let n = panel.assets().len();
    let weights = config.weights_for(n)?;
    let rp_weights = config.rp_weights_for(n)?;
    let per_asset = panel
        .assets()
        .iter()
        .zip(&weights)
        .map(|(a, &w)| {
            let c = TrendConfig {
                lambda: config.trend.lambda * w,
                ..config.trend
            };
            if w == 0.0 {
                // λ = 0 is not a valid config; keep the asset with no exposure.
                let mut l = ema_trend(a.series.values(), &config.trend)?;
                l.positions.iter_mut().for_each(|p| *p = 0.0);
                l.gains.iter_mut().for_each(|g| *g = 0.0);
                l.aggregated.iter_mut().for_each(|g| *g = 0.0);
                Ok(l)
            } else {
                ema_trend(a.series.values(), &c)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let len = per_asset[0].len();
    let mut gross = vec![0.0; len];
    for l in &per_asset {
        for (g, x) in gross.iter_mut().zip(&l.gains) {
            *g += x;
        }
    }
    let fees = apply_fees(&gross, &config.fees, config.ticks_per_year)?;
    let returns: Vec<&[f64]> = per_asset.iter().map(|l| l.returns.as_slice()).collect();
    let rp = combine(&returns, &rp_weights);
    let rp_indicator = indicator(&rp, config.trend.tau)?;
    Ok(PortfolioLedger {
        net: fees.net.clone(),
        fees,
        per_asset,
        weights,
        rp_weights,
        gross,
        rp,
        rp_indicator,
    })
}

fn combine(series: &[&[f64]], w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; series[0].len()];
    for (s, &wk) in series.iter().zip(w) {
        for (o, x) in out.iter_mut().zip(s.iter()) {
            *o += wk * x;
        }
    }
    out
}

fn indicator(x: &[f64], tau: f64) -> Result<Vec<f64>> {
    let spec = FilterSpec::from_tau(tau)?;
    let s = tau.sqrt();
    Ok(filters::ema(x, spec, 0.0).into_iter().map(|v| s * v).collect())
}

/// `𝐆ᴿᴾ_t = Σ_k ω_k R_{k,t}` on risk-managed returns (warm-up zeroed).
pub fn run_risk_parity(panel: &AssetPanel, config: &PortfolioConfig) -> Result<Vec<f64>> {
    check_panel(panel)?;
    let n = panel.assets().len();
    let w = config.rp_weights_for(n)?;
    let returns = panel
        .assets()
        .iter()
        .map(|a| Ok(risk_normalize(&diff_values(a.series.values()), &config.trend.vol_spec)?.masked()))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&[f64]> = returns.iter().map(Vec::as_slice).collect();
    Ok(combine(&refs, &w))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BoundReport {
    /// `Σ_k w_k Υ(𝓣_k² - L_τ'[R_k²])`.
    pub lhs: Vec<f64>,
    /// `Υ((𝓣ᴿᴾ)² - Σ_k w_k L_τ'[R_k²])`.
    pub rhs: Vec<f64>,
    /// `(tick, lhs - rhs)` wherever the gap is below `-tolerance`.
    pub violations: Vec<(usize, f64)>,
    pub min_gap: f64,
    /// Largest `|Σ_k 𝓖_k - lhs|`: how far the ledger's own aggregated gains
    /// sit from the decomposition used for the bound.
    pub max_ledger_deviation: f64,
    pub tolerance: f64,
}

pub const BOUND_TOLERANCE: f64 = 1e-10;

/// Pointwise check of `Σ_k w_k 𝓖_k ≥ Υ(τ)((𝓣ᴿᴾ)² - Σ_k w_k L_τ'[R_k²])`.
pub fn convexity_bound_check(ledger: &PortfolioLedger, config: &PortfolioConfig) -> Result<BoundReport> {
    let spec = config.trend.validate()?;
    if config.trend.shape != PositionShape::Linear || config.trend.rebalance_every != 1 {
        return Err(Error::Unsupported("the bound needs the linear shape and tick rebalancing"));
    }
    let n = ledger.per_asset.len();
    let w = config.weights_for(n)?;
    let omega = config.rp_weights_for(n)?;
    if (w.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(invalid("weights", "must sum to 1"));
    }
    if w != omega {
        return Err(invalid("rp_weights", "the bound needs ω_k = w_k"));
    }
    let tau = config.trend.tau;
    let ups = upsilon(tau, config.trend.lambda);
    let comp = spec.companion();
    let len = ledger.rp.len();
    let mut lhs = vec![0.0; len];
    let mut noise = vec![0.0; len];
    let mut ledger_sum = vec![0.0; len];
    for (k, l) in ledger.per_asset.iter().enumerate() {
        let t_k = indicator(&l.returns, tau)?;
        let sq: Vec<f64> = l.returns.iter().map(|r| r * r).collect();
        let ls = filters::ema(&sq, comp, 0.0);
        for t in 0..len {
            lhs[t] += w[k] * ups * (t_k[t] * t_k[t] - ls[t]);
            noise[t] += w[k] * ls[t];
            ledger_sum[t] += l.aggregated[t];
        }
    }
    let rhs: Vec<f64> = (0..len)
        .map(|t| ups * (ledger.rp_indicator[t].powi(2) - noise[t]))
        .collect();
    let mut violations = Vec::new();
    let mut min_gap = f64::INFINITY;
    let mut max_dev = 0.0f64;
    for t in 0..len {
        let gap = lhs[t] - rhs[t];
        min_gap = min_gap.min(gap);
        if gap < -BOUND_TOLERANCE {
            violations.push((t, gap));
        }
        max_dev = max_dev.max((ledger_sum[t] - lhs[t]).abs());
    }
    Ok(BoundReport {
        lhs,
        rhs,
        violations,
        min_gap,
        max_ledger_deviation: max_dev,
        tolerance: BOUND_TOLERANCE,
    })
}

/// `std(reference) / std(candidate)`.
pub fn vol_match(candidate: &[f64], reference: &[f64]) -> Result<f64> {
    if candidate.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: candidate.len(),
            right: reference.len(),
        });
    }
    if candidate.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: candidate.len(),
        });
    }
    let sc = std_dev(candidate);
    if sc == 0.0 {
        return Err(Error::Degenerate("zero-variance candidate"));
    }
    Ok(std_dev(reference) / sc)
}

/// Annualized Sharpe ratio `mean/std · √ticks_per_year`.
pub fn sharpe(x: &[f64], ticks_per_year: usize) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::TooShort { needed: 2, got: x.len() });
    }
    let s = std_dev(x);
    if s == 0.0 {
        return Err(Error::Degenerate("zero-variance series"));
    }
    Ok(mean(x) / s * (ticks_per_year as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TauScan {
    pub taus: Vec<f64>,
    pub correlations: Vec<f64>,
    /// Vol-matched `λ` per τ.
    pub lambdas: Vec<f64>,
    pub argmax_tau: f64,
    pub max_correlation: f64,
    /// First tick of the common window.
    pub window_start: usize,
}

/// Ticks excluded before any statistic: volatility warm-up plus one
/// timescale of trend filter.
pub fn trend_warmup(config: &TrendConfig, tau: f64) -> usize {
    config.vol_spec.warmup_ticks() + tau.ceil() as usize
}

/// Net replicator P&L for one τ, with `λ` rescaled until the net series has
/// the reference's volatility over `[start..]`.
pub fn vol_matched_net(
    panel: &AssetPanel,
    reference: &[f64],
    config: &PortfolioConfig,
    start: usize,
) -> Result<(f64, Vec<f64>)> {
    let mut cfg = config.clone();
    for _ in 0..50 {
        let net = run_multi_trend(panel, &cfg)?.net;
        let f = vol_match(&net[start..], &reference[start..])?;
        cfg.trend.lambda *= f;
        if (f - 1.0).abs() < 1e-12 {
            break;
        }
    }
    let net = run_multi_trend(panel, &cfg)?.net;
    Ok((cfg.trend.lambda, net))
}

/// Pearson correlation of the vol-matched net replicator with the reference
/// per-tick returns, for each τ of the grid.
///
/// `reference[k]` is the reference return over the same tick as the panel's
/// `k`-th price change.
pub fn tau_scan(
    panel: &AssetPanel,
    reference: &[f64],
    tau_grid: &[f64],
    schedule: &FeeSchedule,
    config: &PortfolioConfig,
) -> Result<TauScan> {
    check_panel(panel)?;
    if tau_grid.is_empty() {
        return Err(invalid("tau_grid", "must not be empty"));
    }
    let n = panel.ticks() - 1;
    if reference.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: reference.len(),
        });
    }
    let tau_max = tau_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let start = trend_warmup(&config.trend, tau_max);
    let need = 2 * config.ticks_per_year;
    if n < start + need {
        return Err(Error::TooShort {
            needed: start + need + 1,
            got: panel.ticks(),
        });
    }
    let mut cfg = config.clone();
    cfg.fees = schedule.clone();
    let mut correlations = Vec::with_capacity(tau_grid.len());
    let mut lambdas = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        cfg.trend.tau = tau;
        let (lambda, net) = vol_matched_net(panel, reference, &cfg, start)?;
        lambdas.push(lambda);
        correlations.push(pearson(&net[start..], &reference[start..])?);
    }
    let best = (0..tau_grid.len())
        .max_by(|&a, &b| correlations[a].total_cmp(&correlations[b]))
        .unwrap_or(0);
    Ok(TauScan {
        taus: tau_grid.to_vec(),
        argmax_tau: tau_grid[best],
        max_correlation: correlations[best],
        correlations,
        lambdas,
        window_start: start,
    })
}
