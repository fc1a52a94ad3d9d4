//! Single-asset trend strategies and their exact P&L decompositions.
//!
//! Time indexing: a price path `S_0..S_n` has changes `D[k] = S_{k+1} - S_k`
//! (`k = 0..n`). Positions are indexed by price time, so `positions` has
//! `n + 1` entries and `gains[k] = positions[k] * D[k]`. Per-change series
//! (`returns`, `sigma`, `indicator`, `aggregated`) share the index of `D`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::filters::{self, normalize_with, realized_vol, FilterSpec, VolEstimatorSpec};
use crate::timeseries::diff_values;

/// `φ` applied to the normalized indicator `𝓣 = √τ L_τ[R]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum PositionShape {
    #[default]
    Linear,
    Sign,
    /// Linear inside `[-cap_level, cap_level]`, flat outside.
    Cap { cap_level: f64 },
    Tanh,
}

impl PositionShape {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PositionShape::Cap { cap_level } if !(cap_level > 0.0 && cap_level.is_finite()) => {
                Err(invalid("cap_level", "must be finite and > 0"))
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            PositionShape::Linear => x,
            PositionShape::Sign => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            PositionShape::Cap { cap_level } => x.max(-cap_level).min(cap_level),
            PositionShape::Tanh => x.tanh(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TrendConfig {
    pub tau: f64,
    pub lambda: f64,
    pub shape: PositionShape,
    pub vol_spec: VolEstimatorSpec,
    /// Positions are recomputed every `rebalance_every` ticks and held in
    /// between. Engaged capital is fixed at 1.
    pub rebalance_every: usize,
}

impl Default for TrendConfig {
    fn default() -> Self {
        Self {
            tau: 180.0,
            lambda: 0.01 / 180f64.sqrt(),
            shape: PositionShape::Linear,
            vol_spec: VolEstimatorSpec::default(),
            rebalance_every: 1,
        }
    }
}

impl TrendConfig {
    pub fn validate(&self) -> Result<FilterSpec> {
        let spec = FilterSpec::from_tau(self.tau)?;
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(invalid("lambda", "risk factor must be finite and > 0"));
        }
        if self.rebalance_every == 0 {
            return Err(invalid("rebalance_every", "must be >= 1"));
        }
        self.shape.validate()?;
        self.vol_spec.validate()?;
        Ok(spec)
    }

    pub fn upsilon(&self) -> f64 {
        upsilon(self.tau, self.lambda)
    }
}

/// `Υ(τ) = λ τ τ' / (τ - 1)`.
pub fn upsilon(tau: f64, lambda: f64) -> f64 {
    let tp = tau / 2.0 + 1.0 / (2.0 * tau);
    lambda * tau * tp / (tau - 1.0)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StrategyLedger {
    pub price_changes: Vec<f64>,
    /// Risk-managed returns as fed to the trend filter (warm-up zeroed).
    pub returns: Vec<f64>,
    pub sigma: Vec<f64>,
    /// `𝓣 = √τ L_τ[R]`.
    pub indicator: Vec<f64>,
    pub positions: Vec<f64>,
    pub gains: Vec<f64>,
    /// `𝓖 = τ' L_τ'[G]`.
    pub aggregated: Vec<f64>,
    pub warmup: usize,
}

impl StrategyLedger {
    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }
}

/// EMA trend on a price path, risk-normalized by the configured estimator.
pub fn ema_trend(prices: &[f64], config: &TrendConfig) -> Result<StrategyLedger> {
    config.validate()?;
    let warmup = config.vol_spec.warmup_ticks();
    if prices.len() < warmup + 2 {
        return Err(Error::TooShort {
            needed: warmup + 2,
            got: prices.len(),
        });
    }
    let d = diff_values(prices);
    let vol = realized_vol(&d, &config.vol_spec)?;
    let norm = normalize_with(&d, &vol);
    let returns = norm.masked();
    Ok(build_ledger(d, returns, vol.sigma, norm.warmup, config))
}

/// EMA trend on returns that are already unit-variance (`σ ≡ 1`, no warm-up).
/// Here `D = R` and the filter identities hold to rounding.
pub fn ema_trend_on_returns(returns: &[f64], config: &TrendConfig) -> Result<StrategyLedger> {
    config.validate()?;
    if returns.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    let sigma = vec![1.0; returns.len()];
    Ok(build_ledger(returns.to_vec(), returns.to_vec(), sigma, 0, config))
}

fn build_ledger(
    d: Vec<f64>,
    returns: Vec<f64>,
    sigma: Vec<f64>,
    warmup: usize,
    config: &TrendConfig,
) -> StrategyLedger {
    let spec = FilterSpec::from_tau(config.tau).expect("validated");
    let sqrt_tau = config.tau.sqrt();
    let indicator: Vec<f64> = filters::ema(&returns, spec, 0.0)
        .into_iter()
        .map(|l| sqrt_tau * l)
        .collect();
    let n = d.len();
    let scale = config.lambda * sqrt_tau;
    let mut positions = Vec::with_capacity(n + 1);
    positions.push(0.0);
    let mut held = 0.0;
    for t in 1..=n {
        if t % config.rebalance_every == 0 {
            held = scale * config.shape.apply(indicator[t - 1]) / sigma[t - 1];
        }
        positions.push(held);
    }
    let gains: Vec<f64> = (0..n).map(|k| positions[k] * d[k]).collect();
    let aggregated = aggregate(&gains, spec);
    StrategyLedger {
        price_changes: d,
        returns,
        sigma,
        indicator,
        positions,
        gains,
        aggregated,
        warmup,
    }
}

/// `τ' L_τ'[G]`.
pub fn aggregate(gains: &[f64], spec: FilterSpec) -> Vec<f64> {
    let comp = spec.companion();
    let tp = comp.tau();
    filters::ema(gains, comp, 0.0)
        .into_iter()
        .map(|v| tp * v)
        .collect()
}

/// Pointwise residual of
/// `L_τ'[G] = (λτ/(τ - 1)) (τ L_τ[R]² - L_τ'[R²])`
/// on the ledger's own returns.
pub fn theorem_check(ledger: &StrategyLedger, config: &TrendConfig) -> Result<Vec<f64>> {
    let spec = config.validate()?;
    if config.shape != PositionShape::Linear {
        return Err(Error::Unsupported("theorem_check needs the linear shape"));
    }
    if config.rebalance_every != 1 {
        return Err(Error::Unsupported("theorem_check needs tick rebalancing"));
    }
    let tau = config.tau;
    let comp = spec.companion();
    let lg = filters::ema(&ledger.gains, comp, 0.0);
    let l = filters::ema(&ledger.returns, spec, 0.0);
    let sq: Vec<f64> = ledger.returns.iter().map(|r| r * r).collect();
    let ls = filters::ema(&sq, comp, 0.0);
    let k = config.lambda * tau / (tau - 1.0);
    Ok((0..ledger.len())
        .map(|t| lg[t] - k * (tau * l[t] * l[t] - ls[t]))
        .collect())
}

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// `⟨𝓖 | 𝓣⟩` for the shapes with a closed form: `Υ(τ)(t² - 1)` (linear)
/// and `λτ(|t| - √(2/π))` (sign).
pub fn theoretical_profile(shape: PositionShape, tau: f64, lambda: f64, t_grid: &[f64]) -> Result<Vec<f64>> {
    FilterSpec::from_tau(tau)?;
    match shape {
        PositionShape::Linear => {
            let u = upsilon(tau, lambda);
            Ok(t_grid.iter().map(|t| u * (t * t - 1.0)).collect())
        }
        PositionShape::Sign => Ok(t_grid
            .iter()
            .map(|t| lambda * tau * (t.abs() - SQRT_2_OVER_PI))
            .collect()),
        _ => Err(Error::Unsupported(
            "no closed-form profile for cap/tanh shapes; estimate it by Monte Carlo",
        )),
    }
}

/// Exact `E[𝓖 | 𝓣]` for the linear shape on iid Gaussian returns:
/// `Υ(τ)(1 - κ)(t² - 1)`, `κ = τ(1 - α)²/(1 + α²)`.
///
/// [`theoretical_profile`] neglects `κ`, which is `O(1/τ)`.
pub fn gaussian_linear_profile(tau: f64, lambda: f64, t_grid: &[f64]) -> Result<Vec<f64>> {
    let spec = FilterSpec::from_tau(tau)?;
    let a = spec.alpha();
    let kappa = tau * (1.0 - a) * (1.0 - a) / (1.0 + a * a);
    let u = upsilon(tau, lambda) * (1.0 - kappa);
    Ok(t_grid.iter().map(|t| u * (t * t - 1.0)).collect())
}

/// Both sides of `Σ G = (λ/2)(ΔS)² - (λ/2) Σ D²`, summed over reset blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ToyReport {
    pub total_gain: f64,
    /// `(λ/2) Σ_blocks (ΔS_block)²`
    pub drift_term: f64,
    /// `(λ/2) Σ D²`
    pub noise_term: f64,
    pub residual: f64,
}

impl ToyReport {
    pub fn rhs(&self) -> f64 {
        self.drift_term - self.noise_term
    }

    /// Residual relative to the size of the terms involved.
    pub fn relative_residual(&self) -> f64 {
        let scale = self.drift_term.abs().max(self.noise_term.abs()).max(f64::MIN_POSITIVE);
        self.residual.abs() / scale
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ToyTrend {
    /// `indicator` holds the un-scaled signal `S_t - S_anchor` and
    /// `aggregated` the running P&L since the last reset.
    pub ledger: StrategyLedger,
    pub report: ToyReport,
    /// Total gain of each complete reset block.
    pub block_gains: Vec<f64>,
}

/// Toy trend `Π_t = λ (S_t - S_anchor)` on a price path. With `normalize`,
/// the same strategy runs on the masked risk-managed returns (default
/// estimator) and gains are in risk units.
pub fn toy_trend(prices: &[f64], lambda: f64, normalize: bool, reset_every: Option<usize>) -> Result<ToyTrend> {
    if prices.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: prices.len(),
        });
    }
    let d = diff_values(prices);
    if normalize {
        let spec = VolEstimatorSpec::default();
        let vol = realized_vol(&d, &spec)?;
        let norm = normalize_with(&d, &vol);
        let r = norm.masked();
        toy_ledger(d, r, vol.sigma, norm.warmup, lambda, reset_every)
    } else {
        let ones = vec![1.0; d.len()];
        toy_ledger(d.clone(), d, ones, 0, lambda, reset_every)
    }
}

/// Toy trend driven directly by increments (price changes or returns).
pub fn toy_trend_increments(x: &[f64], lambda: f64, reset_every: Option<usize>) -> Result<ToyTrend> {
    if x.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    toy_ledger(x.to_vec(), x.to_vec(), vec![1.0; x.len()], 0, lambda, reset_every)
}

fn toy_ledger(
    d: Vec<f64>,
    x: Vec<f64>,
    sigma: Vec<f64>,
    warmup: usize,
    lambda: f64,
    reset_every: Option<usize>,
) -> Result<ToyTrend> {
    if !lambda.is_finite() {
        return Err(invalid("lambda", "must be finite"));
    }
    let block = match reset_every {
        Some(0) => return Err(invalid("reset_every", "must be >= 1")),
        Some(b) => b,
        None => usize::MAX,
    };
    let n = x.len();
    let mut positions = Vec::with_capacity(n + 1);
    let mut gains = Vec::with_capacity(n);
    let mut indicator = Vec::with_capacity(n);
    let mut running = Vec::with_capacity(n);
    let mut block_gains = Vec::new();
    let (mut signal, mut pnl, mut moved) = (0.0, 0.0, 0.0);
    let (mut drift, mut noise) = (0.0, 0.0);
    positions.push(0.0);
    for k in 0..n {
        let g = lambda * signal * x[k];
        gains.push(g);
        pnl += g;
        moved += x[k];
        noise += x[k] * x[k];
        signal += x[k];
        if (k + 1) % block == 0 {
            block_gains.push(pnl);
            drift += moved * moved;
            signal = 0.0;
            moved = 0.0;
            running.push(pnl);
            pnl = 0.0;
        } else {
            running.push(pnl);
        }
        indicator.push(signal);
        positions.push(lambda * signal);
    }
    drift += moved * moved;
    let total_gain: f64 = gains.iter().sum();
    let drift_term = 0.5 * lambda * drift;
    let noise_term = 0.5 * lambda * noise;
    Ok(ToyTrend {
        ledger: StrategyLedger {
            price_changes: d,
            returns: x,
            sigma,
            indicator,
            positions,
            gains,
            aggregated: running,
            warmup,
        },
        report: ToyReport {
            total_gain,
            drift_term,
            noise_term,
            residual: total_gain - (drift_term - noise_term),
        },
        block_gains,
    })
}

/// Gains of the one-tick trend `G_t = R_{t-1} R_t`, the `τ → 1` limit of the
/// EMA trend.
pub fn one_tick_trend_gains(r: &[f64]) -> Vec<f64> {
    r.windows(2).map(|w| w[0] * w[1]).collect()
}
