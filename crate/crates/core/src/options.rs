//! Strangle books, the re-centering hedge and the variance-swap identity.
//!
//! Interest rates are zero throughout. The synthetic pricer is additive
//! (Bachelier): `S_T ~ N(s0, σ√T)`. None of the identities use the pricer.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum OptionKind {
    #[cfg_attr(feature = "serde", serde(rename = "C"))]
    Call,
    #[cfg_attr(feature = "serde", serde(rename = "P"))]
    Put,
}

impl OptionKind {
    pub fn payoff(self, strike: f64, s: f64) -> f64 {
        match self {
            OptionKind::Call => (s - strike).max(0.0),
            OptionKind::Put => (strike - s).max(0.0),
        }
    }
}

/// Puts below `s0`, calls above, each with a notional weight and an entry
/// premium (per unit notional).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StrangleBook {
    s0: f64,
    strikes: Vec<f64>,
    kinds: Vec<OptionKind>,
    weights: Vec<f64>,
    premiums: Vec<f64>,
    maturity: usize,
}

impl StrangleBook {
    pub fn new(
        s0: f64,
        strikes: Vec<f64>,
        kinds: Vec<OptionKind>,
        weights: Vec<f64>,
        premiums: Vec<f64>,
        maturity: usize,
    ) -> Result<Self> {
        let n = strikes.len();
        if n == 0 {
            return Err(invalid("strikes", "book is empty"));
        }
        for len in [kinds.len(), weights.len(), premiums.len()] {
            if len != n {
                return Err(Error::LengthMismatch { left: n, right: len });
            }
        }
        if !s0.is_finite() {
            return Err(invalid("s0", "must be finite"));
        }
        if maturity == 0 {
            return Err(invalid("maturity", "must be > 0 ticks"));
        }
        if strikes.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(invalid("strikes", "must be sorted ascending"));
        }
        for i in 0..n {
            let (k, kind) = (strikes[i], kinds[i]);
            let otm = match kind {
                OptionKind::Put => k <= s0,
                OptionKind::Call => k >= s0,
            };
            if !otm {
                return Err(invalid("strikes", format!("{kind:?} at {k} is on the wrong side of s0 = {s0}")));
            }
            if !(weights[i] >= 0.0 && weights[i].is_finite()) {
                return Err(invalid("weights", format!("weight {} at strike {k}", weights[i])));
            }
            if !(premiums[i] >= kind.payoff(k, s0) && premiums[i].is_finite()) {
                return Err(invalid(
                    "premiums",
                    format!("premium {} below intrinsic value at strike {k}", premiums[i]),
                ));
            }
        }
        Ok(Self {
            s0,
            strikes,
            kinds,
            weights,
            premiums,
            maturity,
        })
    }

    /// Uniform book: strikes at `s0 ± (j + ½) dK` for `j < half_range/dK`,
    /// weights `dK`, premiums from the additive pricer at per-tick vol `vol`.
    pub fn uniform(s0: f64, dk: f64, half_range: f64, maturity: usize, vol: f64) -> Result<Self> {
        if !(dk > 0.0 && half_range >= dk) {
            return Err(invalid("dk", "need 0 < dK <= half range"));
        }
        let m = (half_range / dk).round() as usize;
        let mut strikes = Vec::with_capacity(2 * m);
        let mut kinds = Vec::with_capacity(2 * m);
        for j in (0..m).rev() {
            strikes.push(s0 - (j as f64 + 0.5) * dk);
            kinds.push(OptionKind::Put);
        }
        for j in 0..m {
            strikes.push(s0 + (j as f64 + 0.5) * dk);
            kinds.push(OptionKind::Call);
        }
        let premiums = synthetic_option_prices(s0, &strikes, &kinds, maturity, vol)?;
        let weights = alloc::vec![dk; 2 * m];
        Self::new(s0, strikes, kinds, weights, premiums, maturity)
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn strikes(&self) -> &[f64] {
        &self.strikes
    }

    pub fn kinds(&self) -> &[OptionKind] {
        &self.kinds
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn premiums(&self) -> &[f64] {
        &self.premiums
    }

    pub fn maturity(&self) -> usize {
        self.maturity
    }

    pub fn total_premium(&self) -> f64 {
        self.weights.iter().zip(&self.premiums).map(|(w, p)| w * p).sum()
    }
}

pub fn straddle_pnl(s0: f64, s_t: f64, call_premium: f64, put_premium: f64) -> Result<f64> {
    if call_premium < 0.0 || put_premium < 0.0 {
        return Err(invalid("premium", "must be >= 0"));
    }
    Ok((s_t - s0).abs() - (call_premium + put_premium))
}

/// Discrete payoff `Σ w (K - sT)₊ + Σ w (sT - K)₊` of the book.
pub fn strangle_payoff(book: &StrangleBook, s_t: f64) -> f64 {
    book.strikes
        .iter()
        .zip(&book.kinds)
        .zip(&book.weights)
        .map(|((&k, kind), w)| w * kind.payoff(k, s_t))
        .sum()
}

/// Payoff of the infinite uniform book, `½ (sT - s0)²`.
pub fn continuum_payoff(s0: f64, s_t: f64) -> f64 {
    0.5 * (s_t - s0) * (s_t - s0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EffectiveImpliedVol {
    /// Per-tick `σ̄` with `total_premium = T σ̄² / 2`.
    pub sigma_bar: f64,
    pub total_premium: f64,
}

pub fn effective_implied_vol(book: &StrangleBook) -> Result<EffectiveImpliedVol> {
    let total = book.total_premium();
    if total < 0.0 {
        return Err(invalid("premiums", "negative total premium"));
    }
    Ok(EffectiveImpliedVol {
        sigma_bar: (2.0 * total / book.maturity as f64).sqrt(),
        total_premium: total,
    })
}

/// Gains of the hedge `-(S_anchor - S_0)`, the anchor reset to the current
/// price every `rebalance_every` ticks. `out[k]` is earned over
/// `(k, k + 1]`.
pub fn delta_hedge_pnl(path: &[f64], rebalance_every: usize) -> Result<Vec<f64>> {
    if path.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: path.len(),
        });
    }
    if rebalance_every == 0 {
        return Err(invalid("rebalance_every", "must be >= 1"));
    }
    let s0 = path[0];
    let mut pos = 0.0;
    Ok((0..path.len() - 1)
        .map(|k| {
            if k % rebalance_every == 0 {
                pos = -(path[k] - s0);
            }
            pos * (path[k + 1] - path[k])
        })
        .collect())
}

/// `½ Σ (ΔS)²` over consecutive `n`-tick returns, the last one possibly
/// shorter.
pub fn realized_half_variance(path: &[f64], n: usize) -> f64 {
    let n = n.max(1);
    let last = path.len() - 1;
    let mut acc = 0.0;
    let mut i = 0;
    while i < last {
        let j = (i + n).min(last);
        let d = path[j] - path[i];
        acc += d * d;
        i = j;
    }
    0.5 * acc
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct VarianceSwapReport {
    pub rebalance_every: usize,
    pub sigma_bar: f64,
    /// `T σ̄² / 2`.
    pub premium: f64,
    pub strangle_continuum: f64,
    pub strangle_discrete: f64,
    pub hedge: f64,
    /// `½ Σ (n-tick ΔS)²`.
    pub realized_half_variance: f64,
    /// `½(S_T - S_0)² - T σ̄²/2 + hedge`.
    pub lhs: f64,
    /// `½ Σ (ΔS)² - T σ̄²/2`.
    pub rhs: f64,
    pub residual: f64,
    /// Same left side with the discrete book payoff.
    pub lhs_discrete: f64,
}

/// Strangles plus hedge against realized variance at the hedging frequency.
/// Uses the first `maturity + 1` points of `path`.
pub fn variance_swap_pnl(path: &[f64], book: &StrangleBook, rebalance_every: usize) -> Result<VarianceSwapReport> {
    let t = book.maturity;
    if path.len() < t + 1 {
        return Err(Error::TooShort {
            needed: t + 1,
            got: path.len(),
        });
    }
    if (path[0] - book.s0).abs() > 1e-12 * book.s0.abs().max(1.0) {
        return Err(invalid("path", format!("starts at {} but the book is struck around {}", path[0], book.s0)));
    }
    let p = &path[..=t];
    let iv = effective_implied_vol(book)?;
    let premium = iv.total_premium;
    let hedge: f64 = delta_hedge_pnl(p, rebalance_every)?.iter().sum();
    let cont = continuum_payoff(p[0], p[t]);
    let disc = strangle_payoff(book, p[t]);
    let rv = realized_half_variance(p, rebalance_every);
    let lhs = cont - premium + hedge;
    let rhs = rv - premium;
    Ok(VarianceSwapReport {
        rebalance_every,
        sigma_bar: iv.sigma_bar,
        premium,
        strangle_continuum: cont,
        strangle_discrete: disc,
        hedge,
        realized_half_variance: rv,
        lhs,
        rhs,
        residual: lhs - rhs,
        lhs_discrete: disc - premium + hedge,
    })
}

fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * core::f64::consts::FRAC_1_SQRT_2)
}

fn norm_pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Undiscounted expected payoffs under `S_T ~ N(s0, vol √T)`.
pub fn synthetic_option_prices(
    s0: f64,
    strikes: &[f64],
    kinds: &[OptionKind],
    maturity: usize,
    vol: f64,
) -> Result<Vec<f64>> {
    if !(vol >= 0.0 && vol.is_finite()) {
        return Err(invalid("vol", "must be finite and >= 0"));
    }
    if maturity == 0 {
        return Err(invalid("maturity", "must be > 0 ticks"));
    }
    if strikes.len() != kinds.len() {
        return Err(Error::LengthMismatch {
            left: strikes.len(),
            right: kinds.len(),
        });
    }
    let s = vol * (maturity as f64).sqrt();
    Ok(strikes
        .iter()
        .zip(kinds)
        .map(|(&k, &kind)| {
            if s == 0.0 {
                return kind.payoff(k, s0);
            }
            let m = match kind {
                OptionKind::Call => s0 - k,
                OptionKind::Put => k - s0,
            };
            let d = m / s;
            m * norm_cdf(d) + s * norm_pdf(d)
        })
        .collect())
}
