//! Exponential moving averages and the risk-normalizing volatility estimator.
//!
//! Two conventions coexist:
//!
//! * the raw filter `F_α[X_t] = Σ_{i≥0} α^i X_{t-i}` ([`ema_raw`]), and
//! * the normalized filter `L_τ = (1 - α) F_α` with `α = 1 - 2/(τ + 1)`
//!   ([`ema`]).
//!
//! Every filter starts from an empty history (`X_t = 0` before the first
//! sample). With that initialization the product identity of
//! [`filter_product_identity`] and the EMA identity of
//! [`ema_theorem_residual`] hold exactly on finite samples, not just
//! asymptotically.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::error::{invalid, Error, Result};

/// EMA timescale `τ` and its decay `α = 1 - 2/(τ + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    tau: f64,
    alpha: f64,
}

impl FilterSpec {
    pub fn from_tau(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 1.0) {
            return Err(invalid("tau", "timescale must be finite and > 1"));
        }
        Ok(Self {
            tau,
            alpha: 1.0 - 2.0 / (tau + 1.0),
        })
    }

    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid("alpha", "decay must lie in (0, 1)"));
        }
        Ok(Self {
            tau: (1.0 + alpha) / (1.0 - alpha),
            alpha,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `τ' = τ/2 + 1/(2τ)`, the timescale of decay `α²`.
    pub fn tau_prime(&self) -> f64 {
        self.tau / 2.0 + 1.0 / (2.0 * self.tau)
    }

    /// Filter with decay exactly `α²` (timescale `τ'`).
    pub fn companion(&self) -> FilterSpec {
        FilterSpec {
            tau: self.tau_prime(),
            alpha: self.alpha * self.alpha,
        }
    }
}

/// Streaming form of [`ema`]. Single writer.
#[derive(Debug, Clone, Copy)]
pub struct Ema {
    alpha: f64,
    value: f64,
}

impl Ema {
    pub fn new(spec: FilterSpec, init: f64) -> Self {
        Self {
            alpha: spec.alpha,
            value: init,
        }
    }

    #[inline]
    pub fn update(&mut self, x: f64) -> f64 {
        self.value = self.alpha * self.value + (1.0 - self.alpha) * x;
        self.value
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

/// Normalized EMA `y_t = α y_{t-1} + (1 - α) x_t`, `y_{-1} = init`.
pub fn ema(x: &[f64], spec: FilterSpec, init: f64) -> Vec<f64> {
    let mut f = Ema::new(spec, init);
    x.iter().map(|&v| f.update(v)).collect()
}

/// Raw filter `F_t = x_t + α F_{t-1}`, `F_{-1} = 0`.
pub fn ema_raw(x: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", "decay must lie in (0, 1)"));
    }
    Ok(raw(x, alpha))
}

fn raw(x: &[f64], alpha: f64) -> Vec<f64> {
    let mut acc = 0.0;
    x.iter()
        .map(|&v| {
            acc = v + alpha * acc;
            acc
        })
        .collect()
}

/// Pointwise residual of
/// `F_{αβ}[Y F_α[X] + X F_β[Y]] - F_α[X] F_β[Y] - F_{αβ}[XY]`,
/// which vanishes identically.
pub fn filter_product_identity(x: &[f64], y: &[f64], alpha: f64, beta: f64) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let fx = ema_raw(x, alpha)?;
    let fy = ema_raw(y, beta)?;
    let ab = alpha * beta;
    let cross: Vec<f64> = (0..x.len())
        .map(|t| y[t] * fx[t] + x[t] * fy[t])
        .collect();
    let prod: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let lhs = raw(&cross, ab);
    let diag = raw(&prod, ab);
    Ok((0..x.len())
        .map(|t| lhs[t] - fx[t] * fy[t] - diag[t])
        .collect())
}

/// Pointwise residual of the discrete EMA identity
///
/// `(1 - 1/τ) L_τ'[X_t L_τ[X_{t-1}]] - L_τ[X_t]² + (1/τ) L_τ'[X_t²]`.
pub fn ema_theorem_residual(x: &[f64], spec: FilterSpec) -> Vec<f64> {
    let tau = spec.tau();
    let comp = spec.companion();
    let l = ema(x, spec, 0.0);
    let mut cross = Vec::with_capacity(x.len());
    let mut prev = 0.0;
    for (t, &v) in x.iter().enumerate() {
        cross.push(v * prev);
        prev = l[t];
    }
    let lc = ema(&cross, comp, 0.0);
    let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
    let ls = ema(&sq, comp, 0.0);
    (0..x.len())
        .map(|t| (1.0 - 1.0 / tau) * lc[t] - l[t] * l[t] + ls[t] / tau)
        .collect()
}

/// Settings of `σ_t = γ sqrt(L_{τσ}[D_t²])`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct VolEstimatorSpec {
    pub tau_sigma: f64,
    /// Unbiasing factor so that `D_t / σ_{t-1}` has unit variance.
    pub gamma: f64,
    /// Ticks excluded from statistics; `None` means `ceil(3 τσ)`.
    pub warmup: Option<usize>,
}

impl Default for VolEstimatorSpec {
    fn default() -> Self {
        Self {
            tau_sigma: 10.0,
            gamma: 1.05,
            warmup: None,
        }
    }
}

impl VolEstimatorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_sigma.is_finite() && self.tau_sigma >= 1.0) {
            return Err(invalid("tau_sigma", "must be finite and >= 1"));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(invalid("gamma", "must be finite and > 0"));
        }
        Ok(())
    }

    pub fn warmup_ticks(&self) -> usize {
        self.warmup
            .unwrap_or_else(|| (3.0 * self.tau_sigma).ceil() as usize)
    }

    fn alpha(&self) -> f64 {
        1.0 - 2.0 / (self.tau_sigma + 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolEstimate {
    pub sigma: Vec<f64>,
    pub warmup: usize,
}

const REL_FLOOR: f64 = 1e-8;
const ABS_FLOOR: f64 = 1e-12;

/// `σ_t = γ sqrt(L_{τσ}[D_t²])`, floored at `1e-8` times the running mean of
/// `|D|` (or `1e-12` while that mean is zero).
pub fn realized_vol(d: &[f64], spec: &VolEstimatorSpec) -> Result<VolEstimate> {
    spec.validate()?;
    if d.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    let alpha = spec.alpha();
    let mut var = 0.0;
    let mut abs_sum = 0.0;
    let sigma = d
        .iter()
        .enumerate()
        .map(|(t, &x)| {
            var = alpha * var + (1.0 - alpha) * x * x;
            abs_sum += x.abs();
            let floor = (REL_FLOOR * abs_sum / (t + 1) as f64).max(ABS_FLOOR);
            (spec.gamma * var.sqrt()).max(floor)
        })
        .collect();
    Ok(VolEstimate {
        sigma,
        warmup: spec.warmup_ticks(),
    })
}

/// Risk-managed returns `R_t = D_t / σ_{t-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedReturns {
    /// `values[0]` is zero: there is no `σ_{-1}`.
    pub values: Vec<f64>,
    pub warmup: usize,
}

impl NormalizedReturns {
    /// Returns with the warm-up ticks set to zero, the form fed to trend
    /// filters so that positions stay flat until the estimator has settled.
    pub fn masked(&self) -> Vec<f64> {
        let w = self.warmup.min(self.values.len());
        let mut out = self.values.clone();
        out[..w].fill(0.0);
        out
    }

    /// Returns after the warm-up.
    pub fn settled(&self) -> &[f64] {
        &self.values[self.warmup.min(self.values.len())..]
    }
}

pub fn risk_normalize(d: &[f64], spec: &VolEstimatorSpec) -> Result<NormalizedReturns> {
    let vol = realized_vol(d, spec)?;
    Ok(normalize_with(d, &vol))
}

pub(crate) fn normalize_with(d: &[f64], vol: &VolEstimate) -> NormalizedReturns {
    let mut values = Vec::with_capacity(d.len());
    values.push(0.0);
    values.extend((1..d.len()).map(|t| d[t] / vol.sigma[t - 1]));
    NormalizedReturns {
        values,
        warmup: vol.warmup.max(1),
    }
}

/// `γ` that makes `D_t / σ_{t-1}` unit-variance on this sample (after the
/// warm-up). Variance scales as `1/γ²`, so one pass at `γ = 1` suffices.
pub fn calibrate_gamma(d: &[f64], tau_sigma: f64, warmup: Option<usize>) -> Result<f64> {
    let spec = VolEstimatorSpec {
        tau_sigma,
        gamma: 1.0,
        warmup,
    };
    let r = risk_normalize(d, &spec)?;
    let s = r.settled();
    if s.len() < 2 {
        return Err(Error::TooShort {
            needed: r.warmup + 2,
            got: d.len(),
        });
    }
    let m2 = s.iter().map(|x| x * x).sum::<f64>() / s.len() as f64;
    if m2 <= 0.0 {
        return Err(Error::Degenerate("zero price changes after warm-up"));
    }
    Ok(m2.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{gaussian, rng_for};
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn spec_round_trip() {
        for &tau in &[1.5, 2.0, 3.0, 10.0, 180.0, 499.7] {
            let s = FilterSpec::from_tau(tau).unwrap();
            let a = s.alpha();
            assert!(a > 0.0 && a < 1.0);
            assert!(close((1.0 + a) / (1.0 - a), tau, 1e-12));
            assert!(close((1.0 + a * a) / (1.0 - a * a), s.tau_prime(), 1e-12));
            let back = FilterSpec::from_alpha(a).unwrap();
            assert!(close(back.tau(), tau, 1e-12));
        }
        assert!(FilterSpec::from_tau(1.0).is_err());
        assert!(FilterSpec::from_alpha(1.0).is_err());
    }

    #[test]
    fn ema_hand_recursion() {
        let s = FilterSpec::from_tau(3.0).unwrap();
        assert_eq!(s.alpha(), 0.5);
        assert_eq!(ema(&[1.0, 0.0, 0.0], s, 0.0), vec![0.5, 0.25, 0.125]);
        assert_eq!(ema(&[4.0; 5], s, 4.0), vec![4.0; 5]);
    }

    #[test]
    fn ema_matches_direct_weighted_sum() {
        let mut rng = rng_for(7, 0);
        let x: Vec<f64> = (0..50).map(|_| gaussian(&mut rng)).collect();
        let s = FilterSpec::from_tau(6.5).unwrap();
        let a = s.alpha();
        let rec = ema(&x, s, 0.0);
        for t in 0..x.len() {
            let direct: f64 = (0..=t).map(|i| (1.0 - a) * a.powi((t - i) as i32) * x[i]).sum();
            assert!(close(rec[t], direct, 1e-12), "t={t}");
        }
    }

    #[test]
    fn raw_filter_examples() {
        assert_eq!(ema_raw(&[1.0, 0.0, 0.0], 0.5).unwrap(), vec![1.0, 0.5, 0.25]);
        assert!(ema_raw(&[1.0], 0.0).is_err());
        let mut rng = rng_for(8, 0);
        let x: Vec<f64> = (0..200).map(|_| gaussian(&mut rng)).collect();
        let s = FilterSpec::from_tau(12.0).unwrap();
        let f = ema_raw(&x, s.alpha()).unwrap();
        for t in 1..x.len() {
            assert!(close(f[t], x[t] + s.alpha() * f[t - 1], 1e-15));
        }
        let l = ema(&x, s, 0.0);
        for t in 0..x.len() {
            assert!(close((1.0 - s.alpha()) * f[t], l[t], 1e-12));
        }
    }

    #[test]
    fn product_identity_small_cases() {
        assert_eq!(filter_product_identity(&[1.0], &[1.0], 0.9, 0.7).unwrap(), vec![0.0]);
        let zeros = vec![0.0; 10];
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert!(filter_product_identity(&zeros, &y, 0.9, 0.7)
            .unwrap()
            .iter()
            .all(|&r| r == 0.0));
        assert!(filter_product_identity(&[1.0], &[1.0, 2.0], 0.5, 0.5).is_err());
    }

    #[test]
    fn product_identity_on_gaussian_pair() {
        let mut rng = rng_for(9, 0);
        let x: Vec<f64> = (0..100).map(|_| gaussian(&mut rng)).collect();
        let y: Vec<f64> = (0..100).map(|_| gaussian(&mut rng)).collect();
        let r = filter_product_identity(&x, &y, 0.9, 0.7).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn ema_is_linear() {
        let mut rng = rng_for(10, 0);
        let x: Vec<f64> = (0..300).map(|_| gaussian(&mut rng)).collect();
        let y: Vec<f64> = (0..300).map(|_| gaussian(&mut rng)).collect();
        let s = FilterSpec::from_tau(20.0).unwrap();
        let combo: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 2.5 * a - 0.5 * b).collect();
        let lx = ema(&x, s, 0.0);
        let ly = ema(&y, s, 0.0);
        for (t, v) in ema(&combo, s, 0.0).iter().enumerate() {
            assert!((v - (2.5 * lx[t] - 0.5 * ly[t])).abs() < 1e-13);
        }
    }

    #[test]
    fn vol_of_constant_changes_converges_to_gamma_c() {
        let spec = VolEstimatorSpec::default();
        let v = realized_vol(&[-0.3; 400], &spec).unwrap();
        assert!(close(*v.sigma.last().unwrap(), 1.05 * 0.3, 1e-12));
        assert_eq!(v.warmup, 30);
        let r = risk_normalize(&[-0.3; 400], &spec).unwrap();
        assert!(close(*r.values.last().unwrap(), -1.0 / 1.05, 1e-12));
    }

    #[test]
    fn vol_floor_on_flat_series() {
        let v = realized_vol(&[0.0; 20], &VolEstimatorSpec::default()).unwrap();
        assert!(v.sigma.iter().all(|&s| s == 1e-12));
        let r = risk_normalize(&[0.0; 20], &VolEstimatorSpec::default()).unwrap();
        assert!(r.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn risk_normalize_is_scale_invariant() {
        let mut rng = rng_for(11, 0);
        let d: Vec<f64> = (0..500).map(|_| gaussian(&mut rng)).collect();
        let d10: Vec<f64> = d.iter().map(|x| 10.0 * x).collect();
        let spec = VolEstimatorSpec::default();
        let a = risk_normalize(&d, &spec).unwrap();
        let b = risk_normalize(&d10, &spec).unwrap();
        for (x, y) in a.settled().iter().zip(b.settled()) {
            assert!(close(*x, *y, 1e-13));
        }
    }

    #[test]
    fn bad_vol_spec_rejected() {
        let spec = VolEstimatorSpec {
            gamma: 0.0,
            ..Default::default()
        };
        assert!(realized_vol(&[1.0], &spec).is_err());
        assert!(realized_vol(&[], &VolEstimatorSpec::default()).is_err());
    }

    #[test]
    fn masked_zeroes_warmup() {
        let r = NormalizedReturns {
            values: vec![0.0, 1.0, 2.0, 3.0],
            warmup: 2,
        };
        assert_eq!(r.masked(), vec![0.0, 0.0, 2.0, 3.0]);
        assert_eq!(r.settled(), &[2.0, 3.0]);
    }
}
