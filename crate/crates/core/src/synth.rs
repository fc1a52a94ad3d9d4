//! Correlated additive random walks and volatility signature plots.
//!
//! Random numbers come from ChaCha8 (portable, bit-reproducible across
//! platforms). Independent streams share a seed and differ by stream id:
//! [`rng_for`]`(seed, k)` is stream `k` of `seed`. Monte Carlo code uses
//! stream 0 for a single series, and `1 + k` for the `k`-th asset of a panel
//! with stream 0 reserved for the common factor.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StandardUniform};

use crate::error::{invalid, Error, Result};
use crate::timeseries::TimeSeries;

pub type Rng = ChaCha8Rng;

pub fn rng_for(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[inline]
pub fn gaussian(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniform draw on `[0, 1)`.
#[inline]
pub fn uniform01(rng: &mut Rng) -> f64 {
    StandardUniform.sample(rng)
}

pub fn gaussian_vec(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum KernelKind {
    #[default]
    Iid,
    /// `C(u > 0) = A e^{(1 - u)/ℓ}`.
    ExpDecay,
    /// `C(u) = σ² q^u`.
    Ar1,
}

/// Autocovariance `C(u)` of the price changes.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct CorrelationKernel {
    pub kind: KernelKind,
    /// One-tick variance `C(0)`.
    pub sigma2: f64,
    /// `C(1)` for the exponential kernel.
    pub amplitude: f64,
    pub decay_scale: f64,
    pub q: f64,
}

impl Default for CorrelationKernel {
    fn default() -> Self {
        Self::iid(1.0)
    }
}

/// `D_t = q D_{t-1} + ε_t + θ ε_{t-1}`, `ε ~ N(0, innovation_var)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmaRepresentation {
    pub q: f64,
    pub theta: f64,
    pub innovation_var: f64,
}

impl CorrelationKernel {
    pub fn iid(sigma2: f64) -> Self {
        Self {
            kind: KernelKind::Iid,
            sigma2,
            amplitude: 0.0,
            decay_scale: 1.0,
            q: 0.0,
        }
    }

    pub fn exp_decay(sigma2: f64, amplitude: f64, decay_scale: f64) -> Self {
        Self {
            kind: KernelKind::ExpDecay,
            sigma2,
            amplitude,
            decay_scale,
            q: 0.0,
        }
    }

    pub fn ar1(sigma2: f64, q: f64) -> Self {
        Self {
            kind: KernelKind::Ar1,
            sigma2,
            amplitude: 0.0,
            decay_scale: 1.0,
            q,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            return Err(invalid("sigma2", "one-tick variance must be > 0"));
        }
        match self.kind {
            KernelKind::Iid => Ok(()),
            KernelKind::Ar1 if self.q.abs() < 1.0 => Ok(()),
            KernelKind::Ar1 => Err(invalid("q", "AR(1) coefficient must satisfy |q| < 1")),
            KernelKind::ExpDecay if self.decay_scale > 0.0 && self.amplitude.is_finite() => Ok(()),
            KernelKind::ExpDecay => Err(invalid("decay_scale", "must be > 0")),
        }
    }

    pub fn covariance(&self, u: usize) -> f64 {
        if u == 0 {
            return self.sigma2;
        }
        match self.kind {
            KernelKind::Iid => 0.0,
            KernelKind::ExpDecay => {
                self.amplitude * ((1.0 - u as f64) / self.decay_scale).exp()
            }
            KernelKind::Ar1 => self.sigma2 * self.q.powi(u as i32),
        }
    }

    /// Stationary ARMA(1,1) with this autocovariance.
    ///
    /// Any `C(0) = σ²`, `C(u ≥ 1) = A q^{u-1}` is an ARMA(1,1) whenever its
    /// spectral density is nonnegative; `θ` solves
    /// `(ρ - q) θ² + (2qρ - 1 - q²) θ + (ρ - q) = 0` with `ρ = A/σ²`, and a
    /// real root exists exactly when the kernel is positive semi-definite.
    pub fn representation(&self) -> Result<ArmaRepresentation> {
        self.validate()?;
        let s2 = self.sigma2;
        let (q, rho) = match self.kind {
            KernelKind::Iid => (0.0, 0.0),
            KernelKind::Ar1 => (self.q, self.q),
            KernelKind::ExpDecay => ((-1.0 / self.decay_scale).exp(), self.amplitude / s2),
        };
        if rho == 0.0 {
            return Ok(ArmaRepresentation {
                q: 0.0,
                theta: 0.0,
                innovation_var: s2,
            });
        }
        let a = rho - q;
        let theta = if a.abs() < 1e-15 {
            0.0
        } else {
            let b = 2.0 * q * rho - 1.0 - q * q;
            let disc = b * b - 4.0 * a * a;
            if disc < 0.0 {
                return Err(Error::KernelNotRepresentable(format!(
                    "C(1)/C(0) = {rho} is too large for decay q = {q}"
                )));
            }
            let r = disc.sqrt();
            let t1 = (-b + r) / (2.0 * a);
            let t2 = (-b - r) / (2.0 * a);
            if t1.abs() <= t2.abs() {
                t1
            } else {
                t2
            }
        };
        let innovation_var = s2 * (1.0 - q * q) / (1.0 + 2.0 * q * theta + theta * theta);
        Ok(ArmaRepresentation {
            q,
            theta,
            innovation_var,
        })
    }
}

/// `n` stationary price changes with the kernel's autocovariance.
pub fn generate_increments(kernel: &CorrelationKernel, n: usize, rng: &mut Rng) -> Result<Vec<f64>> {
    let arma = kernel.representation()?;
    let s = arma.innovation_var.sqrt();
    let drive = arma.q + arma.theta;
    // D_t = Z_t + ε_t with Z_{t+1} = q Z_t + (q + θ) ε_t, Z_0 drawn stationary.
    let z_sd = if drive == 0.0 {
        0.0
    } else {
        drive.abs() * s / (1.0 - arma.q * arma.q).sqrt()
    };
    let mut z = z_sd * gaussian(rng);
    Ok((0..n)
        .map(|_| {
            let eps = s * gaussian(rng);
            let d = z + eps;
            z = arma.q * z + drive * eps;
            d
        })
        .collect())
}

/// Price path of length `n` starting at 0, deterministic in `seed`.
pub fn generate_walk(kernel: &CorrelationKernel, n: usize, seed: u64) -> Result<TimeSeries> {
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let mut rng = rng_for(seed, 0);
    let d = generate_increments(kernel, n - 1, &mut rng)?;
    TimeSeries::from_values(crate::timeseries::cumsum(0.0, &d))
}

/// Unit-variance Gaussian returns for `loadings.len()` assets driven by one
/// common factor: `R_k = b_k F + sqrt(1 - b_k²) ε_k`. Pairwise correlation
/// is `b_j b_k`.
pub fn factor_returns(loadings: &[f64], n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if let Some(b) = loadings.iter().find(|b| !(b.abs() <= 1.0)) {
        return Err(invalid("loadings", format!("|{b}| > 1")));
    }
    let factor = gaussian_vec(&mut rng_for(seed, 0), n);
    Ok(loadings
        .iter()
        .enumerate()
        .map(|(k, &b)| {
            let mut rng = rng_for(seed, 1 + k as u64);
            let c = (1.0 - b * b).sqrt();
            factor.iter().map(|f| b * f + c * gaussian(&mut rng)).collect()
        })
        .collect())
}

/// `σ²(τ)` per integer scale.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SignatureCurve {
    pub taus: Vec<usize>,
    pub sigma2_of_tau: Vec<f64>,
    /// Batch-means standard errors, present for empirical curves.
    pub stderr: Option<Vec<f64>>,
}

/// `σ²(τ) = σ² + (2/τ) Σ_{u=1}^{τ} (τ - u) C(u)` for `τ = 1..=tau_max`.
pub fn signature_analytic(kernel: &CorrelationKernel, tau_max: usize) -> Result<SignatureCurve> {
    kernel.validate()?;
    if tau_max < 1 {
        return Err(invalid("tau_max", "must be >= 1"));
    }
    let cov: Vec<f64> = (0..=tau_max).map(|u| kernel.covariance(u)).collect();
    let sigma2_of_tau = (1..=tau_max)
        .map(|tau| {
            let s: f64 = (1..=tau).map(|u| (tau - u) as f64 * cov[u]).sum();
            kernel.sigma2 + 2.0 * s / tau as f64
        })
        .collect();
    Ok(SignatureCurve {
        taus: (1..=tau_max).collect(),
        sigma2_of_tau,
        stderr: None,
    })
}

/// `σ̂²(τ) = mean over overlapping windows of (S_{t+τ} - S_t)² / τ`, with
/// standard errors from batch means over batches of `10 τ` windows.
pub fn signature_empirical(prices: &[f64], tau_max: usize) -> Result<SignatureCurve> {
    if tau_max < 1 {
        return Err(invalid("tau_max", "must be >= 1"));
    }
    if prices.len() < 20 * tau_max {
        return Err(Error::TooShort {
            needed: 20 * tau_max,
            got: prices.len(),
        });
    }
    let mut sigma2 = Vec::with_capacity(tau_max);
    let mut stderr = Vec::with_capacity(tau_max);
    for tau in 1..=tau_max {
        let inv = 1.0 / tau as f64;
        let sq: Vec<f64> = prices
            .windows(tau + 1)
            .map(|w| {
                let d = w[tau] - w[0];
                d * d * inv
            })
            .collect();
        sigma2.push(sq.iter().sum::<f64>() / sq.len() as f64);
        stderr.push(crate::analysis::batch_means_stderr(&sq, 10 * tau).unwrap_or(f64::NAN));
    }
    Ok(SignatureCurve {
        taus: (1..=tau_max).collect(),
        sigma2_of_tau: sigma2,
        stderr: Some(stderr),
    })
}
