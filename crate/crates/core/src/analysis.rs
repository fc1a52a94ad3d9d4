//! Binned conditional expectations, least-squares fits, skewness and
//! distribution checks.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::error::{invalid, Error, Result};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub fn std_dev(x: &[f64]) -> f64 {
    variance(x).sqrt()
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: x.len(),
        });
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("zero variance in correlation"));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Standard error of the mean from non-overlapping batches of `batch_len`
/// consecutive samples. `None` with fewer than two batches.
pub fn batch_means_stderr(x: &[f64], batch_len: usize) -> Option<f64> {
    let batch_len = batch_len.max(1);
    let nb = x.len() / batch_len;
    if nb < 2 {
        return None;
    }
    let means: Vec<f64> = x
        .chunks_exact(batch_len)
        .map(|c| c.iter().sum::<f64>() / batch_len as f64)
        .collect();
    Some((variance(&means) / nb as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Sampling {
    All,
    /// Keep one pair every `k` ticks.
    Every(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum StderrMethod {
    /// `sd / √count`, valid for independent samples.
    Naive,
    /// Batch means over consecutive (post-sampling) samples.
    BatchMeans(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct BinOptions {
    pub sampling: Sampling,
    pub min_bin_count: usize,
    pub stderr: StderrMethod,
}

impl Default for BinOptions {
    fn default() -> Self {
        Self {
            sampling: Sampling::All,
            min_bin_count: 20,
            stderr: StderrMethod::Naive,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BinnedCurve {
    /// Mean of `x` within each bin.
    pub bin_centers: Vec<f64>,
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub counts: Vec<usize>,
    /// Bins discarded for holding fewer than `min_bin_count` samples.
    pub dropped: usize,
}

/// Equal-population bins over `x` with per-bin mean and standard error of `y`.
pub fn bin_conditional(x: &[f64], y: &[f64], n_bins: usize, opts: &BinOptions) -> Result<BinnedCurve> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if n_bins == 0 {
        return Err(invalid("n_bins", "must be >= 1"));
    }
    let step = match opts.sampling {
        Sampling::All => 1,
        Sampling::Every(0) => return Err(invalid("sampling", "stride must be >= 1")),
        Sampling::Every(k) => k,
    };
    let xs: Vec<f64> = x.iter().step_by(step).copied().collect();
    let ys: Vec<f64> = y.iter().step_by(step).copied().collect();
    let m = xs.len();
    if m < n_bins * opts.min_bin_count.max(1) {
        return Err(Error::TooShort {
            needed: n_bins * opts.min_bin_count.max(1),
            got: m,
        });
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));
    let mut bin_of = vec![0usize; m];
    let (base, extra) = (m / n_bins, m % n_bins);
    let mut start = 0;
    for b in 0..n_bins {
        let len = base + usize::from(b < extra);
        for &i in &order[start..start + len] {
            bin_of[i] = b;
        }
        start += len;
    }

    let mut sx = vec![0.0; n_bins];
    let mut sy = vec![0.0; n_bins];
    let mut cnt = vec![0usize; n_bins];
    for i in 0..m {
        let b = bin_of[i];
        sx[b] += xs[i];
        sy[b] += ys[i];
        cnt[b] += 1;
    }
    let means: Vec<f64> = (0..n_bins).map(|b| sy[b] / cnt[b] as f64).collect();
    let stderrs: Vec<f64> = match opts.stderr {
        StderrMethod::Naive => {
            let mut ss = vec![0.0; n_bins];
            for i in 0..m {
                let b = bin_of[i];
                ss[b] += (ys[i] - means[b]).powi(2);
            }
            (0..n_bins)
                .map(|b| {
                    let c = cnt[b] as f64;
                    (ss[b] / (c - 1.0) / c).sqrt()
                })
                .collect()
        }
        StderrMethod::BatchMeans(len) => {
            // Ratio estimator: batch sums of (y - mean_b) 1[bin = b] over
            // consecutive samples.
            let len = len.max(1);
            let nb = m / len;
            if nb < 2 {
                return Err(Error::TooShort {
                    needed: 2 * len,
                    got: m,
                });
            }
            let mut acc = vec![0.0; n_bins];
            let mut sum_sq = vec![0.0; n_bins];
            for (j, i) in (0..nb * len).enumerate() {
                let b = bin_of[i];
                acc[b] += ys[i] - means[b];
                if (j + 1) % len == 0 {
                    for (s, a) in sum_sq.iter_mut().zip(acc.iter_mut()) {
                        *s += *a * *a;
                        *a = 0.0;
                    }
                }
            }
            let nbf = nb as f64;
            (0..n_bins)
                .map(|b| {
                    let c = cnt[b] as f64 * (nb * len) as f64 / m as f64;
                    (sum_sq[b] * nbf / (nbf - 1.0)).sqrt() / c
                })
                .collect()
        }
    };
    let keep: Vec<usize> = (0..n_bins).filter(|&b| cnt[b] >= opts.min_bin_count).collect();
    Ok(BinnedCurve {
        bin_centers: keep.iter().map(|&b| sx[b] / cnt[b] as f64).collect(),
        means: keep.iter().map(|&b| means[b]).collect(),
        stderrs: keep.iter().map(|&b| stderrs[b]).collect(),
        counts: keep.iter().map(|&b| cnt[b]).collect(),
        dropped: n_bins - keep.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum FitModel {
    /// `a x² + b x + c`, params `[a, b, c]`.
    Quadratic,
    /// `a (|x| - c)`, params `[a, c]`.
    VShape,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FitResult {
    pub model: FitModel,
    pub params: Vec<f64>,
    pub r2: f64,
    /// Quadratic only: `a` of the theoretical form `a (x² - 1)`.
    pub constrained_a: Option<f64>,
}

fn weights_or_ones(n: usize, w: Option<&[f64]>) -> Result<Vec<f64>> {
    match w {
        None => Ok(vec![1.0; n]),
        Some(w) if w.len() != n => Err(Error::LengthMismatch {
            left: n,
            right: w.len(),
        }),
        Some(w) if w.iter().any(|v| !(*v >= 0.0 && v.is_finite())) => {
            Err(invalid("weights", "must be finite and >= 0"))
        }
        Some(w) => Ok(w.to_vec()),
    }
}

fn check_pairs(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::TooShort {
            needed: 3,
            got: x.len(),
        });
    }
    Ok(())
}

fn r_squared(y: &[f64], fitted: impl Fn(usize) -> f64, w: &[f64]) -> f64 {
    let sw: f64 = w.iter().sum();
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for i in 0..y.len() {
        ss_res += w[i] * (y[i] - fitted(i)).powi(2);
        ss_tot += w[i] * (y[i] - my).powi(2);
    }
    if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    }
}

/// Solves `A p = b` for a small dense system by Gaussian elimination with
/// partial pivoting.
fn solve<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Result<[f64; N]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..N {
        let piv = (col..N)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if !(a[piv][col].abs() > 1e-13 * scale) {
            return Err(Error::Degenerate("singular design matrix"));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..N {
            let f = a[row][col] / a[col][col];
            for k in col..N {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut p = [0.0; N];
    for row in (0..N).rev() {
        let s: f64 = (row + 1..N).map(|k| a[row][k] * p[k]).sum();
        p[row] = (b[row] - s) / a[row][row];
    }
    Ok(p)
}

/// Weighted least squares for `y = a x² + b x + c`, with the constrained
/// `a (x² - 1)` fit reported alongside.
pub fn fit_quadratic(x: &[f64], y: &[f64], weights: Option<&[f64]>) -> Result<FitResult> {
    check_pairs(x, y)?;
    let w = weights_or_ones(x.len(), weights)?;
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..x.len() {
        let row = [x[i] * x[i], x[i], 1.0];
        for r in 0..3 {
            for c in 0..3 {
                ata[r][c] += w[i] * row[r] * row[c];
            }
            aty[r] += w[i] * row[r] * y[i];
        }
        let z = x[i] * x[i] - 1.0;
        num += w[i] * z * y[i];
        den += w[i] * z * z;
    }
    let p = solve(ata, aty)?;
    let r2 = r_squared(y, |i| p[0] * x[i] * x[i] + p[1] * x[i] + p[2], &w);
    Ok(FitResult {
        model: FitModel::Quadratic,
        params: p.to_vec(),
        r2,
        constrained_a: (den > 0.0).then(|| num / den),
    })
}

/// Least squares for `y = a (|x| - c)`: linear in `(a, -a c)`, so solved in
/// closed form.
pub fn fit_vshape(x: &[f64], y: &[f64], weights: Option<&[f64]>) -> Result<FitResult> {
    check_pairs(x, y)?;
    let w = weights_or_ones(x.len(), weights)?;
    let mut ata = [[0.0; 2]; 2];
    let mut aty = [0.0; 2];
    for i in 0..x.len() {
        let row = [x[i].abs(), 1.0];
        for r in 0..2 {
            for c in 0..2 {
                ata[r][c] += w[i] * row[r] * row[c];
            }
            aty[r] += w[i] * row[r] * y[i];
        }
    }
    let [a, k] = solve(ata, aty)?;
    if a == 0.0 {
        return Err(Error::Degenerate("flat V-shape, kink undefined"));
    }
    let r2 = r_squared(y, |i| a * x[i].abs() + k, &w);
    Ok(FitResult {
        model: FitModel::VShape,
        params: vec![a, -k / a],
        r2,
        constrained_a: None,
    })
}

/// Fits `fit` on `n_batches` consecutive slices of the pairs and returns the
/// batch-means standard error of parameter `param`.
pub fn batch_param_stderr(
    x: &[f64],
    y: &[f64],
    n_batches: usize,
    param: usize,
    fit: impl Fn(&[f64], &[f64]) -> Result<FitResult>,
) -> Result<f64> {
    if n_batches < 2 {
        return Err(invalid("n_batches", "must be >= 2"));
    }
    let len = x.len() / n_batches;
    let est: Vec<f64> = (0..n_batches)
        .map(|j| fit(&x[j * len..(j + 1) * len], &y[j * len..(j + 1) * len]).map(|f| f.params[param]))
        .collect::<Result<_>>()?;
    Ok((variance(&est) / n_batches as f64).sqrt())
}

/// Adjusted Fisher-Pearson skewness `G1 = g1 √(n(n-1))/(n-2)` with
/// `g1 = m3 / m2^{3/2}`.
pub fn skewness(x: &[f64]) -> Result<f64> {
    if x.len() < 3 {
        return Err(Error::TooShort {
            needed: 3,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let m = mean(x);
    let (mut m2, mut m3) = (0.0, 0.0);
    for v in x {
        let d = v - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    if m2 == 0.0 || !m2.is_finite() {
        return Err(Error::Degenerate("zero variance"));
    }
    Ok(m3 / m2.powf(1.5) * (n * (n - 1.0)).sqrt() / (n - 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Kolmogorov survival function `Q(λ) = 2 Σ_{k≥1} (-1)^{k-1} e^{-2k²λ²}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov test against `cdf`, with the asymptotic
/// p-value at `λ = (√n + 0.12 + 0.11/√n) D`.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d = 0.0f64;
    for (i, &v) in s.iter().enumerate() {
        let f = cdf(v);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let sn = n.sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_q((sn + 0.12 + 0.11 / sn) * d),
        n: s.len(),
    })
}

/// `P(χ²₁ ≤ x) = erf(√(x/2))`.
pub fn chi2_1_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        libm::erf((x / 2.0).sqrt())
    }
}

/// `P(χ²₁ < 1) = erf(1/√2)`.
pub fn chi2_1_below_one() -> f64 {
    libm::erf(core::f64::consts::FRAC_1_SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Chi2Report {
    pub n_blocks: usize,
    pub ks: KsResult,
    pub loss_frequency: f64,
    pub expected_loss_frequency: f64,
    pub mean_z: f64,
}

pub const MIN_CHI2_BLOCKS: usize = 1000;

/// Tests `z = 2𝓖/(λτ) + 1` of block-reset toy-trend gains against χ²₁.
pub fn chi2_check(block_gains: &[f64], lambda: f64, tau: f64) -> Result<Chi2Report> {
    if block_gains.len() < MIN_CHI2_BLOCKS {
        return Err(Error::TooShort {
            needed: MIN_CHI2_BLOCKS,
            got: block_gains.len(),
        });
    }
    if !(lambda > 0.0 && tau > 0.0) {
        return Err(invalid("lambda", "lambda and tau must be > 0"));
    }
    let z: Vec<f64> = block_gains.iter().map(|g| 2.0 * g / (lambda * tau) + 1.0).collect();
    let losses = block_gains.iter().filter(|&&g| g < 0.0).count();
    Ok(Chi2Report {
        n_blocks: z.len(),
        ks: ks_test(&z, chi2_1_cdf)?,
        loss_frequency: losses as f64 / z.len() as f64,
        expected_loss_frequency: chi2_1_below_one(),
        mean_z: mean(&z),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{gaussian, gaussian_vec, rng_for};
    use proptest::prelude::*;

    #[test]
    fn deterministic_response_bins() {
        let x = gaussian_vec(&mut rng_for(1, 0), 2000);
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let c = bin_conditional(&x, &y, 10, &BinOptions::default()).unwrap();
        assert_eq!(c.counts, vec![200; 10]);
        assert!(c.bin_centers.windows(2).all(|w| w[1] > w[0]));
        // Outer bins hold large |x|, the middle small.
        assert!(c.means[0] > c.means[5] && c.means[9] > c.means[4]);
    }

    #[test]
    fn independent_noise_bins_centered() {
        let mut rng = rng_for(2, 0);
        let x = gaussian_vec(&mut rng, 20_000);
        let y = gaussian_vec(&mut rng, 20_000);
        let c = bin_conditional(&x, &y, 10, &BinOptions::default()).unwrap();
        for (m, s) in c.means.iter().zip(&c.stderrs) {
            assert!(m.abs() < 4.0 * s);
        }
        let bm = BinOptions {
            stderr: StderrMethod::BatchMeans(100),
            ..BinOptions::default()
        };
        let c2 = bin_conditional(&x, &y, 10, &bm).unwrap();
        for (a, b) in c.stderrs.iter().zip(&c2.stderrs) {
            assert!((a / b - 1.0).abs() < 0.5);
        }
    }

    #[test]
    fn too_few_for_bins() {
        let x = [0.0; 100];
        assert!(bin_conditional(&x, &x, 10, &BinOptions::default()).is_err());
        let every = BinOptions {
            sampling: Sampling::Every(2),
            min_bin_count: 1,
            ..BinOptions::default()
        };
        let c = bin_conditional(&x, &x, 10, &every).unwrap();
        assert_eq!(c.counts.iter().sum::<usize>(), 50);
    }

    #[test]
    fn exact_parabola() {
        let x: Vec<f64> = (0..41).map(|i| -2.0 + 0.1 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v * v - 2.0).collect();
        let f = fit_quadratic(&x, &y, None).unwrap();
        assert!((f.params[0] - 2.0).abs() < 1e-10);
        assert!(f.params[1].abs() < 1e-10);
        assert!((f.params[2] + 2.0).abs() < 1e-10);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!((f.constrained_a.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn noise_has_no_fit() {
        let mut rng = rng_for(3, 0);
        let x = gaussian_vec(&mut rng, 10_000);
        let y = gaussian_vec(&mut rng, 10_000);
        assert!(fit_quadratic(&x, &y, None).unwrap().r2 < 0.002);
    }

    #[test]
    fn degenerate_design() {
        assert!(matches!(
            fit_quadratic(&[1.0; 5], &[0.0, 1.0, 2.0, 3.0, 4.0], None),
            Err(Error::Degenerate(_))
        ));
        assert!(fit_quadratic(&[1.0, 2.0], &[1.0, 2.0], None).is_err());
    }

    #[test]
    fn exact_vshape() {
        let x: Vec<f64> = (0..41).map(|i| -2.0 + 0.1 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v.abs() - 0.7979).collect();
        let f = fit_vshape(&x, &y, None).unwrap();
        assert!((f.params[0] - 1.0).abs() < 1e-10);
        assert!((f.params[1] - 0.7979).abs() < 1e-10);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vshape_loses_on_parabola() {
        let x: Vec<f64> = (0..41).map(|i| -2.0 + 0.1 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        assert!(fit_vshape(&x, &y, None).unwrap().r2 < fit_quadratic(&x, &y, None).unwrap().r2);
    }

    #[test]
    fn skewness_known_values() {
        assert!(skewness(&[1.0, 2.0, 3.0]).unwrap().abs() < 1e-15);
        // scipy.stats.skew([1, 2, 10], bias=False)
        assert!((skewness(&[1.0, 2.0, 10.0]).unwrap() - 1.6523167403329908).abs() < 1e-12);
        assert!(skewness(&[4.0; 5]).is_err());
    }

    #[test]
    fn ks_on_matching_distribution() {
        let mut rng = rng_for(4, 0);
        let z: Vec<f64> = (0..20_000).map(|_| gaussian(&mut rng).powi(2)).collect();
        let r = ks_test(&z, chi2_1_cdf).unwrap();
        assert!(r.p_value > 0.01);
        let shifted: Vec<f64> = z.iter().map(|v| v + 0.2).collect();
        assert!(ks_test(&shifted, chi2_1_cdf).unwrap().p_value < 1e-6);
    }

    #[test]
    fn kolmogorov_tail_values() {
        // Q(1.3581) = 0.05, Q(1.6276) = 0.01.
        assert!((kolmogorov_q(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_q(1.6276) - 0.01).abs() < 1e-4);
        assert!((chi2_1_below_one() - 0.682_689_492).abs() < 1e-9);
    }

    #[test]
    fn chi2_needs_blocks() {
        assert!(chi2_check(&[0.0; 999], 1.0, 10.0).is_err());
    }

    #[test]
    fn batch_means_on_iid() {
        let x = gaussian_vec(&mut rng_for(5, 0), 100_000);
        let se = batch_means_stderr(&x, 1000).unwrap();
        assert!((se / (1.0 / 100_000f64.sqrt()) - 1.0).abs() < 0.3);
        assert!(batch_means_stderr(&x[..1500], 1000).is_none());
    }

    proptest! {
        #[test]
        fn bins_preserve_mean(seed in 0u64..1000, n_bins in 1usize..12) {
            let mut rng = rng_for(seed, 0);
            let x = gaussian_vec(&mut rng, 997);
            let y = gaussian_vec(&mut rng, 997);
            let opts = BinOptions { min_bin_count: 1, ..BinOptions::default() };
            let c = bin_conditional(&x, &y, n_bins, &opts).unwrap();
            let total: usize = c.counts.iter().sum();
            let wm: f64 = c.means.iter().zip(&c.counts).map(|(m, k)| m * *k as f64).sum::<f64>() / total as f64;
            prop_assert!((wm - mean(&y)).abs() < 1e-12);
        }

        #[test]
        fn quadratic_recovers_own_model(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0) {
            let x: Vec<f64> = (0..50).map(|i| -2.5 + 0.1 * i as f64).collect();
            let y: Vec<f64> = x.iter().map(|v| a * v * v + b * v + c).collect();
            let f = fit_quadratic(&x, &y, None).unwrap();
            prop_assert!((f.params[0] - a).abs() < 1e-8);
            prop_assert!((f.params[1] - b).abs() < 1e-8);
            prop_assert!((f.params[2] - c).abs() < 1e-8);
            if a.abs() > 1e-3 || b.abs() > 1e-3 {
                prop_assert!((f.r2 - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn skewness_affine_invariant(seed in 0u64..1000, shift in -100.0f64..100.0, scale in 0.01f64..100.0) {
            let x: Vec<f64> = gaussian_vec(&mut rng_for(seed, 0), 200).iter().map(|v| v.exp()).collect();
            let y: Vec<f64> = x.iter().map(|v| shift + scale * v).collect();
            let (s1, s2) = (skewness(&x).unwrap(), skewness(&y).unwrap());
            prop_assert!((s1 - s2).abs() < 1e-8 * s1.abs().max(1.0));
        }
    }
}
