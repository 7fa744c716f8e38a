//! Goodness-of-fit statistics and small numeric helpers.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};

/// Standard normal CDF, `Phi(x) = erfc(-x / sqrt 2) / 2`.
///
/// `erfc` is statrs' piecewise rational approximation; against reference
/// values its absolute error here is below 1e-10, inside the 1e-7 budget the
/// first-passage CDF needs.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Inverse of [`normal_cdf`] on `(0, 1)`.
pub fn normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    Ok(xs)
}

/// One-sample Kolmogorov-Smirnov distance `sup |F_N - F|`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    let xs = sorted(samples)?;
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Two-sample Kolmogorov-Smirnov distance `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let (xs, ys) = (sorted(a)?, sorted(b)?);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        // Step past every tied value in both samples before comparing.
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic one-sample KS critical value at level `alpha` (e.g. 1.36/sqrt N
/// at 5%).
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Pearson chi-square against equal cell probabilities; returns the
/// statistic and its upper-tail p-value with `k - 1` degrees of freedom.
pub fn chi_square_uniform(counts: &[u64]) -> Result<(f64, f64)> {
    let total: u64 = counts.iter().sum();
    if counts.is_empty() || total == 0 {
        return Err(Error::EmptySample);
    }
    let k = counts.len();
    let expected = total as f64 / k as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| {
            let diff = c as f64 - expected;
            diff * diff / expected
        })
        .sum();
    if k == 1 {
        return Ok((stat, 1.0));
    }
    let dist = ChiSquared::new((k - 1) as f64).expect("positive degrees of freedom");
    Ok((stat, dist.sf(stat)))
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Empirical quantile by the nearest-rank rule.
pub fn quantile(samples: &[f64], q: f64) -> Result<f64> {
    let xs = sorted(samples)?;
    let rank = ((q * xs.len() as f64).ceil() as usize).clamp(1, xs.len());
    Ok(xs[rank - 1])
}

/// Wilson score interval for a binomial proportion at normal quantile `z`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    #[test]
    fn normal_cdf_reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        // Tabulated values of Phi.
        assert!((normal_cdf(1.0) - 0.841_344_746_068_543).abs() < 1e-10);
        assert!((normal_cdf(-1.959_963_984_540_054) - 0.025).abs() < 1e-10);
        assert!((normal_cdf(3.0) - 0.998_650_101_968_369_9).abs() < 1e-10);
        assert!((normal_quantile(0.75) - 0.674_489_750_196_081_7).abs() < 1e-9);
    }

    #[test]
    fn ks_self_test() {
        let mut rng = seeded(11);
        let xs: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
        let d = ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d <= 0.01, "{d}");
        assert_eq!(ks_two_sample(&xs, &xs).unwrap(), 0.0);
        assert_eq!(ks_one_sample(&[], |x| x), Err(Error::EmptySample));
    }

    #[test]
    fn ks_two_sample_disjoint_and_ties() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(ks_two_sample(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]).unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn chi_square_examples() {
        let (stat, p) = chi_square_uniform(&[10, 10, 10]).unwrap();
        assert_eq!(stat, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
        // 2 dof: sf(x) = exp(-x/2).
        let (stat, p) = chi_square_uniform(&[20, 10, 0]).unwrap();
        assert!((stat - 20.0).abs() < 1e-12);
        assert!((p - (-10.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn ks_critical_value() {
        assert!((ks_critical(300, 0.05) * 300f64.sqrt() - 1.358).abs() < 1e-3);
    }

    #[test]
    fn quantile_and_interval() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(quantile(&xs, 0.99).unwrap(), 99.0);
        assert_eq!(quantile(&xs, 1.0).unwrap(), 100.0);
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((correlation(&xs, &xs) - 1.0).abs() < 1e-12);
    }
}
