//! Normal distribution, goodness of fit and small summaries.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Default pair budget for [`pairwise_angle_stats`].
pub const DEFAULT_MAX_PAIRS: usize = 100_000;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Inverse of [`normal_cdf`] by bracketed bisection.
pub fn normal_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("quantile level {q} is outside (0, 1)")));
    }
    // Bisect until the bracket cannot shrink further in double precision.
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if normal_cdf(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if (normal_cdf(lo) - q).abs() < (normal_cdf(hi) - q).abs() {
        lo
    } else {
        hi
    })
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `sample` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    if sample.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidInput("sample contains NaN".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// `sqrt(d - 2) (pi/2 - Theta_ij)` for pairs of unit vectors of length `d`.
///
/// All pairs are used unless their number exceeds `max_pairs`, in which case
/// a uniform subsample drawn from `seed` is taken (in index order).
pub fn pairwise_angle_stats(vectors: &[Vec<f64>], max_pairs: Option<usize>, seed: u64) -> Result<Vec<f64>> {
    let k = vectors.len();
    if k < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 vectors, got {k}")));
    }
    let d = vectors[0].len();
    if d < 3 {
        return Err(Error::InvalidInput(format!("vector length {d} is below 3")));
    }
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != d {
            return Err(Error::InvalidInput(format!(
                "vector {i} has length {} instead of {d}",
                v.len()
            )));
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() <= 1e-8) {
            return Err(Error::InvalidInput(format!(
                "vector {i} is not normalized (norm {norm})"
            )));
        }
    }
    let scale = ((d - 2) as f64).sqrt();
    let stat = |i: usize, j: usize| {
        let ip: f64 = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum();
        scale * (FRAC_PI_2 - ip.clamp(-1.0, 1.0).acos())
    };

    let total = k * (k - 1) / 2;
    match max_pairs {
        Some(cap) if cap < total => {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let mut picks = index::sample(&mut rng, total, cap).into_vec();
            picks.sort_unstable();
            let mut out = Vec::with_capacity(cap);
            // Pairs enumerated as (0,1), (0,2), ..., (1,2), ...
            let (mut i, mut start) = (0usize, 0usize);
            for idx in picks {
                while idx >= start + (k - 1 - i) {
                    start += k - 1 - i;
                    i += 1;
                }
                out.push(stat(i, i + 1 + (idx - start)));
            }
            Ok(out)
        }
        _ => {
            let mut out = Vec::with_capacity(total);
            for i in 0..k {
                for j in (i + 1)..k {
                    out.push(stat(i, j));
                }
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least-squares line through `(x, y)`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Result<OlsFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "x has {} points but y has {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if x.len() < 2 || !(sxx > 0.0) {
        let distinct = if x.is_empty() { 0 } else { 1 };
        return Err(Error::Rank {
            requested: 2,
            available: distinct,
        });
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(OlsFit {
        slope,
        intercept,
        r2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSummary {
    pub count: usize,
    pub mean: f64,
    /// Unbiased.
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// Moments of a sample with at least two points. Skewness and kurtosis are
/// the plain moment ratios and read 0 for a constant sample.
pub fn summarize_sample(x: &[f64]) -> Result<SampleSummary> {
    if x.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 observations, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let variance = m2 / (n - 1.0);
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    Ok(SampleSummary {
        count: x.len(),
        mean,
        variance,
        skewness,
        excess_kurtosis,
    })
}

/// Pearson correlation of paired samples.
pub fn correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need two paired samples of equal length >= 2 (got {} and {})",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(Error::Degenerate("correlation of a constant sample".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Median; NaN-free input assumed.
pub fn median(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::InvalidInput("median of an empty sample".into()));
    }
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    Ok(if k % 2 == 1 {
        s[k / 2]
    } else {
        0.5 * (s[k / 2 - 1] + s[k / 2])
    })
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Composite Gauss-Legendre integration of the normal density.
    fn integrate_density(a: f64, b: f64) -> f64 {
        const NODES: [(f64, f64); 5] = [
            (0.0, 0.568_888_888_888_888_9),
            (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
            (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        ];
        let pieces = 2000;
        let h = (b - a) / pieces as f64;
        let mut total = 0.0;
        for k in 0..pieces {
            let mid = a + (k as f64 + 0.5) * h;
            for (x, w) in NODES {
                let t = mid + 0.5 * h * x;
                total += 0.5 * h * w * (-0.5 * t * t).exp();
            }
        }
        total / (2.0 * std::f64::consts::PI).sqrt()
    }

    #[test]
    fn cdf_symmetry() {
        assert_eq!(normal_cdf(0.0), 0.5);
        for x in [0.5, 1.0, 2.0, 5.0] {
            assert_abs_diff_eq!(normal_cdf(-x), 1.0 - normal_cdf(x), epsilon = 1e-14);
        }
    }

    #[test]
    fn cdf_against_integration() {
        assert_abs_diff_eq!(normal_cdf(1.644_853_626_951_472_2), 0.95, epsilon = 1e-9);
        for i in 0..25 {
            let x = -6.0 + 0.5 * i as f64;
            let oracle = if x < 0.0 {
                0.5 - integrate_density(x, 0.0)
            } else {
                0.5 + integrate_density(0.0, x)
            };
            assert_abs_diff_eq!(normal_cdf(x), oracle, epsilon = 1e-12);
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for q in [1e-8, 1e-5, 0.005, 0.025, 0.3, 0.5, 0.9, 0.975, 1.0 - 1e-8] {
            let x = normal_quantile(q).unwrap();
            assert!((normal_cdf(x) - q).abs() <= 1e-10, "{q}");
        }
        assert!(matches!(normal_quantile(0.0), Err(Error::Domain(_))));
        assert!(matches!(normal_quantile(1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn ks_single_point_and_grid() {
        assert_abs_diff_eq!(ks_distance(&[0.0], normal_cdf).unwrap(), 0.5);
        let n = 999;
        let pts: Vec<f64> = (1..=n)
            .map(|i| normal_quantile(i as f64 / (n + 1) as f64).unwrap())
            .collect();
        assert!(ks_distance(&pts, normal_cdf).unwrap() <= 1.0 / (n + 1) as f64 + 1e-9);
        assert!(ks_distance(&[], normal_cdf).is_err());
    }

    #[test]
    fn angle_stat_extremes() {
        let e1 = vec![1.0, 0.0, 0.0, 0.0];
        let e2 = vec![0.0, 1.0, 0.0, 0.0];
        let s = pairwise_angle_stats(&[e1.clone(), e2], None, 0).unwrap();
        assert_abs_diff_eq!(s[0], 0.0, epsilon = 1e-15);
        let s = pairwise_angle_stats(&[e1.clone(), e1.clone()], None, 0).unwrap();
        assert_abs_diff_eq!(s[0], 2f64.sqrt() * FRAC_PI_2, epsilon = 1e-12);
        assert!(pairwise_angle_stats(&[e1.clone(), vec![2.0, 0.0, 0.0, 0.0]], None, 0).is_err());
    }

    #[test]
    fn subsample_decodes_pairs() {
        let vs: Vec<Vec<f64>> = (0..6)
            .map(|i| {
                let a = i as f64 * 0.3;
                vec![a.cos(), a.sin(), 0.0]
            })
            .collect();
        let all = pairwise_angle_stats(&vs, None, 0).unwrap();
        let sub = pairwise_angle_stats(&vs, Some(14), 9).unwrap();
        assert_eq!(all.len(), 15);
        assert_eq!(sub.len(), 14);
        assert!(sub.iter().all(|s| all.contains(s)));
    }

    #[test]
    fn ols_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let f = ols_slope(&x, &y).unwrap();
        assert_abs_diff_eq!(f.slope, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.intercept, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.r2, 1.0, epsilon = 1e-15);
        assert_eq!(ols_slope(&x, &[5.0; 4]).unwrap().slope, 0.0);
        assert!(matches!(ols_slope(&[1.0, 1.0], &[0.0, 1.0]), Err(Error::Rank { .. })));
    }

    #[test]
    fn summaries() {
        let s = summarize_sample(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.variance, 1.0);
        assert_abs_diff_eq!(correlation(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.5]).unwrap(), 4.5 / (2.0f64 * 61.0 / 6.0).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(correlation(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), 1.0, epsilon = 1e-15);
        assert!(matches!(correlation(&[1.0, 1.0], &[0.0, 1.0]), Err(Error::Degenerate(_))));
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]).unwrap(), 2.5);
    }
}
