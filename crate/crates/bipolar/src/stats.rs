//! Estimators and test statistics for the Monte Carlo experiments: tail
//! index fitting, two-sample distance, least squares, bootstrap, and
//! synthetic heavy-tailed samplers for estimator self-tests.

use crate::error::Error;
use crate::rng::stream_rng;
use crate::Result;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Gamma(2/3), used for reporting the predicted tail constants.
pub const GAMMA_TWO_THIRDS: f64 = 1.354_117_939_426_400_4;
/// Gamma(1/3).
pub const GAMMA_ONE_THIRD: f64 = 2.678_938_534_707_747_6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailEstimator {
    Hill,
    RankRegression,
}

/// A fitted tail exponent with its standard error and fitting range.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailFit {
    pub estimator: TailEstimator,
    pub exponent: f64,
    pub std_error: f64,
    /// Order-statistic range used, as fractions of the sample size.
    pub range: (f64, f64),
    pub sample_count: usize,
}

/// Hill estimator of the tail index on the top order statistics between
/// fractions `lo` and `hi` of the positive part of `data`.
///
/// With x_(1) >= ... >= x_(n) and k upper order statistics,
/// alpha_hat = k / sum_{i<=k} ln(x_(i) / x_(k+1)).
pub fn hill_fit(data: &[f64], lo: f64, hi: f64) -> Result<TailFit> {
    let mut xs: Vec<f64> = data.iter().copied().filter(|x| *x > 0.0).collect();
    if xs.len() < 50 {
        return Err(Error::InsufficientData(format!(
            "{} positive tail samples",
            xs.len()
        )));
    }
    xs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let n = xs.len();
    let k = ((n as f64 * hi) as usize).clamp(10, n - 1);
    let k_lo = ((n as f64 * lo) as usize).max(1);
    let _ = k_lo;
    let threshold = xs[k];
    if threshold <= 0.0 {
        return Err(Error::InsufficientData("tail threshold not positive".into()));
    }
    let sum_log: f64 = xs[..k].iter().map(|x| (x / threshold).ln()).sum();
    if sum_log <= 0.0 {
        return Err(Error::InsufficientData("degenerate tail".into()));
    }
    let alpha = k as f64 / sum_log;
    Ok(TailFit {
        estimator: TailEstimator::Hill,
        exponent: alpha,
        std_error: alpha / (k as f64).sqrt(),
        range: (lo, hi),
        sample_count: data.len(),
    })
}

/// Rank-plot regression: least squares of log empirical tail probability
/// against log threshold over the order statistics between fractions
/// `lo` and `hi`; the slope estimates -exponent.
pub fn rank_regression_fit(data: &[f64], lo: f64, hi: f64) -> Result<TailFit> {
    let mut xs: Vec<f64> = data.iter().copied().filter(|x| *x > 0.0).collect();
    if xs.len() < 50 {
        return Err(Error::InsufficientData(format!(
            "{} positive tail samples",
            xs.len()
        )));
    }
    xs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let n = xs.len();
    let i_lo = ((n as f64 * lo) as usize).max(1);
    let i_hi = ((n as f64 * hi) as usize).min(n - 1).max(i_lo + 10);
    let mut pts = Vec::with_capacity(i_hi - i_lo);
    for i in i_lo..i_hi {
        if xs[i] > 0.0 && xs[i] < xs[0] {
            // P[X > x_(i)] ~ (i+1)/n, thin duplicates by skipping ties.
            if i > i_lo && xs[i] == xs[i - 1] {
                continue;
            }
            pts.push((xs[i].ln(), ((i + 1) as f64 / n as f64).ln()));
        }
    }
    if pts.len() < 5 {
        return Err(Error::InsufficientData("too few distinct tail points".into()));
    }
    let reg = linear_regression(&pts)?;
    Ok(TailFit {
        estimator: TailEstimator::RankRegression,
        exponent: -reg.slope,
        std_error: reg.slope_se,
        range: (lo, hi),
        sample_count: data.len(),
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

/// Ordinary least squares on (x, y) pairs.
pub fn linear_regression(points: &[(f64, f64)]) -> Result<Regression> {
    let n = points.len();
    if n < 2 {
        return Err(Error::InsufficientData("regression needs at least 2 points".into()));
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("regression abscissae are constant".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let resid_ss: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let slope_se = if n > 2 {
        (resid_ss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(Regression { slope, intercept, slope_se })
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsTest> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("empty sample for the two-sample test".into()));
    }
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(|p, q| p.partial_cmp(q).unwrap());
    xb.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (na, nb) = (xa.len(), xb.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = xa[i].min(xb[j]);
        while i < na && xa[i] <= x {
            i += 1;
        }
        while j < nb && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na as f64 * nb as f64) / (na as f64 + nb as f64);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64).powi(2) * lambda * lambda).exp();
        p += if k % 2 == 1 { 2.0 * term } else { -2.0 * term };
    }
    Ok(KsTest { statistic: d, p_value: p.clamp(0.0, 1.0) })
}

/// Mean, standard error, and count.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

pub fn mean_se(data: &[f64]) -> MeanSe {
    let n = data.len();
    let mean = data.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)
    } else {
        0.0
    };
    MeanSe { mean, se: (var / n as f64).sqrt(), n }
}

/// Pearson correlation with a bootstrap standard error.
pub fn correlation_bootstrap(
    pairs: &[(f64, f64)],
    reps: usize,
    seed: u64,
) -> Result<MeanSe> {
    let corr = |idx: Option<&[usize]>| -> f64 {
        let get = |i: usize| match idx {
            Some(ix) => pairs[ix[i]],
            None => pairs[i],
        };
        let n = pairs.len() as f64;
        let (mut mx, mut my) = (0.0, 0.0);
        for i in 0..pairs.len() {
            let (x, y) = get(i);
            mx += x;
            my += y;
        }
        mx /= n;
        my /= n;
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for i in 0..pairs.len() {
            let (x, y) = get(i);
            sxx += (x - mx).powi(2);
            syy += (y - my).powi(2);
            sxy += (x - mx) * (y - my);
        }
        sxy / (sxx * syy).sqrt()
    };
    if pairs.len() < 10 {
        return Err(Error::InsufficientData("too few pairs for correlation".into()));
    }
    let point = corr(None);
    let mut rng = stream_rng(seed, 0);
    let mut boots = Vec::with_capacity(reps);
    let mut idx = vec![0usize; pairs.len()];
    for _ in 0..reps {
        for slot in idx.iter_mut() {
            *slot = rng.gen_range(0..pairs.len());
        }
        boots.push(corr(Some(&idx)));
    }
    let se = mean_se(&boots).se * (reps as f64).sqrt().max(1.0);
    // mean_se's se is sd/sqrt(reps); the bootstrap SE is the sd itself.
    Ok(MeanSe { mean: point, se, n: pairs.len() })
}

/// Bootstrap standard deviation of a statistic of an i.i.d. sample.
pub fn bootstrap_se<T: Copy + Send + Sync>(
    data: &[T],
    stat: impl Fn(&[T]) -> f64,
    reps: usize,
    seed: u64,
) -> f64 {
    let mut rng = stream_rng(seed, 1);
    let mut values = Vec::with_capacity(reps);
    let mut resample = vec![data[0]; data.len()];
    for _ in 0..reps {
        for slot in resample.iter_mut() {
            *slot = data[rng.gen_range(0..data.len())];
        }
        values.push(stat(&resample));
    }
    let m = values.iter().sum::<f64>() / reps as f64;
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (reps as f64 - 1.0)).sqrt()
}

/// Pareto(nu) sampler: P[X > x] = x^{-nu} for x >= 1.
pub fn sample_pareto(nu: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, 2);
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen_range(f64::EPSILON..1.0);
            u.powf(-1.0 / nu)
        })
        .collect()
}

/// Symmetric alpha-stable sampler (Chambers-Mallows-Stuck).
pub fn sample_symmetric_stable(alpha: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, 3);
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2);
            let w: f64 = -rng.gen_range(f64::EPSILON..1.0f64).ln();
            (alpha * u).sin() / u.cos().powf(1.0 / alpha)
                * ((u * (1.0 - alpha)).cos() / w).powf((1.0 - alpha) / alpha)
        })
        .collect()
}

/// One-sided alpha-stable subordinator sampler, alpha in (0,1).
pub fn sample_stable_subordinator(alpha: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, 4);
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen_range(f64::EPSILON..std::f64::consts::PI);
            let w: f64 = -rng.gen_range(f64::EPSILON..1.0f64).ln();
            let a = ((1.0 - alpha) * u).sin().powf((1.0 - alpha) / alpha)
                * (alpha * u).sin()
                / u.sin().powf(1.0 / alpha);
            (a / w).powf((1.0 - alpha) / alpha) * a.powf(1.0 - (1.0 - alpha) / alpha)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hill_recovers_pareto_index() {
        for nu in [0.6667f64, 1.3333] {
            let data = sample_pareto(nu, 100_000, 7);
            let fit = hill_fit(&data, 0.01, 0.1).unwrap();
            assert!(
                (fit.exponent - nu).abs() < 4.0 * fit.std_error + 0.02,
                "nu {nu}: {fit:?}"
            );
            let rr = rank_regression_fit(&data, 0.01, 0.1).unwrap();
            assert!((rr.exponent - nu).abs() < 0.1, "nu {nu}: {rr:?}");
        }
    }

    #[test]
    fn ks_same_law_passes_different_laws_fails() {
        let a = sample_pareto(1.0, 4000, 1);
        let b = sample_pareto(1.0, 4000, 2);
        let c = sample_pareto(2.0, 4000, 3);
        assert!(ks_two_sample(&a, &b).unwrap().p_value > 0.001);
        assert!(ks_two_sample(&a, &c).unwrap().p_value < 0.001);
    }

    #[test]
    fn regression_exact_line() {
        let pts: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, 3.0 + 2.0 * i as f64)).collect();
        let r = linear_regression(&pts).unwrap();
        assert!((r.slope - 2.0).abs() < 1e-12);
        assert!((r.intercept - 3.0).abs() < 1e-12);
        assert!(r.slope_se < 1e-12);
    }

    #[test]
    fn stable_samplers_heavy_tail() {
        let s = sample_symmetric_stable(2.0 / 3.0, 50_000, 5);
        let abs: Vec<f64> = s.iter().map(|x| x.abs()).collect();
        let fit = hill_fit(&abs, 0.01, 0.1).unwrap();
        assert!((fit.exponent - 2.0 / 3.0).abs() < 0.08, "{fit:?}");
        let sub = sample_stable_subordinator(2.0 / 3.0, 50_000, 6);
        assert!(sub.iter().all(|x| *x > 0.0));
        let fit2 = hill_fit(&sub, 0.01, 0.1).unwrap();
        assert!((fit2.exponent - 2.0 / 3.0).abs() < 0.08, "{fit2:?}");
    }
}
