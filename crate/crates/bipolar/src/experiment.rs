//! Desk-scale statistical experiments: tail exponents, path-length
//! exponents, the recursive pmf identities, and distributional symmetry
//! checks, all deterministic functions of (parameters, master seed).

use crate::busemann::{increment_pairs, uibhbot_increment_stream, WindowParams};
use crate::distance::{self, Mode};
use crate::error::Error;
use crate::map::OrientedMap;
use crate::sampler;
use crate::stats::{self, MeanSe};
use crate::Result;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// One named estimate with its uncertainty and (optionally) the acceptance
/// band it is judged against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    pub std_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<(f64, f64)>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    Info,
}

impl Estimate {
    pub fn banded(name: &str, value: f64, se: f64, expected: f64, band: (f64, f64)) -> Estimate {
        let verdict = if value >= band.0 && value <= band.1 {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Estimate {
            name: name.into(),
            value,
            std_error: se,
            expected: Some(expected),
            band: Some(band),
            verdict,
        }
    }

    /// Pass when |value - expected| <= sigmas * se.
    pub fn within_se(name: &str, value: f64, se: f64, expected: f64, sigmas: f64) -> Estimate {
        let half = sigmas * se;
        Estimate::banded(name, value, se, expected, (expected - half, expected + half))
    }

    pub fn info(name: &str, value: f64, se: f64) -> Estimate {
        Estimate {
            name: name.into(),
            value,
            std_error: se,
            expected: None,
            band: None,
            verdict: Verdict::Info,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CensoringStats {
    pub requested: usize,
    pub censored: usize,
}

/// A machine-readable experiment report with enough provenance to re-run
/// bit-identically (everything except `wall_clock_secs` is deterministic in
/// the parameters and seed).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub name: String,
    pub mode: Option<Mode>,
    pub parameters: serde_json::Value,
    pub master_seed: u64,
    pub estimates: Vec<Estimate>,
    pub censoring: Option<CensoringStats>,
    pub wall_clock_secs: f64,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.estimates.iter().all(|e| e.verdict != Verdict::Fail)
    }

    /// Serialization with the wall clock zeroed, for determinism checks.
    pub fn canonical_json(&self) -> String {
        let mut clone = self.clone();
        clone.wall_clock_secs = 0.0;
        serde_json::to_string_pretty(&clone).expect("report serializes")
    }
}

fn finish_report(
    name: &str,
    mode: Option<Mode>,
    parameters: serde_json::Value,
    master_seed: u64,
    estimates: Vec<Estimate>,
    censoring: Option<CensoringStats>,
    start: std::time::Instant,
) -> ExperimentReport {
    ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        name: name.into(),
        mode,
        parameters,
        master_seed,
        estimates,
        censoring,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    }
}

/// Increment sample pool with both increments per stabilized replica.
pub struct IncrementPool {
    pub mode: Mode,
    pub positive: Vec<i64>,
    pub negative: Vec<i64>,
    pub censored: usize,
    pub requested: usize,
}

pub fn collect_increments(
    mode: Mode,
    n_samples: usize,
    params: &WindowParams,
    seed: u64,
) -> IncrementPool {
    let pairs = increment_pairs(mode, n_samples, params, seed);
    let mut positive = Vec::with_capacity(n_samples);
    let mut negative = Vec::with_capacity(n_samples);
    let mut censored = 0usize;
    for p in pairs {
        match p {
            Some((pos, neg)) => {
                positive.push(pos);
                negative.push(neg);
            }
            None => censored += 1,
        }
    }
    IncrementPool { mode, positive, negative, censored, requested: n_samples }
}

impl IncrementPool {
    pub fn censoring(&self) -> CensoringStats {
        CensoringStats { requested: self.requested, censored: self.censored }
    }

    /// Empirical pmf of the negative-side increment law f.
    pub fn f_hat(&self) -> BTreeMap<i64, f64> {
        pmf(&self.negative)
    }

    /// Empirical pmf of the positive-side increment law g.
    pub fn g_hat(&self) -> BTreeMap<i64, f64> {
        pmf(&self.positive)
    }
}

fn pmf(values: &[i64]) -> BTreeMap<i64, f64> {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / values.len() as f64))
        .collect()
}

/// Tail exponent fits of the one-sided positive-side increment and the
/// two-sided negative-side increment, plus the two-sided/one-sided tail
/// ratio over the fitted range.
pub fn tail_exponent(
    mode: Mode,
    n_samples: usize,
    params: &WindowParams,
    seed: u64,
    band_one: (f64, f64),
    band_ratio: (f64, f64),
) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    if n_samples < 10_000 {
        return Err(Error::Precondition("tail fitting needs at least 10^4 samples".into()));
    }
    let pool = collect_increments(mode, n_samples, params, seed);
    let expected = match mode {
        Mode::Ldp => 2.0 / 3.0,
        Mode::Sdp => 4.0 / 3.0,
    };
    // One-sided tail of the positive-side increment: the longest-path law
    // has X(1)-X(0) <= -1 (left tail), the shortest-path law is fitted on
    // its right tail.
    let one_sided: Vec<f64> = match mode {
        Mode::Ldp => pool.positive.iter().map(|&x| -x as f64).collect(),
        Mode::Sdp => pool.positive.iter().map(|&x| x as f64).collect(),
    };
    let two_sided: Vec<f64> = pool.negative.iter().map(|&x| (x.abs()) as f64).collect();
    let (lo, hi) = (0.01, 0.10);
    let hill_one = stats::hill_fit(&one_sided, lo, hi)?;
    let hill_two = stats::hill_fit(&two_sided, lo, hi)?;
    let rank_one = stats::rank_regression_fit(&one_sided, lo, hi)?;
    let rank_two = stats::rank_regression_fit(&two_sided, lo, hi)?;
    let ratio = tail_ratio(&two_sided, &one_sided, lo, hi)?;

    let estimates = vec![
        Estimate::banded("one_sided_hill", hill_one.exponent, hill_one.std_error, expected, band_one),
        Estimate::banded("two_sided_hill", hill_two.exponent, hill_two.std_error, expected, band_one),
        Estimate::info("one_sided_rank", rank_one.exponent, rank_one.std_error),
        Estimate::info("two_sided_rank", rank_two.exponent, rank_two.std_error),
        Estimate::banded("tail_ratio", ratio.mean, ratio.se, 2.0, band_ratio),
    ];
    Ok(finish_report(
        "tail",
        Some(mode),
        serde_json::json!({
            "n_samples": n_samples,
            "initial_window": params.initial_window,
            "max_window": params.max_window,
            "probes": params.probes,
            "fit_range": [lo, hi],
        }),
        seed,
        estimates,
        Some(pool.censoring()),
        start,
    ))
}

/// Mean ratio of the two empirical tails over thresholds spanning the
/// common fitted range.
fn tail_ratio(two_sided: &[f64], one_sided: &[f64], lo: f64, hi: f64) -> Result<MeanSe> {
    let mut a = two_sided.to_vec();
    a.sort_by(|p, q| q.partial_cmp(p).unwrap());
    let na = a.len() as f64;
    let i_lo = ((a.len() as f64) * lo) as usize;
    let i_hi = ((a.len() as f64) * hi) as usize;
    if i_hi <= i_lo + 3 {
        return Err(Error::InsufficientData("tail ratio range too small".into()));
    }
    let mut b = one_sided.to_vec();
    b.sort_by(|p, q| q.partial_cmp(p).unwrap());
    let nb = b.len() as f64;
    let mut ratios = Vec::new();
    let grid = 24;
    for t in 0..grid {
        let idx = i_lo + (i_hi - i_lo) * t / grid;
        let x = a[idx];
        if x <= 1.0 {
            continue;
        }
        let pa = a.partition_point(|&v| v >= x) as f64 / na;
        let pb = b.partition_point(|&v| v >= x) as f64 / nb;
        if pb > 0.0 {
            ratios.push(pa / pb);
        }
    }
    if ratios.len() < 5 {
        return Err(Error::InsufficientData("tail ratio grid degenerate".into()));
    }
    Ok(stats::mean_se(&ratios))
}

/// The atom identity 3 - 6 g(-1)^2 - f(0) = 0 for shortest paths, with a
/// delta-method confidence interval from the joint indicator covariance.
pub fn kappa_estimate(
    n_samples: usize,
    params: &WindowParams,
    seed: u64,
) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    let pool = collect_increments(Mode::Sdp, n_samples, params, seed);
    let n = pool.positive.len();
    if n < 100 {
        return Err(Error::InsufficientData("too few stabilized replicas".into()));
    }
    let nf = n as f64;
    let f0 = pool.negative.iter().filter(|&&x| x == 0).count() as f64 / nf;
    let g1 = pool.positive.iter().filter(|&&x| x == -1).count() as f64 / nf;
    let kappa = 3.0 - 6.0 * g1 * g1 - f0;
    // Delta method: gradient (-1, -12 g1) against the covariance of the
    // indicator pair (1{neg=0}, 1{pos=-1}).
    let mut cov = [[0.0f64; 2]; 2];
    for i in 0..n {
        let a = f64::from(pool.negative[i] == 0) - f0;
        let b = f64::from(pool.positive[i] == -1) - g1;
        cov[0][0] += a * a;
        cov[0][1] += a * b;
        cov[1][1] += b * b;
    }
    cov[0][0] /= nf - 1.0;
    cov[0][1] /= nf - 1.0;
    cov[1][1] /= nf - 1.0;
    let grad = (-1.0, -12.0 * g1);
    let var = grad.0 * grad.0 * cov[0][0]
        + 2.0 * grad.0 * grad.1 * cov[0][1]
        + grad.1 * grad.1 * cov[1][1];
    let se = (var / nf).sqrt();
    let f0_se = (f0 * (1.0 - f0) / nf).sqrt();
    let g1_se = (g1 * (1.0 - g1) / nf).sqrt();
    let estimates = vec![
        Estimate::within_se("kappa", kappa, se, 0.0, 3.0),
        Estimate::banded(
            "f0_zscore",
            f0 / f0_se.max(1e-12),
            0.0,
            f64::INFINITY,
            (5.0, f64::INFINITY),
        ),
        Estimate::banded(
            "g_neg1_zscore",
            g1 / g1_se.max(1e-12),
            0.0,
            f64::INFINITY,
            (5.0, f64::INFINITY),
        ),
        Estimate::info("f0", f0, f0_se),
        Estimate::info("g_neg1", g1, g1_se),
    ];
    Ok(finish_report(
        "kappa",
        Some(Mode::Sdp),
        serde_json::json!({
            "n_samples": n_samples,
            "initial_window": params.initial_window,
            "max_window": params.max_window,
            "probes": params.probes,
        }),
        seed,
        estimates,
        Some(pool.censoring()),
        start,
    ))
}

/// The longest-path aggregate atom identity
/// 3 g(-1) - f(-1) - (1 + f(0))/2 - 1 = 0.
pub fn ldp_aggregate_identity(
    n_samples: usize,
    params: &WindowParams,
    seed: u64,
) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    let pool = collect_increments(Mode::Ldp, n_samples, params, seed);
    let n = pool.positive.len();
    if n < 100 {
        return Err(Error::InsufficientData("too few stabilized replicas".into()));
    }
    let nf = n as f64;
    let g1 = pool.positive.iter().filter(|&&x| x == -1).count() as f64 / nf;
    let fneg1 = pool.negative.iter().filter(|&&x| x == -1).count() as f64 / nf;
    let f0 = pool.negative.iter().filter(|&&x| x == 0).count() as f64 / nf;
    let value = 3.0 * g1 - fneg1 - (1.0 + f0) / 2.0 - 1.0;
    // Delta method on (1{pos=-1}, 1{neg=-1}, 1{neg=0}) with gradient
    // (3, -1, -1/2).
    let grad = [3.0, -1.0, -0.5];
    let mut cov = [[0.0f64; 3]; 3];
    for i in 0..n {
        let v = [
            f64::from(pool.positive[i] == -1) - g1,
            f64::from(pool.negative[i] == -1) - fneg1,
            f64::from(pool.negative[i] == 0) - f0,
        ];
        for a in 0..3 {
            for b in 0..3 {
                cov[a][b] += v[a] * v[b];
            }
        }
    }
    let mut var = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            var += grad[a] * grad[b] * cov[a][b] / (nf - 1.0);
        }
    }
    let se = (var / nf).sqrt();
    let estimates = vec![
        Estimate::within_se("ldp_aggregate_identity", value, se, 0.0, 3.0),
        Estimate::info("g_neg1", g1, (g1 * (1.0 - g1) / nf).sqrt()),
        Estimate::info("f_neg1", fneg1, (fneg1 * (1.0 - fneg1) / nf).sqrt()),
        Estimate::info("f0", f0, (f0 * (1.0 - f0) / nf).sqrt()),
    ];
    Ok(finish_report(
        "ldp-identity",
        Some(Mode::Ldp),
        serde_json::json!({
            "n_samples": n_samples,
            "initial_window": params.initial_window,
            "max_window": params.max_window,
            "probes": params.probes,
        }),
        seed,
        estimates,
        Some(pool.censoring()),
        start,
    ))
}

/// Residual of the one-step recursive pmf equation per (x, y) cell, with
/// bootstrap standard errors and a truncation budget folded in.
pub fn recursive_residual(
    mode: Mode,
    x_range: std::ops::RangeInclusive<i64>,
    y_range: std::ops::RangeInclusive<i64>,
    n_samples: usize,
    params: &WindowParams,
    seed: u64,
    sigmas: f64,
) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    let pool = collect_increments(mode, n_samples, params, seed);
    let n = pool.positive.len();
    if n < 1000 {
        return Err(Error::InsufficientData("too few stabilized replicas".into()));
    }
    let pairs: Vec<(i64, i64)> = pool
        .negative
        .iter()
        .zip(pool.positive.iter())
        .map(|(&neg, &pos)| (neg, pos))
        .collect();
    let cells: Vec<(i64, i64)> = x_range
        .clone()
        .flat_map(|x| y_range.clone().map(move |y| (x, y)))
        .collect();
    let point = residual_vector(mode, &pairs, &cells);
    // Bootstrap over replicas.
    let reps = 200;
    let mut boot_acc = vec![Vec::with_capacity(reps); cells.len()];
    let mut rng = crate::rng::stream_rng(seed, u64::MAX);
    let mut resample = vec![(0i64, 0i64); pairs.len()];
    for _ in 0..reps {
        use rand::Rng;
        for slot in resample.iter_mut() {
            *slot = pairs[rng.gen_range(0..pairs.len())];
        }
        let r = residual_vector(mode, &resample, &cells);
        for (acc, v) in boot_acc.iter_mut().zip(r) {
            acc.push(v);
        }
    }
    // Truncation budget: the convolution sums are truncated to the
    // observed support, so the unobserved tail mass bounds the remainder.
    let tail_mass = 3.0 / n as f64;
    let mut estimates = Vec::new();
    for (i, &(x, y)) in cells.iter().enumerate() {
        let m = boot_acc[i].iter().sum::<f64>() / reps as f64;
        let se = (boot_acc[i].iter().map(|v| (v - m).powi(2)).sum::<f64>()
            / (reps as f64 - 1.0))
            .sqrt();
        let tol = sigmas * se + tail_mass;
        estimates.push(Estimate::banded(
            &format!("residual[x={x},y={y}]"),
            point[i],
            se,
            0.0,
            (-tol, tol),
        ));
    }
    Ok(finish_report(
        "recursive",
        Some(mode),
        serde_json::json!({
            "n_samples": n_samples,
            "x_range": [*x_range.start(), *x_range.end()],
            "y_range": [*y_range.start(), *y_range.end()],
            "initial_window": params.initial_window,
            "max_window": params.max_window,
            "probes": params.probes,
            "bootstrap": reps,
            "sigmas": sigmas,
        }),
        seed,
        estimates,
        Some(pool.censoring()),
        start,
    ))
}

/// LHS - RHS of the mode's recursive equation at each cell, using plug-in
/// empirical pmfs.
fn residual_vector(mode: Mode, pairs: &[(i64, i64)], cells: &[(i64, i64)]) -> Vec<f64> {
    let n = pairs.len() as f64;
    let mut f: BTreeMap<i64, f64> = BTreeMap::new();
    let mut g: BTreeMap<i64, f64> = BTreeMap::new();
    for &(neg, pos) in pairs {
        *f.entry(neg).or_default() += 1.0 / n;
        *g.entry(pos).or_default() += 1.0 / n;
    }
    let fv = |x: i64| f.get(&x).copied().unwrap_or(0.0);
    let gv = |y: i64| g.get(&y).copied().unwrap_or(0.0);
    let f_lo = f.keys().next().copied().unwrap_or(0);
    let f_hi = f.keys().next_back().copied().unwrap_or(0);
    cells
        .iter()
        .map(|&(x, y)| {
            let lhs = 3.0 * fv(x) * gv(y);
            let rhs = match mode {
                Mode::Ldp => {
                    // Cells have y <= -1.
                    let mut s = fv(x) * fv(y);
                    let mut conv = 0.0;
                    for j in 1..=(-y - 1) {
                        conv += gv(y + j) * gv(-j);
                    }
                    s += fv(x) * conv;
                    if y == -1 {
                        let mut tail = 0.0;
                        for j in 0..=(f_hi - x - 1).max(-1) {
                            tail += fv(j + x + 1) * fv(-j);
                        }
                        s += tail + gv(-x - 1);
                    }
                    s
                }
                Mode::Sdp => {
                    // Cells have y >= -1.
                    let mut conv = 0.0;
                    for j in -1..=(y + 1) {
                        conv += gv(j) * gv(y - j);
                    }
                    let mut s = fv(x) * (fv(y) + conv);
                    if y == -1 {
                        let mut tail = 0.0;
                        let mut j = -2;
                        while j >= f_lo {
                            tail += fv(j) * fv(x - j - 1);
                            j -= 1;
                        }
                        s += tail + gv(-1) * gv(-1) * fv(x + 1) + gv(x - 1);
                    }
                    s
                }
            };
            lhs - rhs
        })
        .collect()
}

/// The cubic characteristic-function identity F^3 - K F^2 + 3F - 1 = 0 on
/// a small-t grid, with bootstrap bands.
pub fn cubic_residual(
    mode: Mode,
    t_grid: &[f64],
    n_samples: usize,
    params: &WindowParams,
    seed: u64,
) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    let pool = collect_increments(mode, n_samples, params, seed);
    let n = pool.positive.len();
    if n < 1000 {
        return Err(Error::InsufficientData("too few stabilized replicas".into()));
    }
    let nf = n as f64;
    let f0 = pool.negative.iter().filter(|&&x| x == 0).count() as f64 / nf;
    let g1 = pool.positive.iter().filter(|&&x| x == -1).count() as f64 / nf;
    let residual_at = |neg: &[i64], f0: f64, g1: f64, t: f64| -> f64 {
        let f_hat: f64 =
            neg.iter().map(|&x| (t * x as f64).cos()).sum::<f64>() / neg.len() as f64;
        let k = match mode {
            Mode::Ldp => -f0 + (3.0 + f0) * t.cos(),
            Mode::Sdp => {
                f0 + (3.0 + 2.0 * g1 * g1 - f0) * t.cos() - 2.0 * g1 * g1 * (2.0 * t).cos()
            }
        };
        f_hat.powi(3) - k * f_hat.powi(2) + 3.0 * f_hat - 1.0
    };
    let mut estimates = Vec::new();
    let reps = 120;
    let mut rng = crate::rng::stream_rng(seed, u64::MAX - 1);
    for &t in t_grid {
        let point = residual_at(&pool.negative, f0, g1, t);
        let mut boots = Vec::with_capacity(reps);
        for _ in 0..reps {
            use rand::Rng;
            let mut neg = Vec::with_capacity(n);
            let mut pos_m1 = 0usize;
            let mut neg_0 = 0usize;
            for _ in 0..n {
                let i = rng.gen_range(0..n);
                neg.push(pool.negative[i]);
                neg_0 += usize::from(pool.negative[i] == 0);
                pos_m1 += usize::from(pool.positive[i] == -1);
            }
            boots.push(residual_at(&neg, neg_0 as f64 / nf, pos_m1 as f64 / nf, t));
        }
        let m = boots.iter().sum::<f64>() / reps as f64;
        let se = (boots.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (reps as f64 - 1.0))
            .sqrt()
            .max(1e-12);
        let tol = 4.0 * se;
        estimates.push(Estimate::banded(
            &format!("cubic_residual[t={t}]"),
            point,
            se,
            0.0,
            (-tol, tol),
        ));
    }
    Ok(finish_report(
        "cubic",
        Some(mode),
        serde_json::json!({
            "n_samples": n_samples,
            "t_grid": t_grid,
            "initial_window": params.initial_window,
            "max_window": params.max_window,
            "probes": params.probes,
        }),
        seed,
        estimates,
        Some(pool.censoring()),
        start,
    ))
}

/// Distributional self-similarity: X(k)/k^z vs X(2k)/(2k)^z as a
/// two-sample test, where block sums of stabilized increments realize the
/// profile at the two scales.
pub fn self_similarity(
    mode: Mode,
    k: usize,
    n_samples: usize,
    params: &WindowParams,
    seed: u64,
    p_threshold: f64,
) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    assert!(k >= 8);
    let pool = collect_increments(mode, n_samples, params, seed);
    let n = pool.positive.len();
    let z = match mode {
        Mode::Ldp => 1.5,
        Mode::Sdp => 0.75,
    };
    let need = 3 * k;
    if n < 40 * need {
        return Err(Error::InsufficientData(format!(
            "{n} stabilized replicas cannot fill enough blocks of {need}"
        )));
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut it = pool.positive.iter();
    loop {
        let block1: Vec<i64> = it.by_ref().take(k).copied().collect();
        let block2: Vec<i64> = it.by_ref().take(2 * k).copied().collect();
        if block2.len() < 2 * k {
            break;
        }
        a.push(block1.iter().sum::<i64>() as f64 / (k as f64).powf(z));
        b.push(block2.iter().sum::<i64>() as f64 / (2.0 * k as f64).powf(z));
    }
    let ks = stats::ks_two_sample(&a, &b)?;
    // Calibration on exact stable laws at the same sample sizes.
    let alpha = 1.0 / z;
    let c1 = stats::sample_symmetric_stable(alpha, a.len(), seed ^ 0xa5a5);
    let c2 = stats::sample_symmetric_stable(alpha, b.len(), seed ^ 0x5a5a);
    let calib = stats::ks_two_sample(&c1, &c2)?;
    let estimates = vec![
        Estimate::banded("self_similarity_p", ks.p_value, 0.0, 1.0, (p_threshold, 1.0)),
        Estimate::info("self_similarity_stat", ks.statistic, 0.0),
        Estimate::banded("calibration_p", calib.p_value, 0.0, 1.0, (p_threshold, 1.0)),
    ];
    Ok(finish_report(
        "self-sim",
        Some(mode),
        serde_json::json!({
            "k": k,
            "n_samples": n_samples,
            "scaling_exponent": z,
            "initial_window": params.initial_window,
            "max_window": params.max_window,
            "probes": params.probes,
        }),
        seed,
        estimates,
        Some(pool.censoring()),
        start,
    ))
}

/// Distributional symmetry of the negative-side increment, adjacent
/// negative-increment decorrelation, and the half-plane comparison.
pub fn symmetry_experiment(
    mode: Mode,
    n_samples: usize,
    params: &WindowParams,
    seed: u64,
    p_threshold: f64,
) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    let pool = collect_increments(mode, n_samples, params, seed);
    let neg: Vec<f64> = pool.negative.iter().map(|&x| x as f64).collect();
    let neg_flipped: Vec<f64> = neg.iter().map(|x| -x).collect();
    let ks = stats::ks_two_sample(&neg, &neg_flipped)?;

    // Adjacent negative increments from K=2 profiles.
    let n_corr = (n_samples / 10).clamp(200, 4000);
    let corr_pairs: Vec<(f64, f64)> = (0..n_corr as u64)
        .into_par_iter()
        .filter_map(|r| {
            crate::busemann::estimate_profile_stream(mode, 2, params, seed ^ 0xc0ffee, r)
                .ok()
                .map(|p| (p.increment(-1) as f64, p.increment(0) as f64))
        })
        .collect();
    let corr = stats::correlation_bootstrap(&corr_pairs, 200, seed)?;

    // Half-plane increments against the negative-side law.
    let n_hp = (n_samples / 10).clamp(200, 4000);
    let hp: Vec<f64> = (0..n_hp as u64)
        .into_par_iter()
        .filter_map(|r| {
            uibhbot_increment_stream(mode, 16, params, seed ^ 0xb0a7, r)
                .ok()
                .map(|x| x as f64)
        })
        .collect();
    let hp_ks = stats::ks_two_sample(&hp, &neg)?;

    let estimates = vec![
        Estimate::banded("negative_symmetry_p", ks.p_value, 0.0, 1.0, (p_threshold, 1.0)),
        Estimate::within_se("adjacent_negative_correlation", corr.mean, corr.se, 0.0, 3.0),
        Estimate::banded("half_plane_match_p", hp_ks.p_value, 0.0, 1.0, (p_threshold, 1.0)),
        Estimate::info("half_plane_samples", hp.len() as f64, 0.0),
    ];
    Ok(finish_report(
        "symmetry",
        Some(mode),
        serde_json::json!({
            "n_samples": n_samples,
            "initial_window": params.initial_window,
            "max_window": params.max_window,
            "probes": params.probes,
        }),
        seed,
        estimates,
        Some(pool.censoring()),
        start,
    ))
}

/// Cell statistics used by the path-exponent regressions.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CellStats {
    pub n: usize,
    pub ldp_max: u32,
    /// max over lower-boundary sources of the min distance to the upper
    /// boundary.
    pub sdp_upper_stat: Option<u32>,
    /// max over right-of-root lower-boundary targets of the shortest path
    /// from the root tail.
    pub sdp_lower_stat: Option<u32>,
}

pub fn cell_stats(map: &OrientedMap) -> Result<CellStats> {
    let ldp_max = distance::max_xdp(map, Mode::Ldp)?;
    let sdp_upper_stat = distance::max_xdp(map, Mode::Sdp).ok();
    let seg = map.boundary_segments()?;
    let root = map.root_edge.expect("cell has a root");
    let x0 = map.edges[root].tail;
    let field = distance::distance_field(map, Mode::Sdp, x0)?;
    let mut best: Option<u32> = None;
    for &e in &seg.lower_right {
        let v = map.edges[e].head;
        if let Some(d) = field.get(v) {
            best = Some(best.map_or(d, |b| b.max(d)));
        }
    }
    Ok(CellStats {
        n: map.oriented_edge_count().saturating_sub(1),
        ldp_max,
        sdp_upper_stat,
        sdp_lower_stat: best,
    })
}

/// Regression of the log median path statistic against log cell size.
pub fn path_exponent_cell(
    mode: Mode,
    sizes: &[usize],
    reps: usize,
    seed: u64,
    band: (f64, f64),
) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    if sizes.len() < 2 {
        return Err(Error::Precondition("need at least two sizes to regress".into()));
    }
    if reps < 20 {
        return Err(Error::Precondition("need at least 20 reps per size".into()));
    }
    let mut points_main = Vec::new();
    let mut points_lower = Vec::new();
    for (si, &n) in sizes.iter().enumerate() {
        let stats_for_size: Vec<CellStats> = (0..reps as u64)
            .into_par_iter()
            .map(|r| {
                let map = sampler::sample_cell_stream(n, seed, ((si as u64) << 32) | r);
                cell_stats(&map).expect("cell stats")
            })
            .collect();
        let main: Vec<f64> = stats_for_size
            .iter()
            .filter_map(|s| match mode {
                Mode::Ldp => Some(s.ldp_max as f64),
                Mode::Sdp => s.sdp_upper_stat.map(|v| v as f64),
            })
            .collect();
        points_main.push(((n as f64).ln(), median(&main).ln()));
        if mode == Mode::Sdp {
            let lower: Vec<f64> = stats_for_size
                .iter()
                .filter_map(|s| s.sdp_lower_stat.map(|v| v as f64))
                .collect();
            points_lower.push(((n as f64).ln(), median(&lower).ln()));
        }
    }
    let expected = match mode {
        Mode::Ldp => 0.75,
        Mode::Sdp => 0.375,
    };
    let reg = stats::linear_regression(&points_main)?;
    let mut estimates = vec![Estimate::banded(
        match mode {
            Mode::Ldp => "ldp_cell_slope",
            Mode::Sdp => "sdp_cell_upper_slope",
        },
        reg.slope,
        reg.slope_se,
        expected,
        band,
    )];
    if mode == Mode::Sdp {
        let reg2 = stats::linear_regression(&points_lower)?;
        estimates.push(Estimate::banded(
            "sdp_cell_lower_slope",
            reg2.slope,
            reg2.slope_se,
            expected,
            band,
        ));
    }
    Ok(finish_report(
        "cell-path",
        Some(mode),
        serde_json::json!({ "sizes": sizes, "reps": reps }),
        seed,
        estimates,
        None,
        start,
    ))
}

/// Regressions over marked Boltzmann maps: source-to-sink longest path
/// (slope 3/2), the boundary shortest-path statistic (slope 3/4), and
/// edge count (slope 2).
pub fn boltzmann_exponent(
    r_list: &[usize],
    reps: usize,
    seed: u64,
    band_ldp: (f64, f64),
    band_sdp: (f64, f64),
    band_edges: (f64, f64),
) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    let mut pts_ldp = Vec::new();
    let mut pts_sdp_direct = Vec::new();
    let mut pts_sdp_boundary = Vec::new();
    let mut pts_edges = Vec::new();
    for (ri, &r) in r_list.iter().enumerate() {
        let samples: Vec<(f64, f64, f64, f64)> = (0..reps as u64)
            .into_par_iter()
            .map(|rep| {
                let (map, _mark) = sampler::sample_boltzmann_marked_stream(
                    r,
                    seed,
                    ((ri as u64) << 32) | rep,
                )
                .expect("marked sampler is exact");
                let right = sampler::right_boundary_vertices(&map).expect("right boundary");
                let (source, sink) = (right[0], *right.last().unwrap());
                let ldp = distance::xdp(&map, Mode::Ldp, source, sink)
                    .expect("fields")
                    .expect("sink reachable") as f64;
                let sdp_direct = distance::xdp(&map, Mode::Sdp, source, sink)
                    .expect("fields")
                    .expect("sink reachable") as f64;
                let field = distance::distance_field(&map, Mode::Sdp, source).expect("field");
                let sdp_boundary =
                    right.iter().filter_map(|&y| field.get(y)).max().unwrap_or(0) as f64;
                (ldp, sdp_direct, sdp_boundary, map.edge_count() as f64)
            })
            .collect();
        let lr = (r as f64).ln();
        pts_ldp.push((lr, median(&samples.iter().map(|s| s.0).collect::<Vec<_>>()).ln()));
        pts_sdp_direct
            .push((lr, median(&samples.iter().map(|s| s.1).collect::<Vec<_>>()).ln()));
        pts_sdp_boundary
            .push((lr, median(&samples.iter().map(|s| s.2).collect::<Vec<_>>()).ln()));
        pts_edges.push((lr, median(&samples.iter().map(|s| s.3).collect::<Vec<_>>()).ln()));
    }
    let reg_ldp = stats::linear_regression(&pts_ldp)?;
    let reg_sdp_d = stats::linear_regression(&pts_sdp_direct)?;
    let reg_sdp_b = stats::linear_regression(&pts_sdp_boundary)?;
    let reg_edges = stats::linear_regression(&pts_edges)?;
    let estimates = vec![
        Estimate::banded("boltzmann_ldp_slope", reg_ldp.slope, reg_ldp.slope_se, 1.5, band_ldp),
        Estimate::banded(
            "boltzmann_sdp_boundary_slope",
            reg_sdp_b.slope,
            reg_sdp_b.slope_se,
            0.75,
            band_sdp,
        ),
        Estimate::info("boltzmann_sdp_direct_slope", reg_sdp_d.slope, reg_sdp_d.slope_se),
        Estimate::banded(
            "boltzmann_edges_slope",
            reg_edges.slope,
            reg_edges.slope_se,
            2.0,
            band_edges,
        ),
    ];
    Ok(finish_report(
        "boltzmann",
        None,
        serde_json::json!({ "r_list": r_list, "reps": reps }),
        seed,
        estimates,
        None,
        start,
    ))
}

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Estimator self-tests: synthetic heavy-tail recovery must pass before
/// map-based experiments are trusted.
pub fn estimator_selftest(seed: u64) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    let mut estimates = Vec::new();
    for (name, nu) in [("pareto_2_3", 2.0 / 3.0), ("pareto_4_3", 4.0 / 3.0)] {
        let data = stats::sample_pareto(nu, 100_000, seed);
        let fit = stats::hill_fit(&data, 0.01, 0.1)?;
        estimates.push(Estimate::within_se(
            &format!("hill_{name}"),
            fit.exponent,
            fit.std_error,
            nu,
            4.0,
        ));
    }
    let stable = stats::sample_symmetric_stable(2.0 / 3.0, 100_000, seed ^ 1);
    let abs: Vec<f64> = stable.iter().map(|x| x.abs()).collect();
    let fit = stats::hill_fit(&abs, 0.01, 0.1)?;
    estimates.push(Estimate::banded(
        "hill_stable_2_3",
        fit.exponent,
        fit.std_error,
        2.0 / 3.0,
        (0.55, 0.78),
    ));
    Ok(finish_report("selftest", None, serde_json::json!({}), seed, estimates, None, start))
}
