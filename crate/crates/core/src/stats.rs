//! Aggregation and the paired Wilcoxon signed-rank test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Largest effective sample size for which the exact null distribution is used.
pub const EXACT_MAX_N: usize = 25;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("no values to aggregate")]
    EmptyInput,
    #[error("every paired difference is zero")]
    AllZeroDifferences { n_pairs: usize },
    #[error("non-finite value in sample `{0}`")]
    NonFinite(String),
}

/// Arithmetic mean and sample standard deviation (`n - 1` denominator).
pub fn mean_std(xs: &[f64]) -> Result<(f64, f64), StatsError> {
    if xs.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Ok((mean, 0.0));
    }
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    Ok((mean, (ss / (n - 1.0)).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pub instance_id: String,
    pub value_a: f64,
    pub value_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    Exact,
    NormalApprox,
}

impl WilcoxonMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            WilcoxonMethod::Exact => "exact",
            WilcoxonMethod::NormalApprox => "normal_approx",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub n_effective: usize,
    pub zeros_dropped: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    /// `min(W+, W-)`.
    pub w_statistic: f64,
    /// Two-sided.
    pub p_value: f64,
    pub method: WilcoxonMethod,
    pub significant: bool,
}

/// Paired test on `value_a - value_b`.
pub fn wilcoxon_signed_rank(pairs: &[PairedSample], alpha_level: f64) -> Result<WilcoxonResult, StatsError> {
    let mut diffs = Vec::with_capacity(pairs.len());
    for p in pairs {
        if !(p.value_a.is_finite() && p.value_b.is_finite()) {
            return Err(StatsError::NonFinite(p.instance_id.clone()));
        }
        diffs.push(p.value_a - p.value_b);
    }
    wilcoxon_differences(&diffs, alpha_level)
}

/// Ranks of `values` (1-based), averaging over ties.
///
/// Values within a relative `1e-9` of each other are treated as tied so
/// that float noise from score arithmetic does not split real ties.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && tied(values[order[i]], values[order[j]]) {
            j += 1;
        }
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

pub fn wilcoxon_differences(diffs: &[f64], alpha_level: f64) -> Result<WilcoxonResult, StatsError> {
    if diffs.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    let zeros_dropped = diffs.len() - nonzero.len();
    if nonzero.is_empty() {
        return Err(StatsError::AllZeroDifferences { n_pairs: diffs.len() });
    }
    let abs: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    // `+ 0.0` turns the empty sum's -0.0 into 0.0
    let w_plus = nonzero
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum::<f64>()
        + 0.0;
    let w_minus = nonzero
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d < 0.0)
        .map(|(_, r)| r)
        .sum::<f64>()
        + 0.0;
    let w = w_plus.min(w_minus);
    let n = nonzero.len();
    let (p_value, method) = if n <= EXACT_MAX_N {
        (exact_p(&ranks, w), WilcoxonMethod::Exact)
    } else {
        (normal_p(&ranks, w), WilcoxonMethod::NormalApprox)
    };
    Ok(WilcoxonResult {
        n_effective: n,
        zeros_dropped,
        w_plus,
        w_minus,
        w_statistic: w,
        p_value,
        method,
        significant: p_value < alpha_level,
    })
}

/// Exact two-sided p-value by counting sign assignments over rank sums.
/// Ranks are multiples of 0.5, so the DP runs over doubled ranks.
fn exact_p(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; max_sum + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let target = (w * 2.0).round() as usize;
    let tail: f64 = counts[..=target.min(max_sum)].iter().sum();
    let total = 2f64.powi(ranks.len() as i32);
    (2.0 * tail / total).min(1.0)
}

/// Normal approximation with tie correction and a 0.5 continuity correction.
fn normal_p(ranks: &[f64], w: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w - mean + 0.5) / var.sqrt()).min(0.0);
    let normal = Normal::standard();
    (2.0 * normal.cdf(z)).min(1.0)
}
