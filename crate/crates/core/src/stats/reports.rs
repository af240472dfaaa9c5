use serde::Serialize;

use super::ks::{kolmogorov_survival, ks_critical_value, ks_statistic, normal_cdf};
use super::summary::SummaryStats;
use crate::error::{invalid, Error, Result};

/// Smallest sample accepted by [`clt_report`].
pub const MIN_CLT_SAMPLES: usize = 100;
/// Smallest per-`n` replication count accepted by [`gap_report`].
pub const MIN_GAP_REPS: usize = 500;
/// Allowed increase between consecutive exceedance estimates, in standard errors.
pub const GAP_SLACK_SE: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LlnReport {
    pub mu_hat: f64,
    pub mu_theory: f64,
    pub abs_err: f64,
    pub rel_err: f64,
}

/// `mean / ln n` against `mu`.
pub fn lln_report(samples: &[f64], n: u64, mu_theory: f64) -> Result<LlnReport> {
    if n < 2 {
        return Err(invalid("n", "n must be at least 2 so that ln n > 0"));
    }
    if samples.is_empty() {
        return Err(Error::Degenerate("no samples".into()));
    }
    let mean = SummaryStats::from_samples(samples).mean;
    let mu_hat = mean / (n as f64).ln();
    let abs_err = (mu_hat - mu_theory).abs();
    let rel_err = if mu_theory != 0.0 {
        abs_err / mu_theory.abs()
    } else {
        abs_err
    };
    Ok(LlnReport {
        mu_hat,
        mu_theory,
        abs_err,
        rel_err,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CltReport {
    pub count: usize,
    /// `mean / ln n`
    pub mu_hat: f64,
    /// `variance / ln n`
    pub sigma2_hat: f64,
    pub mu_theory: f64,
    pub sigma2_theory: f64,
    /// KS distance of `(x - mu ln n) / sqrt(sigma2 ln n)` from N(0, 1).
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    pub ks_critical_1pct: f64,
    pub normal_at_1pct: bool,
}

/// Standardizes with the theoretical constants, not the sample moments.
pub fn clt_report(
    samples: &[f64],
    n: u64,
    mu_theory: f64,
    sigma2_theory: f64,
) -> Result<CltReport> {
    if n < 2 {
        return Err(invalid("n", "n must be at least 2 so that ln n > 0"));
    }
    if !(sigma2_theory > 0.0 && sigma2_theory.is_finite()) {
        return Err(Error::Degenerate(format!(
            "sigma2 must be positive, got {sigma2_theory}"
        )));
    }
    if samples.len() < MIN_CLT_SAMPLES {
        return Err(Error::Degenerate(format!(
            "need at least {MIN_CLT_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let ln_n = (n as f64).ln();
    let stats = SummaryStats::from_samples(samples);
    let centre = mu_theory * ln_n;
    let scale = (sigma2_theory * ln_n).sqrt();
    let standardized: Vec<f64> = samples.iter().map(|x| (x - centre) / scale).collect();
    let d = ks_statistic(&standardized, normal_cdf);
    let count = samples.len();
    let critical = ks_critical_value(0.01, count as f64);
    Ok(CltReport {
        count,
        mu_hat: stats.mean / ln_n,
        sigma2_hat: stats.variance / ln_n,
        mu_theory,
        sigma2_theory,
        ks_statistic: d,
        ks_p_value: kolmogorov_survival(d * (count as f64).sqrt()),
        ks_critical_1pct: critical,
        normal_at_1pct: d < critical,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapRow {
    pub n: u64,
    pub reps: usize,
    pub exceedances: usize,
    /// Empirical `P(|y - x| / sqrt(ln n) > epsilon)`.
    pub prob: f64,
    /// Binomial standard error of `prob`.
    pub std_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub epsilon: f64,
    pub rows: Vec<GapRow>,
    /// Indices `i` where `rows[i + 1]` exceeds `rows[i]` by more than the slack.
    pub increases: Vec<usize>,
    pub nonincreasing: bool,
}

/// Exceedance table over a grid of `n`. Consecutive estimates may rise by at
/// most two standard errors of their difference.
pub fn gap_report(pairs_by_n: &[(u64, Vec<(f64, f64)>)], epsilon: f64) -> Result<GapReport> {
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon", "epsilon must be positive"));
    }
    if pairs_by_n.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(invalid("grid", "grid must be strictly increasing"));
    }
    let mut rows = Vec::with_capacity(pairs_by_n.len());
    for (n, pairs) in pairs_by_n {
        if *n < 2 {
            return Err(invalid("grid", "grid values must be at least 2"));
        }
        if pairs.len() < MIN_GAP_REPS {
            return Err(invalid(
                "reps",
                format!("need at least {MIN_GAP_REPS} replications per n"),
            ));
        }
        let root = (*n as f64).ln().sqrt();
        let exceedances = pairs
            .iter()
            .filter(|(y, x)| (y - x).abs() / root > epsilon)
            .count();
        let reps = pairs.len();
        let prob = exceedances as f64 / reps as f64;
        rows.push(GapRow {
            n: *n,
            reps,
            exceedances,
            prob,
            std_err: (prob * (1.0 - prob) / reps as f64).sqrt(),
        });
    }
    let increases: Vec<usize> = rows
        .windows(2)
        .enumerate()
        .filter(|(_, w)| {
            let slack = GAP_SLACK_SE * (w[0].std_err.powi(2) + w[1].std_err.powi(2)).sqrt();
            w[1].prob - w[0].prob > slack
        })
        .map(|(i, _)| i)
        .collect();
    Ok(GapReport {
        epsilon,
        nonincreasing: increases.is_empty(),
        increases,
        rows,
    })
}
