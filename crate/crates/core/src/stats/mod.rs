//! Monte Carlo harness and diagnostics.

mod chisq;
mod ks;
mod montecarlo;
mod reports;
mod summary;

pub use chisq::{chi_square_gof, ChiSquare};
pub use ks::{kolmogorov_survival, ks_critical_value, ks_statistic, ks_two_sample, normal_cdf};
pub use montecarlo::{
    monte_carlo, resolve_expected_weights, McRunSpec, McSamples, Sampler, WeightsSource,
};
pub use reports::{
    clt_report, gap_report, lln_report, CltReport, GapReport, GapRow, LlnReport, GAP_SLACK_SE,
    MIN_CLT_SAMPLES, MIN_GAP_REPS,
};
pub use summary::SummaryStats;
