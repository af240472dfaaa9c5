//! The four subcommands. Each validates its whole configuration before any
//! sampling starts and writes output files only after every computation has
//! succeeded, so a failing run never leaves partial files behind.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rrms::couplings::{exact_bucket_pmf, theoretical_limits};
use rrms::engine::fmt17;
use rrms::exactoracle::{exact_depth_pmf, DEFAULT_CAP};
use rrms::stats::{
    clt_report, gap_report, lln_report, monte_carlo, resolve_expected_weights, McRunSpec,
    McSamples, Sampler, SummaryStats, MIN_CLT_SAMPLES, MIN_GAP_REPS,
};
use rrms::{BlockFamily, Error, FamilySpec, WeightTrace};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::{usage, CliError, Outcome};

const DEFAULT_REPS: u64 = 1000;
const DEFAULT_GAP_REPS: u64 = 2000;
const DEFAULT_SEED: u64 = 1;
const DEFAULT_EPSILON: f64 = 0.5;
const DEFAULT_LLN_TOLERANCE: f64 = 0.15;
const DEFAULT_KS_THRESHOLD: f64 = 0.10;
/// Exact pmfs agree with the bucket convolution to this total variation.
const EXACT_TV_TOLERANCE: f64 = 1e-12;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn family_of(cfg: &ExperimentConfig) -> Result<(FamilySpec, BlockFamily), CliError> {
    let spec = cfg
        .family
        .clone()
        .ok_or_else(|| usage("family", "no family given (use --family or a config file)"))?;
    let family = spec.build()?;
    Ok((spec, family))
}

fn workers(cfg: &ExperimentConfig) -> Result<usize, CliError> {
    match cfg.workers {
        Some(0) => Err(usage("workers", "workers must be at least 1")),
        Some(w) => Ok(w),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Writes `files` into the configured output directory, if any.
fn write_outputs(cfg: &ExperimentConfig, files: &[(&str, String)]) -> Result<(), CliError> {
    let Some(dir) = &cfg.out else { return Ok(()) };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(io_err(&path))?;
    }
    Ok(())
}

fn summary_json(command: &str, cfg: &ExperimentConfig, body: Value) -> String {
    let mut doc = json!({
        "command": command,
        "config": serde_json::to_value(cfg).expect("config serializes"),
        "generated_unix": unix_now(),
    });
    if let (Value::Object(doc), Value::Object(body)) = (&mut doc, body) {
        doc.extend(body);
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("summary serializes");
    text.push('\n');
    text
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Simulates `reps` replications of the depth at step `n` and checks the
/// law of large numbers and the normal limit against the theory constants.
pub fn cmd_run(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let (spec, family) = family_of(cfg)?;
    let n = cfg.n.ok_or_else(|| usage("n", "n is required"))?;
    if n < 2 {
        return Err(usage("n", "n must be at least 2"));
    }
    let reps = cfg.reps.unwrap_or(DEFAULT_REPS);
    if reps == 0 {
        return Err(usage("reps", "reps must be at least 1"));
    }
    let tolerance = cfg.lln_tolerance.unwrap_or(DEFAULT_LLN_TOLERANCE);
    if !(tolerance > 0.0) {
        return Err(usage("lln_tolerance", "lln_tolerance must be positive"));
    }
    let ks_threshold = cfg.ks_threshold.unwrap_or(DEFAULT_KS_THRESHOLD);
    if !(ks_threshold > 0.0) {
        return Err(usage("ks_threshold", "ks_threshold must be positive"));
    }
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let sampler = cfg.sampler.unwrap_or_default();
    let (mu, sigma2) = theoretical_limits(family.moments())?;
    let weights_source = match sampler {
        Sampler::Independent | Sampler::Coupled => Some(resolve_expected_weights(&family, seed)?.1),
        _ => None,
    };

    let mc = McRunSpec::new(spec, n, reps, seed, sampler).with_workers(workers(cfg)?);
    let samples = monte_carlo(&mc)?;
    let depths = samples.depths();
    let stats = SummaryStats::from_samples(&depths);
    let lln = lln_report(&depths, n, mu)?;
    let lln_pass = lln.rel_err <= tolerance;
    let clt = if depths.len() >= MIN_CLT_SAMPLES {
        Some(clt_report(&depths, n, mu, sigma2)?)
    } else {
        None
    };
    let clt_pass = clt.map(|c| c.ks_statistic <= ks_threshold);

    writeln!(
        out,
        "family {} n={n} reps={reps} sampler={sampler}",
        family.spec().kind_name()
    )
    .ok();
    writeln!(
        out,
        "mean={:.6} variance={:.6} std_err={:.6}",
        stats.mean, stats.variance, stats.std_err
    )
    .ok();
    writeln!(
        out,
        "lln: {} mu_hat={:.6} mu={:.6} rel_err={:.4} (tolerance {tolerance})",
        verdict(lln_pass),
        lln.mu_hat,
        mu,
        lln.rel_err
    )
    .ok();
    match (&clt, clt_pass) {
        (Some(c), Some(pass)) => writeln!(
            out,
            "clt: {} ks={:.4} p={:.4} sigma2_hat={:.6} sigma2={:.6} (threshold {ks_threshold})",
            verdict(pass),
            c.ks_statistic,
            c.ks_p_value,
            c.sigma2_hat,
            sigma2
        ),
        _ => writeln!(
            out,
            "clt: SKIPPED (needs at least {MIN_CLT_SAMPLES} replications)"
        ),
    }
    .ok();

    let passed = lln_pass && clt_pass.unwrap_or(true);
    let body = json!({
        "family": family.spec(),
        "moments": family.moments(),
        "mu_theory": mu,
        "sigma2_theory": sigma2,
        "expected_weights": weights_source,
        "summary": stats,
        "lln": lln,
        "lln_pass": lln_pass,
        "clt": clt,
        "clt_pass": clt_pass,
        "passed": passed,
    });
    let mut csv = String::from("rep,value\n");
    for (r, v) in depths.iter().enumerate() {
        csv.push_str(&format!("{r},{}\n", fmt17(*v)));
    }
    write_outputs(
        cfg,
        &[
            ("summary.json", summary_json("run", cfg, body)),
            ("samples.csv", csv),
        ],
    )?;
    Ok(if passed {
        Outcome::Passed
    } else {
        Outcome::DiagnosticFailure
    })
}

/// Enumerates the exact law of the depth at step `n` and compares it with
/// the bucket convolution over the same weight sequence.
pub fn cmd_exact(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let (_, family) = family_of(cfg)?;
    if !family.is_discrete() {
        return Err(usage("family", Error::NotDiscrete.to_string()));
    }
    let cap = cfg.exact_cap.unwrap_or(DEFAULT_CAP);
    let n = cfg.n.ok_or_else(|| usage("n", "n is required"))?;
    if n == 0 || n as usize > cap {
        return Err(usage("n", format!("exact mode needs 1 <= n <= {cap}")));
    }
    let n = n as usize;
    let blocks = family
        .deterministic_trace(n, cfg.sequence.as_deref())
        .map_err(|e| usage("sequence", e.to_string()))?;
    let exact_blocks = blocks
        .iter()
        .map(|b| b.exact())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| usage("family", Error::NotDiscrete.to_string()))?;
    let oracle = exact_depth_pmf(&exact_blocks, n, cap)?;
    let bucket = exact_bucket_pmf(&WeightTrace::from_blocks(blocks)?, None)?;
    let tv = rrms::rational::to_f64(&oracle.tv_distance(&bucket));
    let passed = tv < EXACT_TV_TOLERANCE;

    writeln!(out, "depth,oracle,bucket").ok();
    for (d, p) in oracle.entries() {
        writeln!(out, "{d},{p},{}", bucket.prob(d)).ok();
    }
    for (d, p) in bucket.entries() {
        if oracle.prob(d) == rrms::rational::zero() {
            writeln!(out, "{d},0,{p}").ok();
        }
    }
    writeln!(
        out,
        "tv: {} {tv:e} (tolerance {EXACT_TV_TOLERANCE:e})",
        verdict(passed)
    )
    .ok();

    let pmf: Vec<Value> = oracle
        .entries()
        .iter()
        .map(|(d, p)| json!({"depth": d.to_string(), "prob": p.to_string()}))
        .collect();
    let body = json!({
        "family": family.spec(),
        "n": n,
        "pmf": pmf,
        "mean": oracle.mean().to_string(),
        "tv_to_bucket": tv,
        "passed": passed,
    });
    write_outputs(
        cfg,
        &[
            ("summary.json", summary_json("exact", cfg, body)),
            ("pmf.csv", oracle.to_csv()),
        ],
    )?;
    Ok(if passed {
        Outcome::Passed
    } else {
        Outcome::DiagnosticFailure
    })
}

/// Coupled pairs over a grid of `n`; the exceedance probability of the
/// normalized gap should not grow with `n`.
pub fn cmd_gap(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let (spec, family) = family_of(cfg)?;
    let grid = cfg
        .grid
        .clone()
        .ok_or_else(|| usage("grid", "grid is required"))?;
    if grid.len() < 2 {
        return Err(usage("grid", "grid needs at least two values"));
    }
    if grid.iter().any(|&n| n < 2) {
        return Err(usage("grid", "grid values must be at least 2"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage("grid", "grid must be strictly increasing"));
    }
    let epsilon = cfg.epsilon.unwrap_or(DEFAULT_EPSILON);
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(usage("epsilon", "epsilon must be positive"));
    }
    let reps = cfg.reps.unwrap_or(DEFAULT_GAP_REPS);
    if reps < MIN_GAP_REPS as u64 {
        return Err(usage(
            "reps",
            format!("gap needs at least {MIN_GAP_REPS} replications"),
        ));
    }
    if let Some(s) = cfg.sampler {
        if s != Sampler::Coupled {
            return Err(usage("sampler", "gap always uses the coupled sampler"));
        }
    }
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let workers = workers(cfg)?;
    let (_, weights_source) = resolve_expected_weights(&family, seed)?;

    let mut by_n = Vec::with_capacity(grid.len());
    for (i, &n) in grid.iter().enumerate() {
        // Each grid point gets its own substream domain, so the rows are independent.
        let mc = McRunSpec::new(spec.clone(), n, reps, seed, Sampler::Coupled)
            .with_workers(workers)
            .with_domain(i as u64 + 1);
        let McSamples::Pairs(pairs) = monte_carlo(&mc)? else {
            unreachable!("coupled sampler returns pairs")
        };
        by_n.push((n, pairs));
    }
    let report = gap_report(&by_n, epsilon)?;

    writeln!(out, "n,reps,exceedances,prob,std_err").ok();
    for row in &report.rows {
        writeln!(
            out,
            "{},{},{},{:.6},{:.6}",
            row.n, row.reps, row.exceedances, row.prob, row.std_err
        )
        .ok();
    }
    writeln!(
        out,
        "gap: {} nonincreasing within 2 se (epsilon {epsilon})",
        verdict(report.nonincreasing)
    )
    .ok();

    let mut csv = String::from("n,rep,y_sum,x_sum,gap_over_sqrtlog\n");
    for (n, pairs) in &by_n {
        let root = (*n as f64).ln().sqrt();
        for (r, (y, x)) in pairs.iter().enumerate() {
            csv.push_str(&format!(
                "{n},{r},{},{},{}\n",
                fmt17(*y),
                fmt17(*x),
                fmt17((y - x).abs() / root)
            ));
        }
    }
    let body = json!({
        "family": family.spec(),
        "expected_weights": weights_source,
        "report": report,
        "passed": report.nonincreasing,
    });
    write_outputs(
        cfg,
        &[
            ("summary.json", summary_json("gap", cfg, body)),
            ("gap.csv", csv),
        ],
    )?;
    Ok(if report.nonincreasing {
        Outcome::Passed
    } else {
        Outcome::DiagnosticFailure
    })
}

/// Prints the closed-form moments and limiting constants of a family.
pub fn cmd_theory(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let (_, family) = family_of(cfg)?;
    let moments = family.moments().ok_or_else(|| {
        usage(
            "family",
            "no closed-form moments for this family; use `run` to estimate",
        )
    })?;
    let (mu, sigma2) = theoretical_limits(Some(moments))?;
    let finite = [
        moments.e_w,
        moments.e_w0,
        moments.e_wd,
        moments.e_wd2,
        moments.e_w2,
    ]
    .iter()
    .all(|x| x.is_finite());

    writeln!(out, "family {}", family.spec().kind_name()).ok();
    writeln!(out, "E[W]       = {}", moments.e_w).ok();
    writeln!(out, "E[W0]      = {}", moments.e_w0).ok();
    writeln!(out, "E[W D']    = {}", moments.e_wd).ok();
    writeln!(out, "E[W D'^2]  = {}", moments.e_wd2).ok();
    writeln!(out, "E[W^2]     = {}", moments.e_w2).ok();
    writeln!(out, "mu         = {mu}").ok();
    writeln!(out, "sigma2     = {sigma2}").ok();
    writeln!(out, "moments finite: {}", verdict(finite)).ok();

    let body = json!({
        "family": family.spec(),
        "moments": moments,
        "mu": mu,
        "sigma2": sigma2,
        "moments_finite": finite,
    });
    write_outputs(cfg, &[("summary.json", summary_json("theory", cfg, body))])?;
    Ok(if finite {
        Outcome::Passed
    } else {
        Outcome::DiagnosticFailure
    })
}
