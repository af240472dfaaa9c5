use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocks::{BlockFamily, FamilySpec};
use crate::couplings::{
    sample_bucket_depth_streaming, sample_coupled_pair_streaming, sample_independent_approx,
    ExpectedWeights,
};
use crate::engine::final_depth;
use crate::error::{Error, Result};
use crate::rng::{substream, DOMAIN_MOMENT_ESTIMATE};

/// Block draws used when expected weights have to be estimated.
const ESTIMATE_DRAWS: usize = 1_000_000;

/// Which route produces each replication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// Run the growth process.
    #[default]
    Direct,
    /// Sum of `J_k D'_k` over a fresh trace.
    Bucket,
    /// Sum of independent `I_k D'_k`.
    Independent,
    /// Coupled `(sum J_k D'_k, sum I_k D'_k)`.
    Coupled,
}

impl std::str::FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Sampler::Direct),
            "bucket" => Ok(Sampler::Bucket),
            "independent" => Ok(Sampler::Independent),
            "coupled" => Ok(Sampler::Coupled),
            other => Err(crate::error::invalid(
                "sampler",
                format!("unknown sampler {other:?} (direct|bucket|independent|coupled)"),
            )),
        }
    }
}

impl std::fmt::Display for Sampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sampler::Direct => "direct",
            Sampler::Bucket => "bucket",
            Sampler::Independent => "independent",
            Sampler::Coupled => "coupled",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct McRunSpec {
    pub family: FamilySpec,
    pub n: u64,
    pub reps: u64,
    pub seed: u64,
    pub sampler: Sampler,
    /// Thread count; never affects the output.
    pub workers: usize,
    /// Substream domain, letting several runs share a seed without overlap.
    pub domain: u64,
}

impl McRunSpec {
    pub fn new(family: FamilySpec, n: u64, reps: u64, seed: u64, sampler: Sampler) -> Self {
        Self {
            family,
            n,
            reps,
            seed,
            sampler,
            workers: 1,
            domain: 0,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_domain(mut self, domain: u64) -> Self {
        self.domain = domain;
        self
    }
}

/// One value per replication, in replication order.
#[derive(Clone, Debug, PartialEq)]
pub enum McSamples {
    Depths(Vec<f64>),
    Pairs(Vec<(f64, f64)>),
}

impl McSamples {
    /// Depth-valued view: the `y_sum` component for coupled pairs.
    pub fn depths(&self) -> Vec<f64> {
        match self {
            McSamples::Depths(v) => v.clone(),
            McSamples::Pairs(v) => v.iter().map(|p| p.0).collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            McSamples::Depths(v) => v.len(),
            McSamples::Pairs(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Where the expected weights came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightsSource {
    ClosedForm,
    /// Frozen estimate from [`ESTIMATE_DRAWS`] block draws; biased by sampling error.
    Estimated,
}

pub fn resolve_expected_weights(
    family: &BlockFamily,
    seed: u64,
) -> Result<(ExpectedWeights, WeightsSource)> {
    match family.moments() {
        Some(m) => Ok((ExpectedWeights::from_moments(m)?, WeightsSource::ClosedForm)),
        None => {
            let mut rng = substream(seed, DOMAIN_MOMENT_ESTIMATE, 0);
            Ok((
                ExpectedWeights::estimate(family, ESTIMATE_DRAWS, &mut rng)?,
                WeightsSource::Estimated,
            ))
        }
    }
}

fn run_parallel<T, F>(spec: &McRunSpec, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers.max(1))
        .build()
        .map_err(|e| Error::Degenerate(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..spec.reps).into_par_iter().map(&job).collect())
}

/// Runs `reps` independent replications; replication `r` draws from
/// substream `(seed, domain, r)`, so the output does not depend on `workers`.
pub fn monte_carlo(spec: &McRunSpec) -> Result<McSamples> {
    if spec.n == 0 {
        return Err(crate::error::invalid("n", "n must be at least 1"));
    }
    if spec.reps == 0 {
        return Err(crate::error::invalid("reps", "reps must be at least 1"));
    }
    let family = spec.family.build()?;
    let n = spec.n as usize;
    let rng_for = |r: u64| substream(spec.seed, spec.domain, r);
    match spec.sampler {
        Sampler::Direct => run_parallel(spec, |r| final_depth(&family, spec.n, &mut rng_for(r)))
            .map(McSamples::Depths),
        Sampler::Bucket => run_parallel(spec, |r| {
            sample_bucket_depth_streaming(&family, n, &mut rng_for(r))
        })
        .map(McSamples::Depths),
        Sampler::Independent => {
            let (ew, _) = resolve_expected_weights(&family, spec.seed)?;
            run_parallel(spec, |r| {
                Ok(sample_independent_approx(n, &family, &ew, &mut rng_for(r)))
            })
            .map(McSamples::Depths)
        }
        Sampler::Coupled => {
            let (ew, _) = resolve_expected_weights(&family, spec.seed)?;
            run_parallel(spec, |r| {
                sample_coupled_pair_streaming(&family, n, &ew, &mut rng_for(r))
            })
            .map(McSamples::Pairs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::Distribution;

    fn rrt() -> FamilySpec {
        FamilySpec::K2 {
            alpha: 0.0,
            fitness: Distribution::Const { value: 1.0 },
            initial_fitness: None,
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        for sampler in [
            Sampler::Direct,
            Sampler::Bucket,
            Sampler::Independent,
            Sampler::Coupled,
        ] {
            let spec = McRunSpec::new(FamilySpec::GeometricPath { p: 0.4 }, 200, 64, 11, sampler);
            let one = monte_carlo(&spec.clone().with_workers(1)).unwrap();
            let eight = monte_carlo(&spec.with_workers(8)).unwrap();
            assert_eq!(one, eight, "{sampler:?}");
        }
    }

    #[test]
    fn rrt_n2_mean_is_one_half() {
        let spec = McRunSpec::new(rrt(), 2, 200_000, 5, Sampler::Direct);
        let depths = monte_carlo(&spec).unwrap().depths();
        let mean = depths.iter().sum::<f64>() / depths.len() as f64;
        let se = (0.25f64 / depths.len() as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se, "mean = {mean}");
        assert!(depths.iter().all(|&d| d == 0.0 || d == 1.0));
    }

    #[test]
    fn rejects_empty_runs() {
        assert!(monte_carlo(&McRunSpec::new(rrt(), 0, 10, 1, Sampler::Direct)).is_err());
        assert!(monte_carlo(&McRunSpec::new(rrt(), 10, 0, 1, Sampler::Direct)).is_err());
        assert!("nope".parse::<Sampler>().is_err());
        assert_eq!("coupled".parse::<Sampler>().unwrap(), Sampler::Coupled);
    }
}
