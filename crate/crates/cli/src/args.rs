//! Command-line surface. Flags override the matching fields of `--config`.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rrms::stats::Sampler;

use crate::config::{ExperimentConfig, FamilyFlags};
use crate::{usage, CliError};

#[derive(Debug, Parser)]
#[command(
    name = "rrms",
    version,
    about = "Insertion depth in random recursive metric spaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo depth at step n with LLN and CLT diagnostics.
    Run(CommonArgs),
    /// Exact rational depth law for small n, checked against the bucket convolution.
    Exact(CommonArgs),
    /// Exceedance of the coupled gap over a grid of n.
    Gap(CommonArgs),
    /// Closed-form moments and limiting constants.
    Theory(CommonArgs),
}

impl Command {
    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Run(a) | Command::Exact(a) | Command::Gap(a) | Command::Theory(a) => a,
        }
    }
}

#[derive(Debug, Default, clap::Args)]
pub struct CommonArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// k2 | geometric_path | uniform_segment | hooking | custom_discrete
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Fitness law, e.g. const:1 or exp:2.
    #[arg(long)]
    pub fitness: Option<String>,
    #[arg(long)]
    pub initial_fitness: Option<String>,
    /// Rate of exponential segment lengths.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Segment length law, e.g. uniform:0,2.
    #[arg(long)]
    pub weight: Option<String>,
    #[arg(long)]
    pub chi: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// JSON catalog file for hooking or custom_discrete.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// direct | bucket | independent | coupled
    #[arg(long)]
    pub sampler: Option<String>,
    /// Comma-separated values of n.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<u64>>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Comma-separated catalog indices of B_0, B_1, ... for exact mode.
    #[arg(long, value_delimiter = ',')]
    pub sequence: Option<Vec<usize>>,
}

impl CommonArgs {
    fn family_flags(&self) -> FamilyFlags {
        FamilyFlags {
            family: self.family.clone(),
            p: self.p,
            alpha: self.alpha,
            fitness: self.fitness.clone(),
            initial_fitness: self.initial_fitness.clone(),
            lambda: self.lambda,
            weight: self.weight.clone(),
            chi: self.chi,
            rho: self.rho,
            catalog: self.catalog.clone(),
        }
    }

    /// Loads `--config` (if any) and applies the flags on top of it.
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        cfg.family = self.family_flags().resolve(cfg.family.as_ref())?;
        if let Some(s) = &self.sampler {
            cfg.sampler = Some(
                s.parse::<Sampler>()
                    .map_err(|e| usage("sampler", e.to_string()))?,
            );
        }
        macro_rules! take {
            ($($field:ident),*) => {
                $(if self.$field.is_some() {
                    cfg.$field = self.$field.clone();
                })*
            };
        }
        take!(n, reps, seed, grid, epsilon, out, workers, sequence);
        Ok(cfg)
    }
}
