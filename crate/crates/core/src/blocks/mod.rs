//! Blocks: weighted hooked metric probability spaces.
//!
//! A block is never materialized as a metric space. Only two things about it
//! matter for the insertion depth: its weight `W` and the law of `D'`, the
//! distance from its hook to a point drawn from its own probability measure.

mod dist;
mod family;
mod graph;

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exactoracle::{DepthPmf, ExactBlock};
use crate::rational::{self, Rational};

pub use dist::{Distribution, Sampler};
pub use family::{
    custom_discrete_family, geometric_path_family, hooking_family, k2_family,
    uniform_segment_family, BlockFamily, CatalogGraph, CustomBlock, CustomInitial, FamilySpec,
};
pub use graph::{GraphSpec, HookedGraph};

/// Largest uniform-integer depth law expanded into an explicit pmf.
const MAX_EXPANDED_SUPPORT: u64 = 100_000;

/// A number given either as a JSON number or as an exact string such as `"1/3"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Float(f64),
    Text(String),
}

impl Num {
    pub fn exact(&self, field: &str) -> Result<Rational> {
        match self {
            Num::Float(x) => {
                rational::from_f64(*x).ok_or_else(|| invalid(field, "value must be finite"))
            }
            Num::Text(s) => {
                rational::parse(s).map_err(|_| invalid(field, format!("cannot parse {s:?}")))
            }
        }
    }
}

impl From<f64> for Num {
    fn from(x: f64) -> Self {
        Num::Float(x)
    }
}

/// Law of the within-block depth `D'`.
#[derive(Clone, Debug)]
pub enum DepthLaw {
    /// `D'` is constant.
    Point(f64),
    /// Single edge: depth 0 with probability `alpha / (alpha + fitness)`, else 1.
    Edge { alpha: f64, fitness: f64 },
    /// Uniform on `{1, ..., max}`.
    UniformInt { max: u64 },
    /// Uniform on `[0, len]`.
    UniformReal { len: f64 },
    /// Explicit finite law, sampled by binary search on its cdf.
    Table(Arc<FiniteBlock>),
}

/// A finite discrete block with an exact description and a sampling table.
#[derive(Clone, Debug)]
pub struct FiniteBlock {
    weight: f64,
    weight_exact: Rational,
    depths: Vec<f64>,
    cdf: Vec<f64>,
    pmf: DepthPmf,
    mean: f64,
    second_moment: f64,
}

impl FiniteBlock {
    /// `pmf` must carry total mass exactly one.
    pub fn new(weight: Rational, pmf: DepthPmf) -> Result<Self> {
        if !rational::is_nonnegative(&weight) {
            return Err(invalid("weight", "block weight must be nonnegative"));
        }
        if pmf.total_mass() != rational::one() {
            return Err(invalid("pmf", "depth probabilities must sum to 1"));
        }
        if pmf
            .entries()
            .iter()
            .any(|(d, _)| !rational::is_nonnegative(d))
        {
            return Err(invalid("pmf", "depths must be nonnegative"));
        }
        let mut acc = rational::zero();
        let mut cdf = Vec::with_capacity(pmf.len());
        for (_, p) in pmf.entries() {
            acc += p;
            cdf.push(rational::to_f64(&acc));
        }
        Ok(Self {
            weight: rational::to_f64(&weight),
            weight_exact: weight,
            depths: pmf
                .entries()
                .iter()
                .map(|(d, _)| rational::to_f64(d))
                .collect(),
            cdf,
            mean: rational::to_f64(&pmf.mean()),
            second_moment: rational::to_f64(&pmf.second_moment()),
            pmf,
        })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn weight_exact(&self) -> &Rational {
        &self.weight_exact
    }

    pub fn pmf(&self) -> &DepthPmf {
        &self.pmf
    }

    pub fn mean_depth(&self) -> f64 {
        self.mean
    }

    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    #[inline]
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.depths.len() == 1 {
            return self.depths[0];
        }
        let u = rng.random::<f64>();
        let k = self
            .cdf
            .partition_point(|&c| c <= u)
            .min(self.depths.len() - 1);
        self.depths[k]
    }
}

/// One realized block: its weight and the law of its within-block depth.
#[derive(Clone, Debug)]
pub struct BlockInstance {
    weight: f64,
    law: DepthLaw,
}

impl BlockInstance {
    pub fn new(weight: f64, law: DepthLaw) -> Self {
        debug_assert!(weight >= 0.0);
        Self { weight, law }
    }

    pub fn point(weight: f64, depth: f64) -> Self {
        Self::new(weight, DepthLaw::Point(depth))
    }

    pub fn table(block: Arc<FiniteBlock>) -> Self {
        Self {
            weight: block.weight(),
            law: DepthLaw::Table(block),
        }
    }

    /// Builds a finite block from an exact weight and depth pmf.
    pub fn from_pmf(weight: Rational, pmf: DepthPmf) -> Result<Self> {
        Ok(Self::table(Arc::new(FiniteBlock::new(weight, pmf)?)))
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn law(&self) -> &DepthLaw {
        &self.law
    }

    #[inline]
    pub fn sample_depth<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.law {
            DepthLaw::Point(d) => *d,
            DepthLaw::Edge { alpha, fitness } => {
                if rng.random::<f64>() * (alpha + fitness) < *fitness {
                    1.0
                } else {
                    0.0
                }
            }
            DepthLaw::UniformInt { max } => rng.random_range(1..=*max) as f64,
            DepthLaw::UniformReal { len } => rng.random::<f64>() * len,
            DepthLaw::Table(block) => block.sample(rng),
        }
    }

    pub fn mean_depth(&self) -> f64 {
        match &self.law {
            DepthLaw::Point(d) => *d,
            DepthLaw::Edge { alpha, fitness } => fitness / (alpha + fitness),
            DepthLaw::UniformInt { max } => (*max as f64 + 1.0) / 2.0,
            DepthLaw::UniformReal { len } => len / 2.0,
            DepthLaw::Table(block) => block.mean_depth(),
        }
    }

    pub fn is_discrete(&self) -> bool {
        !matches!(self.law, DepthLaw::UniformReal { .. })
    }

    /// Exact weight and depth pmf, or `None` for continuous laws.
    pub fn exact(&self) -> Option<ExactBlock> {
        let (weight, pmf) = match &self.law {
            DepthLaw::Point(d) => (
                rational::from_f64(self.weight)?,
                DepthPmf::point(rational::from_f64(*d)?),
            ),
            DepthLaw::Edge { alpha, fitness } => {
                let a = rational::from_f64(*alpha)?;
                let f = rational::from_f64(*fitness)?;
                let w = &a + &f;
                let pmf =
                    DepthPmf::from_atoms([(rational::zero(), &a / &w), (rational::one(), &f / &w)]);
                (w, pmf)
            }
            DepthLaw::UniformInt { max } => {
                if *max > MAX_EXPANDED_SUPPORT {
                    return None;
                }
                let p = Rational::new(1.into(), (*max).into());
                let pmf = DepthPmf::from_atoms(
                    (1..=*max).map(|d| (rational::integer(d as i64), p.clone())),
                );
                (rational::from_f64(self.weight)?, pmf)
            }
            DepthLaw::UniformReal { .. } => return None,
            DepthLaw::Table(block) => (block.weight_exact().clone(), block.pmf().clone()),
        };
        Some(ExactBlock { weight, pmf })
    }
}

/// Closed-form moments of a family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    /// `E[W]`
    pub e_w: f64,
    /// `E[W_0]`
    pub e_w0: f64,
    /// `E[W D']`
    pub e_wd: f64,
    /// `E[W D'^2]`
    pub e_wd2: f64,
    /// `E[W^2]`
    pub e_w2: f64,
}

impl Moments {
    /// Limiting constants `(mu, sigma2) = (E[W D'] / E[W], E[W D'^2] / E[W])`.
    pub fn limits(&self) -> (f64, f64) {
        (self.e_wd / self.e_w, self.e_wd2 / self.e_w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn r(s: &str) -> Rational {
        rational::parse(s).unwrap()
    }

    #[test]
    fn edge_law_probabilities() {
        let b = BlockInstance::new(
            2.0,
            DepthLaw::Edge {
                alpha: 1.0,
                fitness: 1.0,
            },
        );
        let e = b.exact().unwrap();
        assert_eq!(e.weight, r("2"));
        assert_eq!(e.pmf.prob(&r("0")), r("1/2"));
        assert_eq!(e.pmf.prob(&r("1")), r("1/2"));
        assert_eq!(b.mean_depth(), 0.5);
    }

    #[test]
    fn edge_with_zero_alpha_never_returns_hook() {
        let b = BlockInstance::new(
            3.0,
            DepthLaw::Edge {
                alpha: 0.0,
                fitness: 3.0,
            },
        );
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        assert!((0..10_000).all(|_| b.sample_depth(&mut rng) == 1.0));
    }

    #[test]
    fn table_rejects_unnormalized_pmf() {
        let pmf = DepthPmf::from_atoms([(r("1"), r("1/2")), (r("2"), r("1/3"))]);
        assert!(FiniteBlock::new(r("1"), pmf).is_err());
        let neg = DepthPmf::from_atoms([(r("1"), r("1"))]);
        assert!(FiniteBlock::new(r("-1"), neg).is_err());
    }

    #[test]
    fn uniform_int_exact_expansion() {
        let b = BlockInstance::new(4.0, DepthLaw::UniformInt { max: 4 });
        let e = b.exact().unwrap();
        assert_eq!(e.pmf.len(), 4);
        assert_eq!(e.pmf.total_mass(), rational::one());
        assert_eq!(e.pmf.mean(), r("5/2"));
        assert!(BlockInstance::new(1.0, DepthLaw::UniformReal { len: 1.0 })
            .exact()
            .is_none());
    }

    #[test]
    fn num_accepts_strings_and_numbers() {
        assert_eq!(Num::Text("1/3".into()).exact("x").unwrap(), r("1/3"));
        assert_eq!(Num::Float(0.25).exact("x").unwrap(), r("1/4"));
        assert!(Num::Text("x".into()).exact("x").is_err());
    }
}
