use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dist::{Distribution, Sampler};
use super::graph::{GraphSpec, HookedGraph};
use super::{BlockInstance, DepthLaw, FiniteBlock, Moments, Num};
use crate::error::{invalid, Error, Result};
use crate::exactoracle::DepthPmf;
use crate::rational::{self, Rational};

const PROB_TOLERANCE: f64 = 1e-12;

/// Serializable description of a block family, as it appears in experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    content = "params",
    rename_all = "snake_case",
    deny_unknown_fields
)]
pub enum FamilySpec {
    /// Single-edge blocks with preferential attachment `alpha` and additive fitness.
    K2 {
        alpha: f64,
        fitness: Distribution,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial_fitness: Option<Distribution>,
    },
    /// Paths of geometric length, latches uniform over vertices.
    GeometricPath { p: f64 },
    /// Line segments `[0, W]` with uniform measure.
    UniformSegment {
        weight: Distribution,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial_weight: Option<Distribution>,
    },
    /// Hooking networks with vertex weights `chi * deg(v) + rho`.
    Hooking {
        catalog: Vec<CatalogGraph>,
        chi: f64,
        rho: f64,
    },
    /// Explicit finite blocks.
    CustomDiscrete {
        blocks: Vec<CustomBlock>,
        initial: CustomInitial,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogGraph {
    pub graph: GraphSpec,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomBlock {
    pub weight: Num,
    /// `(depth, probability)` atoms.
    pub pmf: Vec<(Num, Num)>,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomInitial {
    pub weight: Num,
    pub pmf: Vec<(Num, Num)>,
}

impl FamilySpec {
    pub fn build(&self) -> Result<BlockFamily> {
        match self {
            FamilySpec::K2 {
                alpha,
                fitness,
                initial_fitness,
            } => k2_family(*alpha, fitness.clone(), initial_fitness.clone()),
            FamilySpec::GeometricPath { p } => geometric_path_family(*p),
            FamilySpec::UniformSegment {
                weight,
                initial_weight,
            } => uniform_segment_family(weight.clone(), initial_weight.clone()),
            FamilySpec::Hooking { catalog, chi, rho } => {
                hooking_family(catalog.clone(), *chi, *rho)
            }
            FamilySpec::CustomDiscrete { blocks, initial } => {
                custom_discrete_family(blocks.clone(), initial.clone())
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            FamilySpec::K2 { .. } => "k2",
            FamilySpec::GeometricPath { .. } => "geometric_path",
            FamilySpec::UniformSegment { .. } => "uniform_segment",
            FamilySpec::Hooking { .. } => "hooking",
            FamilySpec::CustomDiscrete { .. } => "custom_discrete",
        }
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Edge {
        alpha: f64,
        fitness: Sampler,
        initial_fitness: Sampler,
        deterministic: bool,
    },
    GeometricPath {
        length: Sampler,
    },
    Segment {
        weight: Sampler,
        initial: Sampler,
    },
    Catalog {
        blocks: Vec<Arc<FiniteBlock>>,
        initials: Vec<Arc<FiniteBlock>>,
        cdf: Vec<f64>,
        initial_cdf: Vec<f64>,
    },
}

/// A law over blocks: a distinguished initial block and i.i.d. followers.
#[derive(Clone, Debug)]
pub struct BlockFamily {
    spec: FamilySpec,
    kind: Kind,
    moments: Option<Moments>,
}

fn pick<R: Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> usize {
    if cdf.len() == 1 {
        return 0;
    }
    let u = rng.random::<f64>() * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

fn cumulative(field: &str, probs: &[f64]) -> Result<Vec<f64>> {
    if probs.is_empty() {
        return Err(invalid(field, "catalog must not be empty"));
    }
    if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(invalid(field, "catalog probabilities must be nonnegative"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROB_TOLERANCE {
        return Err(invalid(
            field,
            format!("catalog probabilities sum to {total}, not 1"),
        ));
    }
    let mut acc = 0.0;
    Ok(probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect())
}

fn catalog_moments(
    blocks: &[Arc<FiniteBlock>],
    initials: &[Arc<FiniteBlock>],
    probs: &[f64],
) -> Moments {
    let avg = |f: &dyn Fn(&FiniteBlock) -> f64, set: &[Arc<FiniteBlock>], probs: &[f64]| -> f64 {
        set.iter().zip(probs).map(|(b, p)| p * f(b)).sum()
    };
    let initial_probs: Vec<f64> = if initials.len() == blocks.len() {
        probs.to_vec()
    } else {
        vec![1.0]
    };
    Moments {
        e_w: avg(&|b| b.weight(), blocks, probs),
        e_w0: avg(&|b| b.weight(), initials, &initial_probs),
        e_wd: avg(&|b| b.weight() * b.mean_depth(), blocks, probs),
        e_wd2: avg(&|b| b.weight() * b.second_moment(), blocks, probs),
        e_w2: avg(&|b| b.weight() * b.weight(), blocks, probs),
    }
}

/// Trees with preferential attachment and additive fitness: `W = alpha + A`.
pub fn k2_family(
    alpha: f64,
    fitness: Distribution,
    initial_fitness: Option<Distribution>,
) -> Result<BlockFamily> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(invalid("alpha", "alpha must be nonnegative"));
    }
    fitness.validate("fitness")?;
    if !fitness.is_nonnegative() {
        return Err(invalid("fitness", "fitness must be nonnegative"));
    }
    if fitness.mass_at_zero() >= 1.0 - PROB_TOLERANCE {
        return Err(invalid("fitness", "fitness must not be identically 0"));
    }
    let initial = initial_fitness.clone().unwrap_or_else(|| fitness.clone());
    initial.validate("initial_fitness")?;
    if !initial.is_strictly_positive() {
        return Err(invalid(
            "initial_fitness",
            "initial fitness must be strictly positive",
        ));
    }
    let e_a = fitness.mean();
    let moments = Moments {
        e_w: alpha + e_a,
        e_w0: initial.mean(),
        e_wd: e_a,
        e_wd2: e_a,
        e_w2: alpha * alpha + 2.0 * alpha * e_a + fitness.moment(2),
    };
    let deterministic = fitness.constant_value().is_some() && initial.constant_value().is_some();
    Ok(BlockFamily {
        spec: FamilySpec::K2 {
            alpha,
            fitness: fitness.clone(),
            initial_fitness,
        },
        kind: Kind::Edge {
            alpha,
            fitness: fitness.sampler()?,
            initial_fitness: initial.sampler()?,
            deterministic,
        },
        moments: Some(moments),
    })
}

/// Paths with `Geometric(p)` edges; latches uniform over the non-hook vertices.
pub fn geometric_path_family(p: f64) -> Result<BlockFamily> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", "p must lie in (0,1)"));
    }
    let length = Distribution::Geometric { p };
    Ok(BlockFamily {
        spec: FamilySpec::GeometricPath { p },
        kind: Kind::GeometricPath {
            length: length.sampler()?,
        },
        moments: Some(Moments {
            e_w: 1.0 / p,
            e_w0: 1.0 / p,
            e_wd: 1.0 / (p * p),
            e_wd2: (2.0 - p) / (p * p * p),
            e_w2: (2.0 - p) / (p * p),
        }),
    })
}

/// Line segments `[0, W]`; `D'` is uniform on the segment.
pub fn uniform_segment_family(
    weight: Distribution,
    initial_weight: Option<Distribution>,
) -> Result<BlockFamily> {
    weight.validate("weight")?;
    if !weight.is_nonnegative() {
        return Err(invalid("weight", "segment lengths must be nonnegative"));
    }
    if weight.mean() <= 0.0 {
        return Err(invalid("weight", "E[W] must be positive"));
    }
    let initial = initial_weight.clone().unwrap_or_else(|| weight.clone());
    initial.validate("initial_weight")?;
    if !initial.is_strictly_positive() {
        return Err(invalid(
            "initial_weight",
            "initial segment length must be strictly positive; supply initial_weight",
        ));
    }
    Ok(BlockFamily {
        spec: FamilySpec::UniformSegment {
            weight: weight.clone(),
            initial_weight,
        },
        kind: Kind::Segment {
            weight: weight.sampler()?,
            initial: initial.sampler()?,
        },
        moments: Some(Moments {
            e_w: weight.mean(),
            e_w0: initial.mean(),
            e_wd: weight.moment(2) / 2.0,
            e_wd2: weight.moment(3) / 3.0,
            e_w2: weight.moment(2),
        }),
    })
}

fn hooking_block(
    graph: &HookedGraph,
    chi: &Rational,
    rho: &Rational,
    initial: bool,
) -> Result<FiniteBlock> {
    let distances = graph.hook_distances();
    let mut total = rational::zero();
    let mut atoms = Vec::with_capacity(graph.vertex_count());
    for (v, distance) in distances.iter().enumerate() {
        let degree = rational::integer(graph.degree(v) as i64);
        let mass = if v == graph.hook() && !initial {
            chi * &degree
        } else {
            chi * &degree + rho
        };
        if !rational::is_nonnegative(&mass) {
            return Err(invalid(
                "rho",
                format!("vertex {v} gets negative mass {mass}"),
            ));
        }
        total += &mass;
        let depth = rational::integer(distance.unwrap_or(0) as i64);
        atoms.push((depth, mass));
    }
    if total <= rational::zero() {
        return Err(invalid("catalog", "block weight must be positive"));
    }
    let pmf = DepthPmf::from_atoms(atoms.into_iter().map(|(d, m)| (d, m / &total)));
    FiniteBlock::new(total, pmf)
}

/// Hooking networks. Non-initial blocks lose `rho` at the hook, which is fused
/// into the latch; the initial block keeps every vertex's full mass.
pub fn hooking_family(catalog: Vec<CatalogGraph>, chi: f64, rho: f64) -> Result<BlockFamily> {
    if !(chi.is_finite() && chi >= 0.0) {
        return Err(invalid("chi", "chi must be nonnegative"));
    }
    if !(rho.is_finite() && chi + rho > 0.0) {
        return Err(invalid("rho", "chi + rho must be positive"));
    }
    let probs: Vec<f64> = catalog.iter().map(|c| c.prob).collect();
    let cdf = cumulative("catalog", &probs)?;
    let chi_r = rational::from_f64(chi).ok_or_else(|| invalid("chi", "must be finite"))?;
    let rho_r = rational::from_f64(rho).ok_or_else(|| invalid("rho", "must be finite"))?;
    let mut blocks = Vec::with_capacity(catalog.len());
    let mut initials = Vec::with_capacity(catalog.len());
    for entry in &catalog {
        let graph = HookedGraph::from_spec(&entry.graph)?;
        blocks.push(Arc::new(hooking_block(&graph, &chi_r, &rho_r, false)?));
        initials.push(Arc::new(hooking_block(&graph, &chi_r, &rho_r, true)?));
    }
    let moments = catalog_moments(&blocks, &initials, &probs);
    Ok(BlockFamily {
        spec: FamilySpec::Hooking { catalog, chi, rho },
        kind: Kind::Catalog {
            blocks,
            initials,
            initial_cdf: cdf.clone(),
            cdf,
        },
        moments: Some(moments),
    })
}

fn custom_block(field: &str, weight: &Num, pmf: &[(Num, Num)]) -> Result<FiniteBlock> {
    let weight = weight.exact(&format!("{field}.weight"))?;
    if pmf.is_empty() {
        return Err(invalid(&format!("{field}.pmf"), "pmf must not be empty"));
    }
    let atoms = pmf
        .iter()
        .map(|(d, p)| {
            Ok((
                d.exact(&format!("{field}.pmf"))?,
                p.exact(&format!("{field}.pmf"))?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    if atoms
        .iter()
        .any(|(d, p)| !rational::is_nonnegative(d) || !rational::is_nonnegative(p))
    {
        return Err(invalid(
            &format!("{field}.pmf"),
            "depths and probabilities must be nonnegative",
        ));
    }
    let mass: Rational = atoms.iter().map(|(_, p)| p.clone()).sum();
    if (rational::to_f64(&mass) - 1.0).abs() > PROB_TOLERANCE {
        return Err(invalid(
            &format!("{field}.pmf"),
            format!("probabilities sum to {}, not 1", rational::to_f64(&mass)),
        ));
    }
    // renormalize exactly so rounding in decimal inputs cannot leak into the oracles
    let pmf = DepthPmf::from_atoms(atoms.into_iter().map(|(d, p)| (d, p / &mass)));
    FiniteBlock::new(weight, pmf).map_err(|e| match e {
        Error::InvalidParameter { message, .. } => invalid(field, message),
        other => other,
    })
}

/// Explicit finite blocks drawn with the listed probabilities.
pub fn custom_discrete_family(
    blocks: Vec<CustomBlock>,
    initial: CustomInitial,
) -> Result<BlockFamily> {
    let probs: Vec<f64> = blocks.iter().map(|b| b.prob).collect();
    let cdf = cumulative("blocks", &probs)?;
    let built = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| custom_block(&format!("blocks[{i}]"), &b.weight, &b.pmf).map(Arc::new))
        .collect::<Result<Vec<_>>>()?;
    let first = custom_block("initial", &initial.weight, &initial.pmf)?;
    if first.weight() <= 0.0 {
        return Err(Error::NonPositiveInitialWeight(first.weight()));
    }
    let initials = vec![Arc::new(first)];
    let moments = catalog_moments(&built, &initials, &probs);
    if moments.e_w <= 0.0 {
        return Err(invalid("blocks", "E[W] must be positive"));
    }
    Ok(BlockFamily {
        spec: FamilySpec::CustomDiscrete { blocks, initial },
        kind: Kind::Catalog {
            blocks: built,
            initials,
            cdf,
            initial_cdf: vec![1.0],
        },
        moments: Some(moments),
    })
}

impl BlockFamily {
    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    pub fn moments(&self) -> Option<&Moments> {
        self.moments.as_ref()
    }

    /// Samples `B_0`. Every built-in family guarantees `W_0 > 0`.
    pub fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> BlockInstance {
        match &self.kind {
            Kind::Edge {
                initial_fitness, ..
            } => BlockInstance::point(initial_fitness.sample(rng), 0.0),
            Kind::GeometricPath { length } => {
                let w = length.sample(rng);
                BlockInstance::new(w, DepthLaw::UniformInt { max: w as u64 })
            }
            Kind::Segment { initial, .. } => {
                let w = initial.sample(rng);
                BlockInstance::new(w, DepthLaw::UniformReal { len: w })
            }
            Kind::Catalog {
                initials,
                initial_cdf,
                ..
            } => BlockInstance::table(initials[pick(initial_cdf, rng)].clone()),
        }
    }

    /// Samples one of the i.i.d. blocks `B_1, B_2, ...`.
    #[inline]
    pub fn sample_block<R: Rng + ?Sized>(&self, rng: &mut R) -> BlockInstance {
        match &self.kind {
            Kind::Edge { alpha, fitness, .. } => {
                let a = fitness.sample(rng);
                BlockInstance::new(
                    alpha + a,
                    DepthLaw::Edge {
                        alpha: *alpha,
                        fitness: a,
                    },
                )
            }
            Kind::GeometricPath { length } => {
                let w = length.sample(rng);
                BlockInstance::new(w, DepthLaw::UniformInt { max: w as u64 })
            }
            Kind::Segment { weight, .. } => {
                let w = weight.sample(rng);
                BlockInstance::new(w, DepthLaw::UniformReal { len: w })
            }
            Kind::Catalog { blocks, cdf, .. } => {
                BlockInstance::table(blocks[pick(cdf, rng)].clone())
            }
        }
    }

    /// Whether every block has a finite discrete depth law.
    pub fn is_discrete(&self) -> bool {
        !matches!(self.kind, Kind::Segment { .. })
    }

    /// A fixed block sequence `B_0, ..., B_{n-1}` for the exact oracles.
    ///
    /// Catalog families take `sequence[k]` as the catalog index of `B_k`
    /// (the last entry repeats); a single-entry catalog needs no sequence.
    pub fn deterministic_trace(
        &self,
        n: usize,
        sequence: Option<&[usize]>,
    ) -> Result<Vec<BlockInstance>> {
        match &self.kind {
            Kind::Segment { .. } => Err(Error::NotDiscrete),
            Kind::GeometricPath { .. } => Err(Error::RandomWeights(
                "geometric path lengths are random".into(),
            )),
            Kind::Edge { deterministic, .. } => {
                if !deterministic {
                    return Err(Error::RandomWeights("fitness must be constant".into()));
                }
                // constant laws never touch the generator
                let mut rng = crate::rng::substream(0, 0, 0);
                let mut out = vec![self.sample_initial(&mut rng)];
                out.extend((1..n).map(|_| self.sample_block(&mut rng)));
                Ok(out)
            }
            Kind::Catalog {
                blocks, initials, ..
            } => {
                let seq: Vec<usize> = match sequence {
                    Some(s) if !s.is_empty() => s.to_vec(),
                    _ if blocks.len() == 1 && initials.len() == 1 => vec![0],
                    _ => {
                        return Err(Error::RandomWeights(
                            "catalog has several blocks; pass an explicit sequence".into(),
                        ))
                    }
                };
                let index = |k: usize| seq[k.min(seq.len() - 1)];
                let first = index(0);
                let initial = initials.get(first).ok_or_else(|| {
                    invalid("sequence", format!("initial index {first} out of range"))
                })?;
                let mut out = vec![BlockInstance::table(initial.clone())];
                for k in 1..n {
                    let i = index(k);
                    let b = blocks.get(i).ok_or_else(|| {
                        invalid("sequence", format!("block index {i} out of range"))
                    })?;
                    out.push(BlockInstance::table(b.clone()));
                }
                Ok(out)
            }
        }
    }
}
