//! Experiment configuration: a JSON file plus command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use rrms::blocks::{CatalogGraph, CustomBlock, CustomInitial};
use rrms::stats::Sampler;
use rrms::{Distribution, FamilySpec};
use serde::{Deserialize, Serialize};

use crate::{usage, CliError};

/// Every field is optional so a file can hold any subset; flags win.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<Sampler>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Catalog indices of `B_0, B_1, ...` for `exact` on multi-block catalogs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<Vec<usize>>,
    /// Relative LLN tolerance for `run` (default 0.15).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lln_tolerance: Option<f64>,
    /// Largest KS statistic accepted by `run` (default 0.10).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks_threshold: Option<f64>,
    /// Largest `n` accepted by `exact` (default 6).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_cap: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| usage("config", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Family selection and parameters as given on the command line.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FamilyFlags {
    pub family: Option<String>,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub fitness: Option<String>,
    pub initial_fitness: Option<String>,
    pub lambda: Option<f64>,
    pub weight: Option<String>,
    pub chi: Option<f64>,
    pub rho: Option<f64>,
    pub catalog: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomCatalog {
    blocks: Vec<CustomBlock>,
    initial: CustomInitial,
}

fn parse_dist(field: &str, text: &str) -> Result<Distribution, CliError> {
    text.parse::<Distribution>().map_err(|e| {
        usage(
            field,
            format!("{e} (examples: const:1, exp:2, geom:0.5, uniform:0,2)"),
        )
    })
}

fn read_catalog(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

impl FamilyFlags {
    fn given(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.p.is_some() {
            out.push("p");
        }
        if self.alpha.is_some() {
            out.push("alpha");
        }
        if self.fitness.is_some() {
            out.push("fitness");
        }
        if self.initial_fitness.is_some() {
            out.push("initial-fitness");
        }
        if self.lambda.is_some() {
            out.push("lambda");
        }
        if self.weight.is_some() {
            out.push("weight");
        }
        if self.chi.is_some() {
            out.push("chi");
        }
        if self.rho.is_some() {
            out.push("rho");
        }
        if self.catalog.is_some() {
            out.push("catalog");
        }
        out
    }

    /// Merges the flags over `base`. Flags that do not belong to the chosen
    /// family are rejected.
    pub fn resolve(&self, base: Option<&FamilySpec>) -> Result<Option<FamilySpec>, CliError> {
        let kind = match (&self.family, base) {
            (Some(k), _) => k.clone(),
            (None, Some(b)) => b.kind_name().to_string(),
            (None, None) => {
                if let Some(flag) = self.given().first() {
                    return Err(usage("family", format!("--{flag} given without --family")));
                }
                return Ok(None);
            }
        };
        let base = base.filter(|b| b.kind_name() == kind);
        let allowed: &[&str] = match kind.as_str() {
            "k2" => &["alpha", "fitness", "initial-fitness"],
            "geometric_path" => &["p"],
            "uniform_segment" => &["lambda", "weight"],
            "hooking" => &["chi", "rho", "catalog"],
            "custom_discrete" => &["catalog"],
            other => {
                return Err(usage(
                    "family",
                    format!("unknown family {other:?} (k2|geometric_path|uniform_segment|hooking|custom_discrete)"),
                ))
            }
        };
        if let Some(flag) = self.given().into_iter().find(|f| !allowed.contains(f)) {
            return Err(usage(
                flag,
                format!("--{flag} does not apply to family {kind}"),
            ));
        }

        let spec = match kind.as_str() {
            "k2" => {
                let (b_alpha, b_fit, b_init) = match base {
                    Some(FamilySpec::K2 {
                        alpha,
                        fitness,
                        initial_fitness,
                    }) => (Some(*alpha), Some(fitness.clone()), initial_fitness.clone()),
                    _ => (None, None, None),
                };
                let fitness = match &self.fitness {
                    Some(t) => parse_dist("fitness", t)?,
                    None => b_fit.unwrap_or(Distribution::Const { value: 1.0 }),
                };
                let initial_fitness = match &self.initial_fitness {
                    Some(t) => Some(parse_dist("initial-fitness", t)?),
                    None => b_init,
                };
                FamilySpec::K2 {
                    alpha: self.alpha.or(b_alpha).unwrap_or(0.0),
                    fitness,
                    initial_fitness,
                }
            }
            "geometric_path" => {
                let b_p = match base {
                    Some(FamilySpec::GeometricPath { p }) => Some(*p),
                    _ => None,
                };
                let p = self
                    .p
                    .or(b_p)
                    .ok_or_else(|| usage("p", "geometric_path needs --p"))?;
                FamilySpec::GeometricPath { p }
            }
            "uniform_segment" => {
                let (b_w, b_init) = match base {
                    Some(FamilySpec::UniformSegment {
                        weight,
                        initial_weight,
                    }) => (Some(weight.clone()), initial_weight.clone()),
                    _ => (None, None),
                };
                let weight = match (&self.weight, self.lambda) {
                    (Some(_), Some(_)) => {
                        return Err(usage(
                            "lambda",
                            "give either --lambda or --weight, not both",
                        ))
                    }
                    (Some(t), None) => parse_dist("weight", t)?,
                    (None, Some(lambda)) => Distribution::Exponential { lambda },
                    (None, None) => b_w.ok_or_else(|| {
                        usage("lambda", "uniform_segment needs --lambda or --weight")
                    })?,
                };
                FamilySpec::UniformSegment {
                    weight,
                    initial_weight: b_init,
                }
            }
            "hooking" => {
                let (b_cat, b_chi, b_rho) = match base {
                    Some(FamilySpec::Hooking { catalog, chi, rho }) => {
                        (Some(catalog.clone()), Some(*chi), Some(*rho))
                    }
                    _ => (None, None, None),
                };
                let catalog = match &self.catalog {
                    Some(path) => serde_json::from_str::<Vec<CatalogGraph>>(&read_catalog(path)?)
                        .map_err(|e| usage("catalog", e.to_string()))?,
                    None => b_cat.ok_or_else(|| usage("catalog", "hooking needs --catalog"))?,
                };
                FamilySpec::Hooking {
                    catalog,
                    chi: self.chi.or(b_chi).unwrap_or(0.0),
                    rho: self.rho.or(b_rho).unwrap_or(1.0),
                }
            }
            _ => match (&self.catalog, base) {
                (Some(path), _) => {
                    let c: CustomCatalog = serde_json::from_str(&read_catalog(path)?)
                        .map_err(|e| usage("catalog", e.to_string()))?;
                    FamilySpec::CustomDiscrete {
                        blocks: c.blocks,
                        initial: c.initial,
                    }
                }
                (None, Some(b)) => b.clone(),
                (None, None) => return Err(usage("catalog", "custom_discrete needs --catalog")),
            },
        };
        Ok(Some(spec))
    }
}
