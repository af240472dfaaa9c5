//! Closed-form scalar distributions used for weights and fitnesses.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::Distribution as _;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const PMF_TOLERANCE: f64 = 1e-12;

/// A distribution descriptor with known raw moments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    Const {
        value: f64,
    },
    Exponential {
        lambda: f64,
    },
    /// Geometric on `{1, 2, ...}` with `P(X = k) = p (1 - p)^(k - 1)`.
    Geometric {
        p: f64,
    },
    Uniform {
        low: f64,
        high: f64,
    },
    Finite {
        values: Vec<f64>,
        probs: Vec<f64>,
    },
}

impl Distribution {
    pub fn validate(&self, field: &str) -> Result<()> {
        match self {
            Distribution::Const { value } => {
                if !value.is_finite() {
                    return Err(invalid(field, "constant must be finite"));
                }
            }
            Distribution::Exponential { lambda } => {
                if !(lambda.is_finite() && *lambda > 0.0) {
                    return Err(invalid(field, "exponential rate must be positive"));
                }
            }
            Distribution::Geometric { p } => {
                if !(*p > 0.0 && *p <= 1.0) {
                    return Err(invalid(field, "geometric p must lie in (0,1]"));
                }
            }
            Distribution::Uniform { low, high } => {
                if !(low.is_finite() && high.is_finite() && low < high) {
                    return Err(invalid(field, "uniform bounds must satisfy low < high"));
                }
            }
            Distribution::Finite { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(invalid(
                        field,
                        "finite law needs matching, nonempty values and probs",
                    ));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(invalid(field, "finite law values must be finite"));
                }
                if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return Err(invalid(
                        field,
                        "finite law probabilities must be nonnegative",
                    ));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > PMF_TOLERANCE {
                    return Err(invalid(
                        field,
                        format!("probabilities sum to {total}, not 1"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Raw moment `E[X^k]` for `k` in `1..=3`.
    pub fn moment(&self, k: u32) -> f64 {
        assert!((1..=3).contains(&k), "moment order {k} not supported");
        match self {
            Distribution::Const { value } => value.powi(k as i32),
            Distribution::Exponential { lambda } => {
                let fact = [1.0, 1.0, 2.0, 6.0][k as usize];
                fact / lambda.powi(k as i32)
            }
            Distribution::Geometric { p } => match k {
                1 => 1.0 / p,
                2 => (2.0 - p) / (p * p),
                _ => (p * p - 6.0 * p + 6.0) / (p * p * p),
            },
            Distribution::Uniform { low, high } => {
                let e = (k + 1) as i32;
                (high.powi(e) - low.powi(e)) / ((k + 1) as f64 * (high - low))
            }
            Distribution::Finite { values, probs } => values
                .iter()
                .zip(probs)
                .map(|(v, p)| p * v.powi(k as i32))
                .sum(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// `true` when every value in the support is `>= 0`.
    pub fn is_nonnegative(&self) -> bool {
        match self {
            Distribution::Const { value } => *value >= 0.0,
            Distribution::Exponential { .. } | Distribution::Geometric { .. } => true,
            Distribution::Uniform { low, .. } => *low >= 0.0,
            Distribution::Finite { values, probs } => values
                .iter()
                .zip(probs)
                .all(|(v, p)| *p == 0.0 || *v >= 0.0),
        }
    }

    /// `P(X = 0)`.
    pub fn mass_at_zero(&self) -> f64 {
        match self {
            Distribution::Const { value } => f64::from(u8::from(*value == 0.0)),
            Distribution::Finite { values, probs } => values
                .iter()
                .zip(probs)
                .filter(|(v, _)| **v == 0.0)
                .map(|(_, p)| p)
                .sum(),
            _ => 0.0,
        }
    }

    /// `P(X > 0) = 1`.
    pub fn is_strictly_positive(&self) -> bool {
        self.is_nonnegative() && self.mass_at_zero() == 0.0
    }

    /// Constant laws and single-atom finite laws.
    pub fn constant_value(&self) -> Option<f64> {
        match self {
            Distribution::Const { value } => Some(*value),
            Distribution::Finite { values, probs } => {
                let support: Vec<f64> = values
                    .iter()
                    .zip(probs)
                    .filter(|(_, p)| **p > 0.0)
                    .map(|(v, _)| *v)
                    .collect();
                match support.as_slice() {
                    [v] => Some(*v),
                    [first, rest @ ..] if rest.iter().all(|x| x == first) => Some(*first),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    pub fn sampler(&self) -> Result<Sampler> {
        self.validate("distribution")?;
        Ok(match self {
            Distribution::Const { value } => Sampler::Const(*value),
            Distribution::Exponential { lambda } => Sampler::Exponential(
                rand_distr::Exp::new(*lambda).map_err(|e| Error::Degenerate(e.to_string()))?,
            ),
            Distribution::Geometric { p } if *p == 0.5 => Sampler::StandardGeometric,
            Distribution::Geometric { p } => Sampler::Geometric(
                rand_distr::Geometric::new(*p).map_err(|e| Error::Degenerate(e.to_string()))?,
            ),
            Distribution::Uniform { low, high } => Sampler::Uniform(
                rand_distr::Uniform::new(*low, *high)
                    .map_err(|e| Error::Degenerate(e.to_string()))?,
            ),
            Distribution::Finite { values, probs } => {
                let mut acc = 0.0;
                let cdf = probs
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect();
                Sampler::Finite {
                    values: values.clone(),
                    cdf,
                }
            }
        })
    }
}

/// Prepared sampler for a [`Distribution`].
#[derive(Clone, Debug)]
pub enum Sampler {
    Const(f64),
    Exponential(rand_distr::Exp<f64>),
    Geometric(rand_distr::Geometric),
    /// Bit-counting sampler for `p = 1/2`.
    StandardGeometric,
    Uniform(rand_distr::Uniform<f64>),
    Finite {
        values: Vec<f64>,
        cdf: Vec<f64>,
    },
}

impl Sampler {
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Const(v) => *v,
            Sampler::Exponential(d) => d.sample(rng),
            // rand_distr counts failures before the first success
            Sampler::Geometric(d) => (d.sample(rng) + 1) as f64,
            Sampler::StandardGeometric => (rand_distr::StandardGeometric.sample(rng) + 1) as f64,
            Sampler::Uniform(d) => d.sample(rng),
            Sampler::Finite { values, cdf } => {
                let u = rng.random::<f64>() * cdf[cdf.len() - 1];
                let k = cdf.partition_point(|&c| c <= u).min(values.len() - 1);
                values[k]
            }
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Const { value } => write!(f, "const:{value}"),
            Distribution::Exponential { lambda } => write!(f, "exp:{lambda}"),
            Distribution::Geometric { p } => write!(f, "geom:{p}"),
            Distribution::Uniform { low, high } => write!(f, "uniform:{low},{high}"),
            Distribution::Finite { values, probs } => {
                write!(f, "finite:")?;
                for (i, (v, p)) in values.iter().zip(probs).enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}@{p}")?;
                }
                Ok(())
            }
        }
    }
}

/// Parses the shorthand `const:1`, `exp:2`, `geom:0.5`, `uniform:0,2`,
/// `finite:1@0.5,2@0.5`.
impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| invalid("distribution", format!("expected kind:params, got {s:?}")))?;
        let num = |t: &str| -> Result<f64> {
            t.trim()
                .parse::<f64>()
                .map_err(|_| invalid("distribution", format!("bad number {t:?} in {s:?}")))
        };
        let dist = match kind.trim() {
            "const" | "constant" => Distribution::Const { value: num(rest)? },
            "exp" | "exponential" => Distribution::Exponential { lambda: num(rest)? },
            "geom" | "geometric" => Distribution::Geometric { p: num(rest)? },
            "uniform" => {
                let (a, b) = rest
                    .split_once(',')
                    .ok_or_else(|| invalid("distribution", "uniform needs low,high"))?;
                Distribution::Uniform {
                    low: num(a)?,
                    high: num(b)?,
                }
            }
            "finite" => {
                let mut values = Vec::new();
                let mut probs = Vec::new();
                for atom in rest.split(',') {
                    let (v, p) = atom
                        .split_once('@')
                        .ok_or_else(|| invalid("distribution", "finite atoms are value@prob"))?;
                    values.push(num(v)?);
                    probs.push(num(p)?);
                }
                Distribution::Finite { values, probs }
            }
            other => return Err(invalid("distribution", format!("unknown kind {other:?}"))),
        };
        dist.validate("distribution")?;
        Ok(dist)
    }
}
