//! Exhaustive enumeration of growth histories for tiny instances.
//!
//! Everything here is computed in exact rational arithmetic so that identities
//! between independent routes can be asserted to within `1e-12` or exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{Signed, Zero};

use crate::couplings::WeightTrace;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Default largest `n` accepted by [`exact_depth_pmf`].
pub const DEFAULT_CAP: usize = 6;

/// Exact finite law over depths. Entries are sorted by depth, distinct, and
/// carry strictly positive mass.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DepthPmf {
    entries: Vec<(Rational, Rational)>,
}

impl DepthPmf {
    /// Merges duplicate depths and drops zero-mass atoms.
    pub fn from_atoms<I>(atoms: I) -> Self
    where
        I: IntoIterator<Item = (Rational, Rational)>,
    {
        let mut merged: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (depth, prob) in atoms {
            *merged.entry(depth).or_insert_with(Rational::zero) += prob;
        }
        Self {
            entries: merged.into_iter().filter(|(_, p)| !p.is_zero()).collect(),
        }
    }

    pub fn point(depth: Rational) -> Self {
        Self {
            entries: vec![(depth, rational::one())],
        }
    }

    pub fn entries(&self) -> &[(Rational, Rational)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_mass(&self) -> Rational {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    pub fn prob(&self, depth: &Rational) -> Rational {
        self.entries
            .binary_search_by(|(d, _)| d.cmp(depth))
            .map(|i| self.entries[i].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn mean(&self) -> Rational {
        self.entries.iter().map(|(d, p)| d * p).sum()
    }

    pub fn second_moment(&self) -> Rational {
        self.entries.iter().map(|(d, p)| d * d * p).sum()
    }

    /// Total-variation distance `1/2 * sum |p - q|`.
    pub fn tv_distance(&self, other: &DepthPmf) -> Rational {
        let mut diff: BTreeMap<&Rational, Rational> = BTreeMap::new();
        for (d, p) in &self.entries {
            *diff.entry(d).or_insert_with(Rational::zero) += p;
        }
        for (d, q) in &other.entries {
            *diff.entry(d).or_insert_with(Rational::zero) -= q;
        }
        diff.values().map(|v| v.abs()).sum::<Rational>() / rational::integer(2)
    }

    /// Law of `X + Y` for independent `X ~ self`, `Y ~ other`.
    pub fn convolve(&self, other: &DepthPmf) -> DepthPmf {
        DepthPmf::from_atoms(
            self.entries
                .iter()
                .flat_map(|(d1, p1)| other.entries.iter().map(move |(d2, p2)| (d1 + d2, p1 * p2))),
        )
    }

    /// Removes atoms lighter than `threshold`; the result no longer sums to 1.
    pub fn pruned(&self, threshold: f64) -> DepthPmf {
        Self {
            entries: self
                .entries
                .iter()
                .filter(|(_, p)| rational::to_f64(p) >= threshold)
                .cloned()
                .collect(),
        }
    }

    pub fn to_f64_pairs(&self) -> Vec<(f64, f64)> {
        self.entries
            .iter()
            .map(|(d, p)| (rational::to_f64(d), rational::to_f64(p)))
            .collect()
    }

    /// `depth,prob` CSV with rationals written as `p/q`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("depth,prob\n");
        for (d, p) in &self.entries {
            let _ = writeln!(out, "{d},{p}");
        }
        out
    }
}

/// Exact description of a finite block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactBlock {
    pub weight: Rational,
    pub pmf: DepthPmf,
}

/// Exact law of the insertion depth `D_n` given the blocks `B_0..B_{n-1}`.
///
/// Enumerates every history: at step `m` the latch lies in block `k < m` with
/// probability `W_k / S_{m-1}` and at each atom of that block's depth law.
pub fn exact_depth_pmf(blocks: &[ExactBlock], n: usize, cap: usize) -> Result<DepthPmf> {
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    if n == 0 || blocks.len() < n {
        return Err(Error::Degenerate(format!(
            "need n >= 1 and at least n blocks (n = {n}, blocks = {})",
            blocks.len()
        )));
    }
    if blocks[0].weight <= Rational::zero() {
        return Err(Error::NonPositiveInitialWeight(rational::to_f64(
            &blocks[0].weight,
        )));
    }
    let blocks = &blocks[..n];
    let mut totals = Vec::with_capacity(n);
    let mut acc = Rational::zero();
    for b in blocks {
        acc += &b.weight;
        totals.push(acc.clone());
    }

    struct Walk<'a> {
        blocks: &'a [ExactBlock],
        totals: Vec<Rational>,
        n: usize,
        hooks: Vec<Rational>,
        result: BTreeMap<Rational, Rational>,
    }

    impl Walk<'_> {
        fn step(&mut self, m: usize, prob: &Rational) {
            let total = self.totals[m - 1].clone();
            for k in 0..m {
                let block = &self.blocks[k];
                if block.weight.is_zero() {
                    continue;
                }
                let pick = prob * &block.weight / &total;
                for (d, p) in block.pmf.entries() {
                    let depth = &self.hooks[k] + d;
                    let branch = &pick * p;
                    if m == self.n {
                        *self.result.entry(depth).or_insert_with(Rational::zero) += branch;
                    } else {
                        self.hooks.push(depth);
                        self.step(m + 1, &branch);
                        self.hooks.pop();
                    }
                }
            }
        }
    }

    let mut walk = Walk {
        blocks,
        totals,
        n,
        hooks: vec![Rational::zero()],
        result: BTreeMap::new(),
    };
    walk.step(1, &rational::one());
    Ok(DepthPmf::from_atoms(walk.result))
}

/// `E[D'_0] + sum_{k=1}^{n-1} (W_k / S_k) E[D'_k]`: the exact mean of the
/// insertion depth given the trace.
pub fn exact_mean_bucket(trace: &WeightTrace) -> f64 {
    let mut mean = trace.block(0).mean_depth();
    for k in 1..trace.n() {
        mean += trace.w(k) / trace.s(k) * trace.block(k).mean_depth();
    }
    mean
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::BlockInstance;

    fn r(s: &str) -> Rational {
        rational::parse(s).unwrap()
    }

    fn rrt(n: usize) -> Vec<ExactBlock> {
        let mut v = vec![ExactBlock {
            weight: r("1"),
            pmf: DepthPmf::point(r("0")),
        }];
        v.extend((1..n).map(|_| ExactBlock {
            weight: r("1"),
            pmf: DepthPmf::point(r("1")),
        }));
        v
    }

    #[test]
    fn rrt_small_cases() {
        assert_eq!(
            exact_depth_pmf(&rrt(1), 1, DEFAULT_CAP).unwrap(),
            DepthPmf::point(r("0"))
        );
        let two = exact_depth_pmf(&rrt(2), 2, DEFAULT_CAP).unwrap();
        assert_eq!(
            two,
            DepthPmf::from_atoms([(r("0"), r("1/2")), (r("1"), r("1/2"))])
        );
        let three = exact_depth_pmf(&rrt(3), 3, DEFAULT_CAP).unwrap();
        assert_eq!(
            three,
            DepthPmf::from_atoms([(r("0"), r("1/3")), (r("1"), r("1/2")), (r("2"), r("1/6"))])
        );
    }

    #[test]
    fn rrt_matches_stirling_records() {
        // depth of node n in a random recursive tree = records in a uniform permutation of n:
        // P(D_n = j) = c(n, j + 1) / n!, unsigned Stirling numbers of the first kind
        let n = 5;
        let stirling = [0i64, 24, 50, 35, 10, 1]; // c(5, k), k = 0..=5
        let pmf = exact_depth_pmf(&rrt(n), n, DEFAULT_CAP).unwrap();
        for j in 0..n {
            let expect = Rational::new(stirling[j + 1].into(), 120.into());
            assert_eq!(pmf.prob(&rational::integer(j as i64)), expect, "depth {j}");
        }
    }

    #[test]
    fn all_zero_depths_collapse() {
        let blocks: Vec<ExactBlock> = (0..4)
            .map(|_| ExactBlock {
                weight: r("2"),
                pmf: DepthPmf::point(r("0")),
            })
            .collect();
        assert_eq!(
            exact_depth_pmf(&blocks, 4, DEFAULT_CAP).unwrap(),
            DepthPmf::point(r("0"))
        );
    }

    #[test]
    fn errors() {
        assert!(matches!(
            exact_depth_pmf(&rrt(8), 7, DEFAULT_CAP),
            Err(Error::CapExceeded { n: 7, cap: 6 })
        ));
        assert!(exact_depth_pmf(&rrt(2), 3, DEFAULT_CAP).is_err());
        let mut zero = rrt(2);
        zero[0].weight = r("0");
        assert!(matches!(
            exact_depth_pmf(&zero, 2, DEFAULT_CAP),
            Err(Error::NonPositiveInitialWeight(_))
        ));
    }

    #[test]
    fn pmf_helpers() {
        let a = DepthPmf::from_atoms([(r("0"), r("1/2")), (r("1"), r("1/4")), (r("1"), r("1/4"))]);
        assert_eq!(a.len(), 2);
        assert_eq!(a.total_mass(), r("1"));
        let b = DepthPmf::point(r("0"));
        assert_eq!(a.tv_distance(&b), r("1/2"));
        assert_eq!(a.tv_distance(&a), r("0"));
        assert_eq!(a.to_csv(), "depth,prob\n0,1/2\n1,1/2\n");
        let c = a.convolve(&a);
        assert_eq!(c.prob(&r("1")), r("1/2"));
        assert_eq!(c.pruned(0.3).len(), 1);
    }

    #[test]
    fn exact_mean_of_two_block_trace() {
        let trace = WeightTrace::from_blocks(vec![
            BlockInstance::point(1.0, 0.0),
            BlockInstance::point(3.0, 2.0),
        ])
        .unwrap();
        assert_eq!(exact_mean_bucket(&trace), 1.5);
    }
}
