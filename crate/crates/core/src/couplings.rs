//! Bucket representation of the insertion depth, its independent
//! approximation, and the coupling between the two.
//!
//! Given the blocks, `D_n` has the law of `sum_{k<n} J_k D'_k` with
//! independent `J_k ~ Be(W_k / S_k)` (and `J_0 = 1`). Replacing the random
//! `S_k` by `E[S_k]` gives `I_k ~ Be(W_k / E[S_k]) 1{W_k <= E[S_k]}`, which
//! are independent across `k` unconditionally.

use rand::Rng;

use crate::blocks::{BlockFamily, BlockInstance, Moments};
use crate::error::{Error, Result};
use crate::exactoracle::DepthPmf;
use crate::rational::{self, Rational};

/// A realized block sequence `B_0..B_{n-1}` with partial weight sums.
#[derive(Clone, Debug)]
pub struct WeightTrace {
    blocks: Vec<BlockInstance>,
    partial: Vec<f64>,
}

impl WeightTrace {
    pub fn from_blocks(blocks: Vec<BlockInstance>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::Degenerate("trace needs at least the initial block".into()))?;
        if !(first.weight() > 0.0) {
            return Err(Error::NonPositiveInitialWeight(first.weight()));
        }
        let mut acc = 0.0;
        let partial = blocks
            .iter()
            .map(|b| {
                acc += b.weight();
                acc
            })
            .collect();
        Ok(Self { blocks, partial })
    }

    /// Draws `B_0..B_{n-1}` from `family`.
    pub fn sample<R: Rng + ?Sized>(family: &BlockFamily, n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::Degenerate("trace length must be at least 1".into()));
        }
        let mut blocks = Vec::with_capacity(n);
        blocks.push(family.sample_initial(rng));
        blocks.extend((1..n).map(|_| family.sample_block(rng)));
        Self::from_blocks(blocks)
    }

    /// Number of blocks, which is the step `n` whose depth the trace describes.
    pub fn n(&self) -> usize {
        self.blocks.len()
    }

    pub fn w(&self, k: usize) -> f64 {
        self.blocks[k].weight()
    }

    /// `S_k = W_0 + ... + W_k`.
    pub fn s(&self, k: usize) -> f64 {
        self.partial[k]
    }

    pub fn block(&self, k: usize) -> &BlockInstance {
        &self.blocks[k]
    }

    pub fn blocks(&self) -> &[BlockInstance] {
        &self.blocks
    }
}

/// `E[W]` and `E[W_0]`, giving `E[S_k] = k E[W] + E[W_0]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpectedWeights {
    pub e_w: f64,
    pub e_w0: f64,
}

impl ExpectedWeights {
    pub fn new(e_w: f64, e_w0: f64) -> Result<Self> {
        if !(e_w > 0.0 && e_w0 > 0.0 && e_w.is_finite() && e_w0.is_finite()) {
            return Err(Error::Degenerate(format!(
                "expected weights must be positive (E[W] = {e_w}, E[W0] = {e_w0})"
            )));
        }
        Ok(Self { e_w, e_w0 })
    }

    pub fn from_moments(m: &Moments) -> Result<Self> {
        Self::new(m.e_w, m.e_w0)
    }

    /// Monte Carlo estimate from `draws` block samples (and as many initial blocks).
    pub fn estimate<R: Rng + ?Sized>(
        family: &BlockFamily,
        draws: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let draws = draws.max(1);
        let e_w = (0..draws)
            .map(|_| family.sample_block(rng).weight())
            .sum::<f64>()
            / draws as f64;
        let e_w0 = (0..draws)
            .map(|_| family.sample_initial(rng).weight())
            .sum::<f64>()
            / draws as f64;
        Self::new(e_w, e_w0)
    }

    /// `E[S_k]`.
    #[inline]
    pub fn es(&self, k: usize) -> f64 {
        k as f64 * self.e_w + self.e_w0
    }
}

#[inline]
fn bernoulli<R: Rng + ?Sized>(rng: &mut R, numerator: f64, denominator: f64) -> bool {
    rng.random::<f64>() * denominator < numerator
}

/// One term of the coupling: returns `(J_k, I_k, D'_k)`.
#[inline]
fn coupled_term<R: Rng + ?Sized>(
    w: f64,
    s: f64,
    es: f64,
    block: &BlockInstance,
    rng: &mut R,
) -> (bool, bool, f64) {
    let j = bernoulli(rng, w, s);
    let offset = block.sample_depth(rng);
    let i = if w > es {
        false
    } else if es >= s {
        // I = H J with H ~ Be(S_k / E[S_k])
        bernoulli(rng, s, es) && j
    } else {
        assert!(s > w, "S_k must exceed W_k when W_0 > 0");
        // I = max(J, H) with H ~ Be(W_k (S_k - E[S_k]) / (E[S_k] (S_k - W_k)))
        let h = bernoulli(rng, w * (s - es), es * (s - w));
        j || h
    };
    (j, i, offset)
}

/// `Y_{n,0} + sum_{k=1}^{n-1} J_k D'_k` for the given trace.
pub fn sample_bucket_depth<R: Rng + ?Sized>(trace: &WeightTrace, rng: &mut R) -> f64 {
    let mut depth = trace.block(0).sample_depth(rng);
    for k in 1..trace.n() {
        if bernoulli(rng, trace.w(k), trace.s(k)) {
            depth += trace.block(k).sample_depth(rng);
        }
    }
    depth
}

/// Same law as [`sample_bucket_depth`] applied to a freshly drawn trace of
/// length `n`, without storing it.
pub fn sample_bucket_depth_streaming<R: Rng + ?Sized>(
    family: &BlockFamily,
    n: usize,
    rng: &mut R,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Degenerate("n must be at least 1".into()));
    }
    let initial = family.sample_initial(rng);
    if !(initial.weight() > 0.0) {
        return Err(Error::NonPositiveInitialWeight(initial.weight()));
    }
    let mut s = initial.weight();
    let mut depth = initial.sample_depth(rng);
    for _ in 1..n {
        let block = family.sample_block(rng);
        let w = block.weight();
        s += w;
        if bernoulli(rng, w, s) {
            depth += block.sample_depth(rng);
        }
    }
    Ok(depth)
}

/// Exact law of `sum_k Y_{n,k}` for a trace of finite discrete blocks, by
/// convolving the independent terms. `prune` drops atoms lighter than the
/// given mass after every convolution.
pub fn exact_bucket_pmf(trace: &WeightTrace, prune: Option<f64>) -> Result<DepthPmf> {
    let exact = trace
        .blocks()
        .iter()
        .map(|b| b.exact().ok_or(Error::NotDiscrete))
        .collect::<Result<Vec<_>>>()?;
    let mut law = exact[0].pmf.clone();
    let mut total = exact[0].weight.clone();
    for block in &exact[1..] {
        total += &block.weight;
        let q: Rational = &block.weight / &total;
        let stay = rational::one() - &q;
        let term = DepthPmf::from_atoms(
            std::iter::once((rational::zero(), stay))
                .chain(block.pmf.entries().iter().map(|(d, p)| (d.clone(), &q * p))),
        );
        law = law.convolve(&term);
        if let Some(threshold) = prune {
            law = law.pruned(threshold);
        }
    }
    Ok(law)
}

/// `sum_{k=1}^{n-1} I_k D'_k` with every block drawn afresh and
/// `I_k ~ Be(W_k / E[S_k]) 1{W_k <= E[S_k]}` drawn from its marginal.
pub fn sample_independent_approx<R: Rng + ?Sized>(
    n: usize,
    family: &BlockFamily,
    ew: &ExpectedWeights,
    rng: &mut R,
) -> f64 {
    let mut total = 0.0;
    for k in 1..n {
        let block = family.sample_block(rng);
        let w = block.weight();
        let es = ew.es(k);
        if w <= es && bernoulli(rng, w, es) {
            total += block.sample_depth(rng);
        }
    }
    total
}

/// Coupled `(y_sum, x_sum)` sharing `J_k` and `D'_k`. `y_sum` includes the
/// `k = 0` term; `x_sum` starts at `k = 1`.
pub fn sample_coupled_pair<R: Rng + ?Sized>(
    trace: &WeightTrace,
    ew: &ExpectedWeights,
    rng: &mut R,
) -> (f64, f64) {
    let mut y = trace.block(0).sample_depth(rng);
    let mut x = 0.0;
    for k in 1..trace.n() {
        let (j, i, offset) = coupled_term(trace.w(k), trace.s(k), ew.es(k), trace.block(k), rng);
        if j {
            y += offset;
        }
        if i {
            x += offset;
        }
    }
    (y, x)
}

/// [`sample_coupled_pair`] on a freshly drawn trace of length `n`, without storing it.
pub fn sample_coupled_pair_streaming<R: Rng + ?Sized>(
    family: &BlockFamily,
    n: usize,
    ew: &ExpectedWeights,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Degenerate("n must be at least 1".into()));
    }
    let initial = family.sample_initial(rng);
    if !(initial.weight() > 0.0) {
        return Err(Error::NonPositiveInitialWeight(initial.weight()));
    }
    let mut s = initial.weight();
    let mut y = initial.sample_depth(rng);
    let mut x = 0.0;
    for k in 1..n {
        let block = family.sample_block(rng);
        let w = block.weight();
        s += w;
        let (j, i, offset) = coupled_term(w, s, ew.es(k), &block, rng);
        if j {
            y += offset;
        }
        if i {
            x += offset;
        }
    }
    Ok((y, x))
}

/// `(mu, sigma2) = (E[W D'] / E[W], E[W D'^2] / E[W])`.
pub fn theoretical_limits(moments: Option<&Moments>) -> Result<(f64, f64)> {
    let m = moments.ok_or(Error::MissingMoments)?;
    if !(m.e_w > 0.0) {
        return Err(Error::Degenerate("E[W] must be positive".into()));
    }
    Ok(m.limits())
}

/// `sum_{k=1}^{n-1} E[W D'] / E[S_k]`, the leading part of `E[sum X_k]`.
pub fn finite_n_mean_bound(n: u64, moments: &Moments) -> f64 {
    (1..n)
        .map(|k| moments.e_wd / (k as f64 * moments.e_w + moments.e_w0))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::{geometric_path_family, k2_family, uniform_segment_family, Distribution};
    use crate::exactoracle::{exact_depth_pmf, DEFAULT_CAP};
    use crate::rng::substream;

    fn r(s: &str) -> Rational {
        rational::parse(s).unwrap()
    }

    fn rrt_family() -> BlockFamily {
        k2_family(0.0, Distribution::Const { value: 1.0 }, None).unwrap()
    }

    fn rrt_trace(n: usize) -> WeightTrace {
        WeightTrace::from_blocks(rrt_family().deterministic_trace(n, None).unwrap()).unwrap()
    }

    #[test]
    fn bucket_pmf_small_cases() {
        assert_eq!(
            exact_bucket_pmf(&rrt_trace(1), None).unwrap(),
            DepthPmf::point(r("0"))
        );
        assert_eq!(
            exact_bucket_pmf(&rrt_trace(3), None).unwrap(),
            DepthPmf::from_atoms([(r("0"), r("1/3")), (r("1"), r("1/2")), (r("2"), r("1/6"))])
        );
        let two = WeightTrace::from_blocks(vec![
            BlockInstance::point(1.0, 0.0),
            BlockInstance::point(3.0, 2.0),
        ])
        .unwrap();
        assert_eq!(
            exact_bucket_pmf(&two, None).unwrap(),
            DepthPmf::from_atoms([(r("0"), r("1/4")), (r("2"), r("3/4"))])
        );
    }

    #[test]
    fn bucket_pmf_rejects_continuous() {
        let fam = uniform_segment_family(Distribution::Exponential { lambda: 1.0 }, None).unwrap();
        let trace = WeightTrace::sample(&fam, 3, &mut substream(1, 0, 0)).unwrap();
        assert!(matches!(
            exact_bucket_pmf(&trace, None),
            Err(Error::NotDiscrete)
        ));
    }

    #[test]
    fn bucket_equals_enumeration_for_random_discrete_traces() {
        // geometric blocks give random integer weights; condition on a realized trace
        let fam = geometric_path_family(0.5).unwrap();
        for seed in 0..5 {
            let trace = WeightTrace::sample(&fam, 4, &mut substream(seed, 0, 0)).unwrap();
            let exact: Vec<_> = trace.blocks().iter().map(|b| b.exact().unwrap()).collect();
            let oracle = exact_depth_pmf(&exact, 4, DEFAULT_CAP).unwrap();
            let bucket = exact_bucket_pmf(&trace, None).unwrap();
            assert_eq!(oracle.tv_distance(&bucket), rational::zero());
        }
    }

    #[test]
    fn n_equal_one_uses_only_the_initial_block() {
        let fam = rrt_family();
        let ew = ExpectedWeights::new(1.0, 1.0).unwrap();
        let mut rng = substream(2, 0, 0);
        assert_eq!(sample_bucket_depth(&rrt_trace(1), &mut rng), 0.0);
        assert_eq!(sample_independent_approx(1, &fam, &ew, &mut rng), 0.0);
        assert_eq!(
            sample_coupled_pair(&rrt_trace(1), &ew, &mut rng),
            (0.0, 0.0)
        );
    }

    #[test]
    fn deterministic_rrt_coupling_is_exact() {
        let ew = ExpectedWeights::new(1.0, 1.0).unwrap();
        let trace = rrt_trace(300);
        let mut rng = substream(3, 0, 0);
        for _ in 0..2000 {
            let (y, x) = sample_coupled_pair(&trace, &ew, &mut rng);
            assert_eq!(y, x);
        }
    }

    #[test]
    fn heavy_block_is_dropped_from_the_approximation() {
        // W_1 = 10 > E[S_1] = 2: I_1 = 0 while J_1 ~ Be(10/11)
        let trace = WeightTrace::from_blocks(vec![
            BlockInstance::point(1.0, 0.0),
            BlockInstance::point(10.0, 1.0),
        ])
        .unwrap();
        let ew = ExpectedWeights::new(1.0, 1.0).unwrap();
        let mut rng = substream(4, 0, 0);
        let reps = 200_000;
        let mut gaps = 0u64;
        for _ in 0..reps {
            let (y, x) = sample_coupled_pair(&trace, &ew, &mut rng);
            assert_eq!(x, 0.0);
            gaps += u64::from(y != x);
        }
        let p = gaps as f64 / reps as f64;
        let se = (10.0 / 11.0 * (1.0 / 11.0) / reps as f64).sqrt();
        assert!((p - 10.0 / 11.0).abs() < 4.0 * se, "p = {p}");
    }

    #[test]
    fn coupled_marginal_of_i_in_each_branch() {
        // k = 1, E[S_1] = 3 (E[W] = 1, E[W0] = 2).
        // S_1 = 2 < 3: P(I = 1) = W_1/E[S_1] = 1/3 (H J branch).
        // S_1 = 5 > 3 with W_1 = 1: P(I = 1) = 1/3 (max branch).
        let ew = ExpectedWeights::new(1.0, 2.0).unwrap();
        for w0 in [1.0, 4.0] {
            let trace = WeightTrace::from_blocks(vec![
                BlockInstance::point(w0, 0.0),
                BlockInstance::point(1.0, 1.0),
            ])
            .unwrap();
            let mut rng = substream(5, 0, w0 as u64);
            let reps = 300_000;
            let hits: u64 = (0..reps)
                .map(|_| u64::from(sample_coupled_pair(&trace, &ew, &mut rng).1 > 0.0))
                .sum();
            let p = hits as f64 / reps as f64;
            let se = (1.0 / 3.0 * 2.0 / 3.0 / reps as f64).sqrt();
            assert!((p - 1.0 / 3.0).abs() < 4.0 * se, "w0 = {w0}: p = {p}");
        }
    }

    #[test]
    fn zero_depth_family_is_always_zero() {
        let fam = crate::blocks::custom_discrete_family(
            vec![crate::blocks::CustomBlock {
                weight: 2.0.into(),
                pmf: vec![(0.0.into(), 1.0.into())],
                prob: 1.0,
            }],
            crate::blocks::CustomInitial {
                weight: 1.0.into(),
                pmf: vec![(0.0.into(), 1.0.into())],
            },
        )
        .unwrap();
        let ew = ExpectedWeights::from_moments(fam.moments().unwrap()).unwrap();
        let mut rng = substream(6, 0, 0);
        for _ in 0..100 {
            assert_eq!(sample_independent_approx(50, &fam, &ew, &mut rng), 0.0);
            assert_eq!(
                sample_bucket_depth_streaming(&fam, 50, &mut rng).unwrap(),
                0.0
            );
            assert_eq!(
                sample_coupled_pair_streaming(&fam, 50, &ew, &mut rng).unwrap(),
                (0.0, 0.0)
            );
        }
    }

    #[test]
    fn limits_and_mean_bound() {
        let geo = geometric_path_family(0.5).unwrap();
        assert_eq!(theoretical_limits(geo.moments()).unwrap(), (2.0, 6.0));
        let seg = uniform_segment_family(Distribution::Exponential { lambda: 1.0 }, None).unwrap();
        assert_eq!(theoretical_limits(seg.moments()).unwrap(), (1.0, 2.0));
        let k2 = k2_family(1.5, Distribution::Const { value: 0.5 }, None).unwrap();
        assert_eq!(theoretical_limits(k2.moments()).unwrap(), (0.25, 0.25));
        assert!(matches!(
            theoretical_limits(None),
            Err(Error::MissingMoments)
        ));

        let rrt = rrt_family();
        let m = rrt.moments().unwrap();
        assert!((finite_n_mean_bound(4, m) - 13.0 / 12.0).abs() < 1e-15);
        assert_eq!(finite_n_mean_bound(1, m), 0.0);
        let h100: f64 = (1..=100).map(|k| 1.0 / k as f64).sum();
        assert!(
            (finite_n_mean_bound(100, geo.moments().unwrap()) - 2.0 * (h100 - 1.0)).abs() < 1e-12
        );
    }

    #[test]
    fn expected_weights_estimate_tracks_closed_form() {
        let fam = geometric_path_family(0.5).unwrap();
        let est = ExpectedWeights::estimate(&fam, 200_000, &mut substream(7, 0, 0)).unwrap();
        // Var W = (1-p)/p^2 = 2, se = sqrt(2 / 2e5)
        assert!((est.e_w - 2.0).abs() < 4.0 * (2.0f64 / 200_000.0).sqrt());
        assert!((est.e_w0 - 2.0).abs() < 4.0 * (2.0f64 / 200_000.0).sqrt());
        assert!(ExpectedWeights::new(0.0, 1.0).is_err());
        assert_eq!(est.es(0), est.e_w0);
    }
}
