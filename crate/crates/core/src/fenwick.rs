//! Growable Fenwick tree over nonnegative `f64` weights.
//!
//! Supports appending a weight in O(log n) and drawing an index with
//! probability proportional to its weight in O(log n).

use rand::Rng;

#[derive(Clone, Debug, Default)]
pub struct PrefixSumTree {
    // 1-based: tree[i] holds the sum of values in (i - lowbit(i), i].
    tree: Vec<f64>,
    values: Vec<f64>,
}

#[inline]
fn lowbit(i: usize) -> usize {
    i & i.wrapping_neg()
}

impl PrefixSumTree {
    pub fn new() -> Self {
        Self {
            tree: vec![0.0],
            values: Vec::new(),
        }
    }

    pub fn with_capacity(capacity: usize) -> Self {
        let mut tree = Vec::with_capacity(capacity + 1);
        tree.push(0.0);
        Self {
            tree,
            values: Vec::with_capacity(capacity),
        }
    }

    pub fn from_weights(weights: &[f64]) -> Self {
        let mut t = Self::with_capacity(weights.len());
        for &w in weights {
            t.push(w);
        }
        t
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn push(&mut self, weight: f64) {
        debug_assert!(weight >= 0.0, "negative weight {weight}");
        let i = self.values.len() + 1;
        let mut node = weight;
        let stop = i - lowbit(i);
        let mut j = i - 1;
        while j > stop {
            node += self.tree[j];
            j -= lowbit(j);
        }
        self.tree.push(node);
        self.values.push(weight);
    }

    /// Sum of the first `count` weights.
    pub fn prefix(&self, count: usize) -> f64 {
        let mut i = count.min(self.len());
        let mut acc = 0.0;
        while i > 0 {
            acc += self.tree[i];
            i -= lowbit(i);
        }
        acc
    }

    pub fn total(&self) -> f64 {
        self.prefix(self.len())
    }

    /// Smallest index `k` with `prefix(k + 1) > target`, clamped into range.
    pub fn search(&self, mut target: f64) -> usize {
        let n = self.len();
        let mut pos = 0;
        let mut step = if n == 0 {
            0
        } else {
            1usize << (usize::BITS - 1 - n.leading_zeros())
        };
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos.min(n.saturating_sub(1))
    }

    /// Draws an index with probability `w_k / total`. Zero-weight entries are
    /// never returned. Panics if every weight is zero.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = self.total();
        assert!(total > 0.0, "cannot sample from an all-zero weight vector");
        loop {
            let k = self.search(rng.random::<f64>() * total);
            // rounding in the partial sums can land on an empty slot
            if self.values[k] > 0.0 {
                return k;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    #[test]
    fn search_hits_expected_buckets() {
        let t = PrefixSumTree::from_weights(&[1.0, 0.0, 2.0, 3.0]);
        assert_eq!(t.total(), 6.0);
        assert_eq!(t.search(0.0), 0);
        assert_eq!(t.search(0.999), 0);
        assert_eq!(t.search(1.0), 2);
        assert_eq!(t.search(2.999), 2);
        assert_eq!(t.search(3.0), 3);
        assert_eq!(t.search(5.999), 3);
        assert_eq!(t.search(100.0), 3);
    }

    #[test]
    fn zero_weights_never_sampled() {
        let t = PrefixSumTree::from_weights(&[0.0, 1.0, 0.0, 0.0, 1.0, 0.0]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let k = t.sample(&mut rng);
            assert!(k == 1 || k == 4);
        }
    }

    proptest! {
        #[test]
        fn prefix_matches_naive(weights in proptest::collection::vec(0u32..1000, 1..200)) {
            let w: Vec<f64> = weights.iter().map(|&x| x as f64).collect();
            let t = PrefixSumTree::from_weights(&w);
            let mut acc = 0.0;
            for k in 0..=w.len() {
                prop_assert_eq!(t.prefix(k), acc);
                if k < w.len() { acc += w[k]; }
            }
        }

        #[test]
        fn search_agrees_with_linear_scan(weights in proptest::collection::vec(0u32..50, 1..100), frac in 0.0f64..1.0) {
            let w: Vec<f64> = weights.iter().map(|&x| x as f64).collect();
            let t = PrefixSumTree::from_weights(&w);
            prop_assume!(t.total() > 0.0);
            let target = (frac * t.total()).floor();
            let mut acc = 0.0;
            let mut expect = w.len() - 1;
            for (k, &x) in w.iter().enumerate() {
                acc += x;
                if acc > target { expect = k; break; }
            }
            prop_assert_eq!(t.search(target), expect);
        }
    }
}
