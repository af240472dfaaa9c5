//! Direct simulation of the growth process.
//!
//! Each step picks the latch in two stages: first the parent block `k` with
//! probability `W_k / S_n` (a Fenwick-tree search), then a point inside that
//! block from its own measure. Only hook depths are tracked; distances between
//! arbitrary points are never needed.

use std::io::{self, Write};

use rand::Rng;

use crate::blocks::{BlockFamily, BlockInstance};
use crate::error::{Error, Result};
use crate::fenwick::PrefixSumTree;

/// One growth step: the `n`-th latch, the block it landed in, and the new block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepthRecord {
    pub n: u64,
    /// Insertion depth: distance from the master hook to the latch.
    pub depth: f64,
    pub parent_block: usize,
    /// Weight of the newly attached block.
    pub block_weight: f64,
    /// Total weight after attaching it.
    pub total_weight: f64,
}

/// Kahan-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

#[derive(Clone, Copy, Debug)]
struct Ancestry {
    parent: usize,
    offset: f64,
}

/// The live recursive space.
#[derive(Clone, Debug)]
pub struct GrowthState<'f> {
    family: &'f BlockFamily,
    n: u64,
    blocks: Vec<BlockInstance>,
    hook_depths: Vec<f64>,
    weights: PrefixSumTree,
    total: CompensatedSum,
    ancestry: Option<Vec<Ancestry>>,
}

impl<'f> GrowthState<'f> {
    /// Samples `B_0`; its hook is the master hook.
    pub fn init<R: Rng + ?Sized>(family: &'f BlockFamily, rng: &mut R) -> Result<Self> {
        Self::with_initial(family, family.sample_initial(rng))
    }

    pub fn with_initial(family: &'f BlockFamily, initial: BlockInstance) -> Result<Self> {
        let w0 = initial.weight();
        if !(w0 > 0.0) {
            return Err(Error::NonPositiveInitialWeight(w0));
        }
        let mut weights = PrefixSumTree::new();
        weights.push(w0);
        let mut total = CompensatedSum::default();
        total.add(w0);
        Ok(Self {
            family,
            n: 0,
            blocks: vec![initial],
            hook_depths: vec![0.0],
            weights,
            total,
            ancestry: None,
        })
    }

    /// Keeps each block's parent and within-parent offset for later inspection.
    pub fn track_ancestry(mut self) -> Self {
        if self.ancestry.is_none() {
            self.ancestry = Some(vec![
                Ancestry {
                    parent: 0,
                    offset: 0.0
                };
                self.blocks.len()
            ]);
        }
        self
    }

    pub fn steps(&self) -> u64 {
        self.n
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.total.sum
    }

    pub fn hook_depth(&self, k: usize) -> f64 {
        self.hook_depths[k]
    }

    pub fn block(&self, k: usize) -> &BlockInstance {
        &self.blocks[k]
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.blocks.iter().map(BlockInstance::weight)
    }

    /// Stage one: a block index with probability `W_k / S_n`.
    #[inline]
    pub fn select_parent<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.weights.sample(rng)
    }

    /// Both stages: returns `(parent, latch depth)` without changing the state.
    #[inline]
    pub fn sample_latch<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, f64) {
        let k = self.select_parent(rng);
        let offset = self.blocks[k].sample_depth(rng);
        (k, self.hook_depths[k] + offset)
    }

    /// Draws the next latch, then attaches a fresh block to it.
    pub fn grow_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> DepthRecord {
        let k = self.select_parent(rng);
        let offset = self.blocks[k].sample_depth(rng);
        let depth = self.hook_depths[k] + offset;
        let block = self.family.sample_block(rng);
        let w = block.weight();
        self.weights.push(w);
        self.total.add(w);
        self.hook_depths.push(depth);
        self.blocks.push(block);
        if let Some(chain) = self.ancestry.as_mut() {
            chain.push(Ancestry { parent: k, offset });
        }
        self.n += 1;
        DepthRecord {
            n: self.n,
            depth,
            parent_block: k,
            block_weight: w,
            total_weight: self.total.sum,
        }
    }

    /// `(block, offset)` pairs from block `k` up to (excluding) the initial
    /// block. Requires [`GrowthState::track_ancestry`].
    pub fn ancestor_chain(&self, mut k: usize) -> Option<Vec<(usize, f64)>> {
        let chain = self.ancestry.as_ref()?;
        let mut out = Vec::new();
        while k != 0 {
            let a = chain[k];
            out.push((a.parent, a.offset));
            k = a.parent;
        }
        Some(out)
    }
}

/// Runs `n` growth steps and returns every record.
pub fn run_depth_stream<R: Rng + ?Sized>(
    family: &BlockFamily,
    n: u64,
    rng: &mut R,
) -> Result<Vec<DepthRecord>> {
    if n == 0 {
        return Err(Error::Degenerate("n must be at least 1".into()));
    }
    let mut state = GrowthState::init(family, rng)?;
    Ok((0..n).map(|_| state.grow_step(rng)).collect())
}

/// Insertion depth of the `n`-th latch without storing the stream.
pub fn final_depth<R: Rng + ?Sized>(family: &BlockFamily, n: u64, rng: &mut R) -> Result<f64> {
    if n == 0 {
        return Err(Error::Degenerate("n must be at least 1".into()));
    }
    let mut state = GrowthState::init(family, rng)?;
    for _ in 1..n {
        state.grow_step(rng);
    }
    // the n-th block itself does not affect D_n
    Ok(state.sample_latch(rng).1)
}

/// Formats with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `n,depth,parent_block,block_weight,total_weight` CSV.
pub fn write_depth_stream_csv<W: Write>(mut out: W, records: &[DepthRecord]) -> io::Result<()> {
    writeln!(out, "n,depth,parent_block,block_weight,total_weight")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.n,
            fmt17(r.depth),
            r.parent_block,
            fmt17(r.block_weight),
            fmt17(r.total_weight)
        )?;
    }
    Ok(())
}
