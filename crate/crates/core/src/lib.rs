//! Random recursive metric spaces.
//!
//! A growing space is assembled from weighted hooked blocks. At every step a
//! latch is drawn from the weight-mixture of the block measures and a fresh
//! block is glued to it by its hook. This crate simulates the insertion depth
//! (the distance from the master hook to the latch) three ways:
//!
//! * [`engine`] runs the growth process directly, picking the parent block
//!   with probability `W_k / S_n` and then a point inside it;
//! * [`couplings`] samples the bucket representation `sum_k J_k * D'_k` and
//!   the independent approximation `sum_k I_k * D'_k`, plus the coupling
//!   between them;
//! * [`exactoracle`] enumerates every growth history for tiny instances.
//!
//! [`stats`] holds the Monte Carlo harness and the diagnostics used to
//! compare simulated depths with the limiting constants.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blocks;
pub mod couplings;
pub mod engine;
mod error;
pub mod exactoracle;
pub mod fenwick;
pub mod rational;
pub mod rng;
pub mod stats;

pub use blocks::{BlockFamily, BlockInstance, DepthLaw, Distribution, FamilySpec, Moments};
pub use couplings::{ExpectedWeights, WeightTrace};
pub use engine::{DepthRecord, GrowthState};
pub use error::{Error, Result};
pub use exactoracle::{DepthPmf, ExactBlock};
