//! Seeded random streams.
//!
//! Every stochastic operation in the crate takes an explicit `&mut impl Rng`.
//! The helpers here derive independent, reproducible streams from a single
//! master seed, one per labelled job (repetition, method, ε, ...), so jobs
//! can run in any order or in parallel with identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
fn avalanche(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `master` and a path of labels.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(avalanche(master), |acc, &label| {
        avalanche(acc.wrapping_add(GOLDEN).wrapping_add(avalanche(label ^ GOLDEN)))
    })
}

pub fn stream(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

pub fn derived_stream(master: u64, path: &[u64]) -> StreamRng {
    stream(derive_seed(master, path))
}
