//! Deterministic seed splitting.
//!
//! Every simulator in this crate is a pure function of `(inputs, seed)`.
//! Independent sub-streams (Hawkes events, chain steps, Wiener increments,
//! Monte Carlo replicas) are derived from the master seed with
//! [`split_seed`], so replicas can run in any order and on any number of
//! threads without changing the result.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sub-stream lanes. Each simulator draws from its own lane so that
/// changing, say, the number of chain steps never perturbs the Wiener
/// increments.
pub mod lane {
    pub const EVENTS: u64 = 1;
    pub const CHAIN: u64 = 2;
    pub const WIENER: u64 = 3;
    pub const REPLICA: u64 = 4;
}

/// SplitMix64 finalizer; a bijection on `u64`.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a sub-seed from `(seed, lane, index)`.
///
/// For a fixed master seed the map `(lane, index) -> sub-seed` is injective
/// as long as `lane < 2^16` and `index < 2^48`, which the callers respect
/// (lanes are small constants, indices pack an epsilon index and a replica
/// index).
pub fn split_seed(seed: u64, lane: u64, index: u64) -> u64 {
    debug_assert!(lane < 1 << 16);
    debug_assert!(index < 1 << 48);
    mix(seed ^ mix((lane << 48) | index))
}

/// Pack `(epsilon index, replica index)` into a single sub-stream index.
pub fn replica_index(eps_index: usize, replica: usize) -> u64 {
    debug_assert!(eps_index < 1 << 16);
    debug_assert!(replica < 1 << 32);
    ((eps_index as u64) << 32) | replica as u64
}

/// RNG for a given sub-seed.
pub fn rng_for(seed: u64, lane: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(split_seed(seed, lane, index))
}
