//! Deterministic random-stream derivation.
//!
//! Every random quantity in the toolkit flows from an explicit `u64` seed.
//! Substreams are derived by mixing the seed with integer tags, so packet
//! generation, scene realization, parameter initialization, and batch
//! shuffling each get an independent, reproducible stream. Two runs with the
//! same seed are bit-identical regardless of evaluation order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// splitmix64 step; the standard finalizer keeps derived seeds well spread
/// even for consecutive tags.
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a seed with a sequence of tags into a new seed.
pub fn mix(seed: u64, tags: &[u64]) -> u64 {
    let mut s = splitmix64(seed);
    for &t in tags {
        s = splitmix64(s ^ t.wrapping_mul(0xd134_2543_de82_ef95));
    }
    s
}

/// Deterministic substream for `(seed, tags)`.
pub fn stream(seed: u64, tags: &[u64]) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(mix(seed, tags))
}

/// Stream tags used across the crate. Keeping them in one place guarantees
/// that unrelated consumers never collide on the same substream.
pub mod tag {
    pub const PACKET: u64 = 1;
    pub const SCENE: u64 = 2;
    pub const INIT: u64 = 3;
    pub const BATCH: u64 = 4;
    pub const INNER: u64 = 5;
    pub const ENV: u64 = 6;
    pub const INTERFERER: u64 = 7;
    pub const OFFSET: u64 = 8;
}
