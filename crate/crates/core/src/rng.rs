//! Reproducible random-number streams.
//!
//! Every simulated object draws from a counter-based stream keyed by
//! `(seed, stream id)`, so ensembles are independent of scheduling and
//! thread count, and nested objects (tree nodes, retries) derive child
//! stream ids by hashing rather than by consuming parent randomness.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG for one logical stream of one run.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child stream id; splitmix64-style finalizer over the pair.
pub fn child_stream(stream: u64, index: u64) -> u64 {
    let mut z = stream
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(index)
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
