//! Seeded RNG plumbing. Every stochastic operation takes an explicit
//! RNG so a (config, seed) pair replays bit-identically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The RNG threaded through all stochastic operations.
pub type Prng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Prng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for a labeled sub-task (per-sample,
/// per-layer, ...) from a base seed. SplitMix64 finalizer over the pair.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform values in [lo, hi).
pub fn uniform_vec(rng: &mut Prng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}
