//! Seed derivation and the crate-standard RNG.
//!
//! All randomized operations take a `u64` seed and derive independent
//! streams with [`mix_seed`], so a run is reproducible from one base seed
//! no matter how the work is split or parallelized.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Crate-standard seeded RNG.
pub fn rng_from_seed(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Derives a child seed from a base seed and a list of stream tags.
///
/// splitmix64 finalizer applied to the running hash; collisions between
/// distinct tag paths are as unlikely as 64-bit hash collisions.
pub fn mix_seed(base: u64, tags: &[u64]) -> u64 {
    let mut h = splitmix64(base ^ 0x9e37_79b9_7f4a_7c15);
    for &t in tags {
        h = splitmix64(h ^ splitmix64(t.wrapping_add(0xbf58_476d_1ce4_e5b9)));
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
