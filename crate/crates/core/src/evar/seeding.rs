//! Named seed derivation.
//!
//! All randomness flows from one top-level seed through labels, so adding a
//! new check never perturbs the draws of an existing one, and shard `b` of a
//! computation always sees the same stream regardless of worker layout.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Derives a child seed from `(seed, label)`: FNV-1a over the seed bytes and
/// the label, finished with a splitmix64 avalanche. Stable across platforms.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf29ce484222325;
    const FNV_PRIME: u64 = 0x100000001b3;
    let mut h = FNV_OFFSET;
    for b in seed.to_le_bytes() {
        h = (h ^ b as u64).wrapping_mul(FNV_PRIME);
    }
    for b in label.as_bytes() {
        h = (h ^ *b as u64).wrapping_mul(FNV_PRIME);
    }
    // splitmix64 finalizer.
    h = h.wrapping_add(0x9e3779b97f4a7c15);
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d049bb133111eb);
    h ^ (h >> 31)
}

/// Generator for a named stream.
pub fn labeled_rng(seed: u64, label: &str) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(seed, label))
}

/// Generator for block `b` of a named stream.
pub fn block_rng(seed: u64, label: &str, block: u64) -> ChaCha12Rng {
    labeled_rng(seed, &format!("{label}/block{block}"))
}

/// A uniform draw in the open interval `(0, 1)`.
pub fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}
