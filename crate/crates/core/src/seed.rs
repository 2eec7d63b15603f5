//! Seed splitting.
//!
//! A master seed expands into per-task seeds with
//! `derive_seed(master, &[a, b, ...])`, which folds each component through a
//! SplitMix64 finalizer. Task `i` of a sweep uses `derive_seed(master, &[i])`;
//! nested sweeps append more components. String tags go through
//! [`tag_hash`] first.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every seeded draw in the workspace.
pub type SeededRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// 64-bit FNV-1a of a tag string.
pub fn tag_hash(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3))
}

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}
