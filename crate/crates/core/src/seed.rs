//! Deterministic seed derivation.
//!
//! Every random stream (per tree, per fold, per permutation repeat) gets its
//! own seed from the master seed and a stream id, so the work can be split
//! across threads in any order without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for `stream` under `master`.
#[inline]
pub fn derive(master: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(stream.wrapping_add(0x6A09_E667_F3BC_C909)))
}

/// Child seed under a path of stream ids, e.g. `[fold, tree]`.
pub fn derive_path(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(master, |s, &p| derive(s, p))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream tags keep unrelated uses of the same master seed apart.
pub mod stream {
    pub const FOLDS: u64 = 1;
    pub const INNER_FOLDS: u64 = 2;
    pub const FOREST: u64 = 3;
    pub const IMPORTANCE: u64 = 4;
    pub const THRESHOLD: u64 = 5;
}
