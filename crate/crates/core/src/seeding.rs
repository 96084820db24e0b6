//! Counter-based seed derivation.
//!
//! Every random stream in a run is a pure function of the master seed and a
//! small tuple (domain tag, counters), so any schedule that visits the same
//! tuples sees the same randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const INDIVIDUAL: u64 = 1;
pub const INCUMBENT_REEVAL: u64 = 2;
pub const FROZEN_GAMES: u64 = 3;
pub const ARCHIVE_REEVAL: u64 = 4;
pub const CROSSPLAY: u64 = 5;
pub const CORPUS: u64 = 6;
pub const CROSS_RUN: u64 = 7;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(master), |h, &p| splitmix64(h ^ splitmix64(p)))
}

pub fn stream(master: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, parts))
}
