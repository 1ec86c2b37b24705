//! Counter-based seed derivation.
//!
//! Every random stream in an experiment is keyed by a tuple of integers
//! (master seed, supersample index, trial index, purpose tag) and derived by
//! hashing, so the values never depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags that keep streams for different uses disjoint.
pub mod stream {
    pub const SUPERSAMPLE: u64 = 0x5355_5045;
    pub const SPLIT: u64 = 0x5350_4c54;
    pub const LEARNER: u64 = 0x4c52_4e52;
    pub const STABILITY: u64 = 0x5354_4142;
    pub const SUBSETS: u64 = 0x5355_4253;
    pub const NOISE: u64 = 0x4e4f_4953;
    pub const MEMBER: u64 = 0x4d45_4d42;
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash an ordered tuple of words into one seed.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x6a09_e667_f3bc_c908, |acc, &p| mix64(acc ^ mix64(p)))
}

pub fn rng_for(parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(parts))
}

/// Incremental order-sensitive digest over words and floats.
#[derive(Debug, Clone, Copy)]
pub struct Digest(u64);

impl Default for Digest {
    fn default() -> Self {
        Digest(0xcbf2_9ce4_8422_2325)
    }
}

impl Digest {
    pub fn word(mut self, w: u64) -> Self {
        self.0 = mix64(self.0 ^ w);
        self
    }

    pub fn float(self, x: f64) -> Self {
        // +0.0 and -0.0 are the same input.
        let x = if x == 0.0 { 0.0 } else { x };
        self.word(x.to_bits())
    }

    pub fn floats(self, xs: &[f64]) -> Self {
        xs.iter().fold(self.word(xs.len() as u64), |d, &x| d.float(x))
    }

    pub fn finish(self) -> u64 {
        self.0
    }
}
