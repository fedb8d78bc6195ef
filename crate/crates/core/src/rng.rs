//! Seeded random streams.
//!
//! Every random operation takes an explicit `u64` seed and builds its own
//! ChaCha8 stream, so results never depend on call order elsewhere. Child
//! seeds for trials and sub-steps are derived with a SplitMix64 mix of
//! `(seed, tag, index)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives an independent child seed. `tag` separates purposes (sampling,
/// test set, CV folds, ...), `index` separates trials.
pub fn derive_seed(seed: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ tag) ^ index)
}

/// Tags used with [`derive_seed`].
pub mod tags {
    pub const SAMPLE: u64 = 1;
    pub const TEST_SET: u64 = 2;
    pub const CV: u64 = 3;
    pub const PRIOR: u64 = 4;
    pub const BASIS: u64 = 5;
    pub const KMEANS: u64 = 6;
    pub const CORPUS: u64 = 7;
    pub const TRIAL: u64 = 8;
}
