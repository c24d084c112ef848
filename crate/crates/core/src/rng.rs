//! Deterministic random substreams.
//!
//! Every random decision in the crate draws from a ChaCha stream keyed by
//! `(seed, name, index)`, so two components never share a stream and results do
//! not depend on scheduling order or on ambient entropy.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream names used across the crate.
pub mod streams {
    pub const SAMPLE: &str = "sample";
    pub const FOLDS: &str = "folds";
    pub const HOLDOUT: &str = "holdout";
    pub const KMEANS: &str = "kmeans";
    pub const BOOTSTRAP: &str = "bootstrap";
    pub const SYNTHETIC: &str = "synthetic";
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the 64-bit key of a named substream.
pub fn substream_seed(seed: u64, name: &str, index: u64) -> u64 {
    // FNV-1a over the name, then mixed with the seed and index.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(splitmix64(seed ^ h).wrapping_add(index))
}

pub fn substream(seed: u64, name: &str, index: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(substream_seed(seed, name, index))
}
