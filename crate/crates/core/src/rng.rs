//! Seed derivation.
//!
//! Every random draw in a run descends from one root seed. Each consumer asks
//! for a child seed by purpose label (and optionally a round or trial index),
//! so a single sub-computation can be replayed without re-running the others.
//!
//! The derivation is `splitmix64(root ^ fnv1a64(purpose) ^ splitmix64(index))`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Purpose labels used by the selection loop.
pub mod purpose {
    pub const SPLIT: &str = "split";
    pub const INIT: &str = "init";
    pub const MODEL: &str = "model";
    pub const PROBE: &str = "probe";
    pub const CONTROLLER: &str = "controller";
    pub const EVAL: &str = "eval";
    pub const BASELINE: &str = "baseline";
    pub const STREAM: &str = "stream";
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a64(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn derive_seed(root: u64, purpose: &str, index: u64) -> u64 {
    splitmix64(root ^ fnv1a64(purpose) ^ splitmix64(index))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derive_rng(root: u64, purpose: &str, index: u64) -> Rng {
    rng_from_seed(derive_seed(root, purpose, index))
}
