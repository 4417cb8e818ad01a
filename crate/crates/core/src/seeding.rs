//! Deterministic random sub-streams derived from one master seed.
//!
//! Each purpose (tree shape, robot placement, GP operators, ...) gets its
//! own generator, so changing how much randomness one consumer draws does
//! not shift any other.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    TreeShape = 1,
    RobotPlacement = 2,
    Evolution = 3,
    SeedDepth = 4,
    TestShape = 5,
    TestPlacement = 6,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for the `index`-th sub-stream of `purpose` under `master`.
pub fn derive_seed(master: u64, purpose: Stream, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(purpose as u64)) ^ index)
}

pub fn substream(master: u64, purpose: Stream, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, purpose, index))
}
