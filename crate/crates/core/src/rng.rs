//! Seeded random streams. Every stochastic stage derives its own stream from
//! the master seed by a fixed offset so stages can be re-run in isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fixed per-stage offsets applied to the master seed.
pub mod stage {
    pub const SPLIT: u64 = 0;
    pub const NOISE: u64 = 101;
    pub const INTERPOLATION: u64 = 202;
    pub const GMM: u64 = 303;
    pub const CVAE: u64 = 404;
    pub const SMOTE: u64 = 505;
    pub const POLICY: u64 = 606;
    pub const NNAA: u64 = 808;
}

pub fn derive(master: u64, offset: u64) -> u64 {
    master.wrapping_add(offset)
}
