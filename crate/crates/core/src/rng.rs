//! Deterministic random streams. Every generator draws from a ChaCha stream
//! selected by `(seed, purpose)`, so independent components of one
//! replication never share randomness and results are pure functions of the
//! seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const NOISE: u64 = 1;
pub(crate) const LOADINGS: u64 = 2;
pub(crate) const TREND_PHASES: u64 = 16;
pub(crate) const MONTE_CARLO: u64 = 64;

pub(crate) fn stream(seed: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose);
    rng
}

/// Seed for job `index` of a fan-out derived from a master seed (splitmix64).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
