//! Deterministic random streams.
//!
//! Every sample drawn by the estimators comes from its own ChaCha stream
//! keyed by `(seed, level, index)`, so results do not depend on the order in
//! which samples are evaluated.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// SplitMix64 finalizer, used to derive independent seeds.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn level_seed(seed: u64, level: usize) -> u64 {
    mix(seed ^ mix(level as u64 + 1))
}

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform on `[0, 1)`.
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on `(0, 1]`.
pub fn uniform_open_closed(rng: &mut impl RngCore) -> f64 {
    1.0 - uniform(rng)
}

/// Standard normal via Box-Muller.
pub fn gaussian(rng: &mut impl RngCore) -> f64 {
    let u1 = uniform_open_closed(rng);
    let u2 = uniform(rng);
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
}
