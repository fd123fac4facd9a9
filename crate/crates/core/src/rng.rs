//! Seeded randomness for reproducible start vectors.
//!
//! Draws come from SplitMix64 (`rand_xoshiro::SplitMix64`), converted to
//! doubles in `[0, 1)` by `rand`'s standard 53-bit mapping, so a seed fixes
//! every value on every platform.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

pub fn generator(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// `n` draws from `(0, 1]`.
pub fn unit_draws(n: usize, seed: u64) -> Vec<f64> {
    let mut g = generator(seed);
    (0..n).map(|_| 1.0 - g.gen::<f64>()).collect()
}

/// Interior strategy with weights drawn from `(0, 1]`.
pub fn random_strategy(n: usize, seed: u64) -> crate::games::Strategy {
    crate::games::Strategy::from_weights(&unit_draws(n, seed)).expect("positive weights")
}
