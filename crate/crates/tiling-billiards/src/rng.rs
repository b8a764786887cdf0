//! Seeded randomness.
//!
//! Every random draw in the crate comes from [`SplitMix64`]: the state
//! advances by `0x9E3779B97F4A7C15` and each output is the state passed
//! through `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB; z ^ (z >> 31)`.
//! Uniform reals use the top 53 bits of an output.
//! Ensemble member `i` of a run with seed `s` uses [`member_seed`]`(s, i)`.

use rand::{Rng, SeedableRng};
pub use rand_xoshiro::SplitMix64;

pub fn seeded(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// Seed of the `index`-th member of an ensemble run.
pub fn member_seed(seed: u64, index: u64) -> u64 {
    let mut rng = seeded(seed ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    rng.gen()
}

/// Point uniformly distributed on the open simplex of dimension `d - 1`.
pub fn uniform_simplex<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..d)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln())
        .collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}
