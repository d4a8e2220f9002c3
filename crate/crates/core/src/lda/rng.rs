//! The sampler's random source.
//!
//! xoshiro256++ whose 256-bit state is four successive SplitMix64 outputs
//! starting from the 64-bit seed. Uniform doubles take the top 53 bits:
//! `(x >> 11) * 2^-53`. Uniform integers below `n` use the multiply-shift
//! `(x * n) >> 64` without rejection.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

#[derive(Debug, Clone)]
pub struct SeededRng(Xoshiro256PlusPlus);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}

/// Seed for a derived stream, e.g. one grid cell or one held-out document.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    base.wrapping_add(index)
}
