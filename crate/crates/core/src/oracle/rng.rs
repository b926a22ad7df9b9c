//! Reproducible random numbers for synthetic data.
//!
//! The stream is ChaCha8 seeded through `SeedableRng::seed_from_u64`.
//! Uniforms take the top 53 bits of each 64-bit output: `(x >> 11) * 2^-53`,
//! giving values in `[0, 1)`. Normals use the cosine branch of Box-Muller,
//! `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`, consuming two uniforms each.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::math::{cos, ln, sqrt};

pub struct SeededRng(ChaCha8Rng);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        sqrt(-2.0 * ln(u1)) * cos(core::f64::consts::TAU * u2)
    }

    /// Fisher-Yates, drawing `j = floor(u * (i + 1))` from the top down.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = ((self.uniform() * (i + 1) as f64) as usize).min(i);
            items.swap(i, j);
        }
    }
}
