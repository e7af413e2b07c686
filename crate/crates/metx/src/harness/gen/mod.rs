//! Seeded generators of well-typed programs for each calculus.

pub mod feps;
pub mod met;
pub mod systemc;

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use met::{gen_corpus, met_signatures, GenTerm, MetGen};

/// Deterministic random source shared by the generators.
pub struct Rng(ChaCha8Rng);

pub fn rng(seed: u64) -> Rng {
    Rng(ChaCha8Rng::seed_from_u64(seed))
}

impl Rng {
    /// Uniform in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        self.0.gen_range(0..n)
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.0.gen_bool(p)
    }

    pub fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.below(xs.len())]
    }
}
