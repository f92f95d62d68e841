//! Seeded random stream owned by a single run.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic random source for one run.
///
/// ChaCha8 output is specified by the algorithm, so a seed yields the same
/// sequence on every platform and toolchain.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform shuffle of `items` in place.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.inner);
    }

    /// Moves a uniform random subset of size `min(k, items.len())`, drawn
    /// without replacement, to the front of `items` and returns it.
    pub fn choose_prefix<'a, T>(&mut self, items: &'a mut [T], k: usize) -> &'a mut [T] {
        let k = k.min(items.len());
        // partial_shuffle leaves its sample at the tail of the slice
        items.partial_shuffle(&mut self.inner, k);
        items.rotate_right(k);
        &mut items[..k]
    }
}
