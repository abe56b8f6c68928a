//! Counter-based Brownian increments.
//!
//! Every standard normal is a pure function of `(seed, path_index, index)`:
//! the ChaCha8 keystream for `seed` is split into one stream per path and
//! normal number `index` is read from words `4·index .. 4·index + 4` through
//! a Box-Muller transform. Paths can therefore be generated in any order, on
//! any number of workers, with bit-identical results.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const WORDS_PER_NORMAL: u128 = 4;

/// One Brownian path `W₀`, sampled lazily.
///
/// With `substeps = m`, increment `k` over a step `dt` is the sum of the
/// standard normals `k·m .. k·m + m`, scaled by `√(dt/m)`. A run at step `dt`
/// with `m = 2` therefore sees the same Brownian path as a run at `dt/2`
/// with `m = 1`, which is what refinement studies need.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NoisePath {
    pub seed: u64,
    pub path_index: u64,
    pub substeps: u32,
}

impl NoisePath {
    pub fn new(seed: u64, path_index: u64) -> Self {
        Self {
            seed,
            path_index,
            substeps: 1,
        }
    }

    pub fn with_substeps(mut self, substeps: u32) -> Self {
        self.substeps = substeps.max(1);
        self
    }

    fn stream(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.path_index);
        rng
    }

    /// Standard normal number `index` of this path (random access).
    pub fn standard_normal(&self, index: u64) -> f64 {
        let mut rng = self.stream();
        rng.set_word_pos(index as u128 * WORDS_PER_NORMAL);
        box_muller(&mut rng)
    }

    /// Increment `k` for step size `dt` (random access).
    pub fn increment(&self, dt: f64, k: usize) -> f64 {
        let m = self.substeps.max(1) as u64;
        let mut rng = self.stream();
        rng.set_word_pos((k as u64 * m) as u128 * WORDS_PER_NORMAL);
        let sum: f64 = (0..m).map(|_| box_muller(&mut rng)).sum();
        (dt / m as f64).sqrt() * sum
    }

    /// The first `n` increments for step size `dt`.
    pub fn increments(&self, dt: f64, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        self.fill_increments(dt, &mut out, n);
        out
    }

    pub(crate) fn fill_increments(&self, dt: f64, out: &mut Vec<f64>, n: usize) {
        let m = self.substeps.max(1);
        let scale = (dt / m as f64).sqrt();
        let mut rng = self.stream();
        out.clear();
        out.extend((0..n).map(|_| {
            let sum: f64 = (0..m).map(|_| box_muller(&mut rng)).sum();
            scale * sum
        }));
    }
}

fn box_muller(rng: &mut ChaCha8Rng) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    // u1 ∈ (0, 1] keeps the logarithm finite.
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * SCALE;
    let u2 = (rng.next_u64() >> 11) as f64 * SCALE;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_access_matches_sequential() {
        let noise = NoisePath::new(7, 3);
        let seq = noise.increments(0.01, 50);
        for k in [0, 1, 17, 49] {
            assert_eq!(seq[k], noise.increment(0.01, k));
        }
        let coarse = noise.with_substeps(3);
        let seq = coarse.increments(0.03, 10);
        assert_eq!(seq[6], coarse.increment(0.03, 6));
    }

    #[test]
    fn paths_and_seeds_differ() {
        let a = NoisePath::new(1, 0).standard_normal(0);
        let b = NoisePath::new(1, 1).standard_normal(0);
        let c = NoisePath::new(2, 0).standard_normal(0);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn substeps_couple_resolutions() {
        let fine = NoisePath::new(11, 5).increments(0.005, 200);
        let coarse = NoisePath::new(11, 5).with_substeps(2).increments(0.01, 100);
        for k in 0..100 {
            assert!((coarse[k] - (fine[2 * k] + fine[2 * k + 1])).abs() < 1e-15);
        }
    }

    #[test]
    fn moments_are_standard() {
        let noise = NoisePath::new(2024, 0);
        let z: Vec<f64> = noise.increments(1.0, 200_000);
        let n = z.len() as f64;
        let mean = z.iter().sum::<f64>() / n;
        let var = z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.015, "var {var}");
    }
}
