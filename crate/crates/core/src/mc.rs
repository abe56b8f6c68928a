//! Path-parallel Monte Carlo plumbing.

use crate::grid::pairwise_sum;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// How independent Monte Carlo paths are evaluated.
///
/// `Parallel` uses rayon when the `parallel` feature is enabled and falls back
/// to sequential evaluation otherwise. Both produce identical bits: samples
/// are collected in path order and reduced by pairwise summation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Monte Carlo settings shared by the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub n_paths: usize,
    pub seed: u64,
    /// Normal draws per time step, see [`crate::NoisePath`].
    pub substeps: u32,
    pub execution: Execution,
}

impl McConfig {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        Self {
            n_paths,
            seed,
            substeps: 1,
            execution: Execution::default(),
        }
    }

    pub fn with_substeps(mut self, substeps: u32) -> Self {
        self.substeps = substeps.max(1);
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

/// Sample mean with a 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub half_width_95: f64,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = pairwise_sum(samples) / n as f64;
        if n < 2 {
            return Self {
                mean,
                half_width_95: f64::INFINITY,
            };
        }
        let sq: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = pairwise_sum(&sq) / (n - 1) as f64;
        Self {
            mean,
            half_width_95: Z_95 * (var / n as f64).sqrt(),
        }
    }
}

/// Evaluates `f(path_index)` for every path and returns the results in path
/// order.
pub fn map_paths<T, F>(execution: Execution, n_paths: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match execution {
        Execution::Sequential => (0..n_paths as u64).map(f).collect(),
        Execution::Parallel => parallel_map(n_paths, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(n_paths: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n_paths as u64).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(n_paths: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..n_paths as u64).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let seq = map_paths(Execution::Sequential, 1000, |i| i * i);
        let par = map_paths(Execution::Parallel, 1000, |i| i * i);
        assert_eq!(seq, par);
    }

    #[test]
    fn estimate_of_constant_has_zero_width() {
        let e = Estimate::from_samples(&[2.5; 10]);
        assert_eq!(e.mean, 2.5);
        assert_eq!(e.half_width_95, 0.0);
    }

    #[test]
    fn half_width_uses_sample_variance() {
        let e = Estimate::from_samples(&[0.0, 2.0]);
        assert_eq!(e.mean, 1.0);
        // s² = 2, n = 2
        assert!((e.half_width_95 - Z_95).abs() < 1e-15);
    }
}
