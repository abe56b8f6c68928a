//! Uniform grids on the delay interval `[-r, 0]`.

use crate::error::{Error, Result};

/// Relative tolerance used when deciding whether two grid quantities coincide.
pub(crate) const GRID_RTOL: f64 = 1e-9;

/// A function on `[-r, 0]` sampled at `ξᵢ = -r + i·Δξ`, `Δξ = r / (n - 1)`.
///
/// Used for histories, kernels and the `L²` component of lifted states.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentPath {
    r: f64,
    values: Vec<f64>,
}

impl SegmentPath {
    pub fn new(r: f64, values: Vec<f64>) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::param(
                "r",
                format!("must be finite and > 0, got {r}"),
            ));
        }
        if values.len() < 2 {
            return Err(Error::param(
                "n_points",
                format!("segment grid needs at least 2 points, got {}", values.len()),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(
                "segment",
                format!("value at index {i} is not finite"),
            ));
        }
        Ok(Self { r, values })
    }

    pub fn from_fn(r: f64, n_points: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let step = r / (n_points.max(2) - 1) as f64;
        let values = (0..n_points).map(|i| f(-r + i as f64 * step)).collect();
        Self::new(r, values)
    }

    pub fn constant(r: f64, n_points: usize, value: f64) -> Result<Self> {
        Self::new(r, vec![value; n_points])
    }

    pub fn zeros(r: f64, n_points: usize) -> Result<Self> {
        Self::constant(r, n_points, 0.0)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn n_points(&self) -> usize {
        self.values.len()
    }

    /// Grid spacing `Δξ`.
    pub fn step(&self) -> f64 {
        self.r / (self.values.len() - 1) as f64
    }

    pub fn xi(&self, i: usize) -> f64 {
        if i + 1 == self.values.len() {
            0.0
        } else {
            -self.r + i as f64 * self.step()
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at `ξ = 0`.
    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Value at `ξ = -r`.
    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Linear interpolation at an arbitrary `ξ ∈ [-r, 0]` (clamped outside).
    pub fn at(&self, xi: f64) -> f64 {
        let n = self.values.len();
        let pos = ((xi + self.r) / self.step()).clamp(0.0, (n - 1) as f64);
        let i = (pos.floor() as usize).min(n - 2);
        let frac = pos - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    /// Linear re-sampling onto a grid with `n_points` nodes.
    pub fn resample(&self, n_points: usize) -> Result<Self> {
        if n_points == self.n_points() {
            return Ok(self.clone());
        }
        Self::from_fn(self.r, n_points, |xi| self.at(xi))
    }

    /// `∫_{-r}^0 f(ξ) dξ` by the trapezoidal rule.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.step())
    }

    /// `∫_{-r}^0 f(ξ) g(ξ) dξ` by the trapezoidal rule.
    pub fn dot(&self, other: &SegmentPath) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(trapezoid_product(&self.values, &other.values, self.step()))
    }

    pub fn check_same_grid(&self, other: &SegmentPath) -> Result<()> {
        if self.n_points() != other.n_points() {
            return Err(Error::GridMismatch(format!(
                "{} vs {} grid points",
                self.n_points(),
                other.n_points()
            )));
        }
        if !same_scalar(self.r, other.r) {
            return Err(Error::GridMismatch(format!(
                "delay interval length {} vs {}",
                self.r, other.r
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            r: self.r,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

pub(crate) fn same_scalar(a: f64, b: f64) -> bool {
    (a - b).abs() <= GRID_RTOL * a.abs().max(b.abs()).max(1.0)
}

/// Trapezoidal rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            h * (0.5 * (values[0] + values[n - 1]) + inner)
        }
    }
}

/// Trapezoidal rule for the product of two uniformly spaced sample sets.
pub fn trapezoid_product(a: &[f64], b: &[f64], h: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = (1..n - 1).map(|i| a[i] * b[i]).sum();
    h * (0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]) + inner)
}

/// Number of uniform steps of length `dt` in `horizon`, if `horizon` is a
/// multiple of `dt` up to rounding.
pub(crate) fn steps_in(horizon: f64, dt: f64) -> Result<usize> {
    let ratio = horizon / dt;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > 1e-7 * n.max(1.0) {
        return Err(Error::HorizonNotMultiple { horizon, dt });
    }
    Ok(n as usize)
}

/// Pairwise (cascade) summation; its rounding does not depend on how the
/// samples were produced, only on their order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_span_interval() {
        let p = SegmentPath::zeros(2.0, 5).unwrap();
        assert_eq!(p.step(), 0.5);
        assert_eq!(p.xi(0), -2.0);
        assert_eq!(p.xi(4), 0.0);
    }

    #[test]
    fn trapezoid_is_exact_for_linear() {
        let p = SegmentPath::from_fn(1.0, 11, |xi| 3.0 * xi + 1.0).unwrap();
        assert!((p.integral() - (-0.5)).abs() < 1e-14);
    }

    #[test]
    fn rejects_short_or_nonfinite() {
        assert!(SegmentPath::new(1.0, vec![1.0]).is_err());
        assert!(SegmentPath::new(1.0, vec![1.0, f64::NAN]).is_err());
        assert!(SegmentPath::new(0.0, vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn resample_preserves_linear_functions() {
        let p = SegmentPath::from_fn(1.0, 6, |xi| 2.0 * xi).unwrap();
        let q = p.resample(11).unwrap();
        for i in 0..11 {
            assert!((q.values()[i] - 2.0 * q.xi(i)).abs() < 1e-14);
        }
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = SegmentPath::zeros(1.0, 5).unwrap();
        let b = SegmentPath::zeros(1.0, 6).unwrap();
        assert!(matches!(a.dot(&b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn horizon_multiples() {
        assert_eq!(steps_in(2.0, 0.04).unwrap(), 50);
        assert!(steps_in(1.0, 0.3).is_err());
    }

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
    }
}
