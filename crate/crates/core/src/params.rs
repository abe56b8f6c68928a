//! Model and objective coefficients.

use crate::error::{Error, Result};
use crate::grid::{same_scalar, steps_in, SegmentPath};

/// How past goodwill feeds back into the drift.
#[derive(Debug, Clone, PartialEq)]
pub enum StateKernel {
    /// `∫_{-r}^0 a₁(ξ) y(s+ξ) dξ` with an `L²` density on the segment grid.
    Distributed(SegmentPath),
    /// `a₁ · y(s - r)`: forgetting concentrated at the maximal lag.
    PointDelay { a1: f64 },
}

impl StateKernel {
    pub fn distributed(&self) -> Option<&SegmentPath> {
        match self {
            StateKernel::Distributed(p) => Some(p),
            StateKernel::PointDelay { .. } => None,
        }
    }

    pub fn is_point_delay(&self) -> bool {
        matches!(self, StateKernel::PointDelay { .. })
    }
}

/// Coefficients of the goodwill SDDE
///
/// ```text
/// dy = [a₀y + ∫a₁(ξ)y(s+ξ)dξ + b₀z + ∫b₁(ξ)z(s+ξ)dξ] ds + σ dW₀
/// ```
///
/// together with the objective `E[γ y(T)] - ∫ β z² ds`.
///
/// All segment paths share one grid; the simulation step is `dt = Δξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub a0: f64,
    pub a1: StateKernel,
    pub b0: f64,
    pub b1: SegmentPath,
    pub sigma: f64,
    pub r: f64,
    pub horizon: f64,
    pub eta0: f64,
    pub eta: SegmentPath,
    pub delta: SegmentPath,
    pub beta: f64,
    pub gamma: f64,
}

impl ScenarioParams {
    /// All dynamics switched off: `a₀ = b₀ = σ = 0`, zero kernels and
    /// histories, `β = γ = 1`.
    pub fn baseline(r: f64, horizon: f64, n_points: usize) -> Result<Self> {
        let zeros = SegmentPath::zeros(r, n_points)?;
        Ok(Self {
            a0: 0.0,
            a1: StateKernel::Distributed(zeros.clone()),
            b0: 0.0,
            b1: zeros.clone(),
            sigma: 0.0,
            r,
            horizon,
            eta0: 0.0,
            eta: zeros.clone(),
            delta: zeros,
            beta: 1.0,
            gamma: 1.0,
        })
    }

    /// Sets `η⁰` and a constant history `η ≡ η⁰`.
    pub fn with_initial_goodwill(mut self, eta0: f64) -> Self {
        self.eta0 = eta0;
        self.eta = self.eta.map(|_| eta0);
        self
    }

    pub fn n_points(&self) -> usize {
        self.eta.n_points()
    }

    /// Time step tied to the segment grid.
    pub fn dt(&self) -> f64 {
        self.r / (self.n_points() - 1) as f64
    }

    /// Number of time steps on `[0, T]`.
    pub fn n_steps(&self) -> Result<usize> {
        steps_in(self.horizon, self.dt())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ))
            }
        };
        positive("r", self.r)?;
        positive("T", self.horizon)?;
        positive("beta", self.beta)?;
        positive("gamma", self.gamma)?;
        if !(self.a0.is_finite() && self.a0 <= 0.0) {
            return Err(Error::param("a0", format!("must be <= 0, got {}", self.a0)));
        }
        if !(self.b0.is_finite() && self.b0 >= 0.0) {
            return Err(Error::param("b0", format!("must be >= 0, got {}", self.b0)));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::param(
                "sigma",
                format!("must be >= 0, got {}", self.sigma),
            ));
        }
        if !(self.eta0.is_finite() && self.eta0 >= 0.0) {
            return Err(Error::param(
                "eta0",
                format!("must be >= 0, got {}", self.eta0),
            ));
        }

        let n = self.n_points();
        let mut paths: Vec<(&'static str, &SegmentPath)> =
            vec![("b1", &self.b1), ("eta", &self.eta), ("delta", &self.delta)];
        match &self.a1 {
            StateKernel::Distributed(p) => paths.push(("a1", p)),
            StateKernel::PointDelay { a1 } => {
                if !a1.is_finite() {
                    return Err(Error::param("a1", "point-delay coefficient must be finite"));
                }
            }
        }
        for (name, p) in paths {
            if p.n_points() != n || !same_scalar(p.r(), self.r) {
                return Err(Error::param(
                    name,
                    format!(
                        "grid ({} points on [-{}, 0]) differs from the scenario grid ({n} points on [-{}, 0])",
                        p.n_points(),
                        p.r(),
                        self.r
                    ),
                ));
            }
        }
        for (name, p) in [("b1", &self.b1), ("eta", &self.eta), ("delta", &self.delta)] {
            if let Some(i) = p.values().iter().position(|&v| v < 0.0) {
                return Err(Error::param(
                    name,
                    format!(
                        "must be >= 0, value at ξ = {} is {}",
                        p.xi(i),
                        p.values()[i]
                    ),
                ));
            }
        }
        if !same_scalar(self.eta.last(), self.eta0) {
            return Err(Error::param(
                "eta",
                format!(
                    "eta(0) = {} must equal eta0 = {}",
                    self.eta.last(),
                    self.eta0
                ),
            ));
        }
        self.n_steps()?;
        Ok(())
    }

    /// Checks that `dt` is the grid step of this scenario.
    pub fn check_step(&self, dt: f64) -> Result<usize> {
        let expected = self.dt();
        if !(dt.is_finite() && same_scalar(dt, expected)) {
            return Err(Error::MisalignedStep { dt, expected });
        }
        self.n_steps()
    }

    /// The same scenario on a grid with `n_points` nodes (segment paths are
    /// linearly re-interpolated).
    pub fn resample(&self, n_points: usize) -> Result<Self> {
        let a1 = match &self.a1 {
            StateKernel::Distributed(p) => StateKernel::Distributed(p.resample(n_points)?),
            k @ StateKernel::PointDelay { .. } => k.clone(),
        };
        Ok(Self {
            a1,
            b1: self.b1.resample(n_points)?,
            eta: self.eta.resample(n_points)?,
            delta: self.delta.resample(n_points)?,
            ..self.clone()
        })
    }

    /// The same scenario with the step divided by `factor`.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        self.resample((self.n_points() - 1) * factor.max(1) + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ScenarioParams {
        ScenarioParams::baseline(1.0, 2.0, 11).unwrap()
    }

    #[test]
    fn baseline_is_valid() {
        base().validate().unwrap();
        assert_eq!(base().n_steps().unwrap(), 20);
    }

    #[test]
    fn rejects_positive_a0() {
        let p = ScenarioParams { a0: 0.1, ..base() };
        assert!(matches!(
            p.validate(),
            Err(Error::InvalidParameter { name: "a0", .. })
        ));
    }

    #[test]
    fn rejects_history_mismatch() {
        let p = ScenarioParams {
            eta0: 1.0,
            ..base()
        };
        assert!(matches!(
            p.validate(),
            Err(Error::InvalidParameter { name: "eta", .. })
        ));
        base().with_initial_goodwill(1.0).validate().unwrap();
    }

    #[test]
    fn rejects_negative_b1() {
        let p = ScenarioParams {
            b1: SegmentPath::constant(1.0, 11, -0.1).unwrap(),
            ..base()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn rejects_non_multiple_horizon() {
        let p = ScenarioParams {
            horizon: 1.05,
            ..base()
        };
        assert!(matches!(
            p.validate(),
            Err(Error::HorizonNotMultiple { .. })
        ));
    }

    #[test]
    fn rejects_foreign_grid() {
        let p = ScenarioParams {
            b1: SegmentPath::zeros(1.0, 12).unwrap(),
            ..base()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn refine_halves_step() {
        let p = base().refine(2).unwrap();
        assert_eq!(p.n_points(), 21);
        assert!((p.dt() - 0.05).abs() < 1e-15);
        p.validate().unwrap();
    }

    #[test]
    fn misaligned_step_is_rejected() {
        assert!(matches!(
            base().check_step(0.07),
            Err(Error::MisalignedStep { .. })
        ));
        assert_eq!(base().check_step(0.1).unwrap(), 20);
    }
}
