//! Euler-Maruyama simulation of the goodwill SDDE and Monte Carlo estimation
//! of the objective functional.

use crate::error::{Error, Result};
use crate::grid::same_scalar;
use crate::mc::{map_paths, Estimate, McConfig};
use crate::noise::NoisePath;
use crate::params::{ScenarioParams, StateKernel};

/// Non-negative advertising spend, piecewise constant on `[tₖ, tₖ₊₁)`.
///
/// Holds one sample per node of `[0, T]`, i.e. `T/dt + 1` values; the last
/// sample only enters the lifted state at `t = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPath {
    dt: f64,
    values: Vec<f64>,
}

impl ControlPath {
    pub fn new(dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::param("dt", format!("must be > 0, got {dt}")));
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::NegativeControl { index, value });
        }
        Ok(Self { dt, values })
    }

    pub fn constant(params: &ScenarioParams, value: f64) -> Result<Self> {
        let n = params.n_steps()?;
        Self::new(params.dt(), vec![value; n + 1])
    }

    pub fn from_fn(params: &ScenarioParams, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = params.n_steps()?;
        let dt = params.dt();
        Self::new(dt, (0..=n).map(|k| f(k as f64 * dt)).collect())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.dt, self.values.iter().map(|v| v * factor).collect())
    }

    /// The same piecewise-constant spend on a grid `factor` times finer.
    pub fn refine(&self, factor: usize) -> Self {
        let factor = factor.max(1);
        let n = self.values.len() - 1;
        let mut values = Vec::with_capacity(n * factor + 1);
        for &v in &self.values[..n] {
            values.extend(std::iter::repeat_n(v, factor));
        }
        values.push(self.values[n]);
        Self {
            dt: self.dt / factor as f64,
            values,
        }
    }

    /// `Σₖ z(tₖ)² dt` over the `n_steps` intervals.
    pub fn quadratic_cost(&self, n_steps: usize) -> f64 {
        self.values[..n_steps].iter().map(|z| z * z).sum::<f64>() * self.dt
    }

    pub(crate) fn check_against(&self, params: &ScenarioParams) -> Result<usize> {
        let n_steps = params.n_steps()?;
        if !same_scalar(self.dt, params.dt()) {
            return Err(Error::MisalignedStep {
                dt: self.dt,
                expected: params.dt(),
            });
        }
        if self.values.len() != n_steps + 1 {
            return Err(Error::ControlLength {
                got: self.values.len(),
                expected: n_steps + 1,
            });
        }
        Ok(n_steps)
    }
}

/// One simulated goodwill path.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub times: Vec<f64>,
    pub goodwill: Vec<f64>,
    pub control: ControlPath,
    pub terminal: f64,
}

/// Piecewise-linear function given by `(x, y)` knots, extrapolated linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    knots: Vec<(f64, f64)>,
}

impl Table {
    pub fn new(mut knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::param("table", "needs at least two knots"));
        }
        if knots.iter().any(|(x, y)| !(x.is_finite() && y.is_finite())) {
            return Err(Error::param("table", "knots must be finite"));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        if knots.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::param("table", "duplicate abscissa"));
        }
        Ok(Self { knots })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        let i = match k.iter().position(|&(kx, _)| kx > x) {
            Some(0) => 0,
            Some(i) => i - 1,
            None => k.len() - 2,
        };
        let (x0, y0) = k[i];
        let (x1, y1) = k[i + 1];
        y0 + (x - x0) * (y1 - y0) / (x1 - x0)
    }
}

/// Terminal utility and running cost of the objective `E[φ₀(y(T)) - ∫h₀(z)ds]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// `φ₀(x) = γx`, `h₀(z) = βz²`.
    Quadratic { beta: f64, gamma: f64 },
    /// User-supplied tabulated `φ₀` and `h₀`.
    Tabulated { utility: Table, cost: Table },
}

impl Objective {
    pub fn from_params(params: &ScenarioParams) -> Self {
        Objective::Quadratic {
            beta: params.beta,
            gamma: params.gamma,
        }
    }

    fn running_cost(&self, control: &ControlPath, n_steps: usize) -> f64 {
        match self {
            Objective::Quadratic { beta, .. } => beta * control.quadratic_cost(n_steps),
            Objective::Tabulated { cost, .. } => {
                control.values[..n_steps]
                    .iter()
                    .map(|&z| cost.eval(z))
                    .sum::<f64>()
                    * control.dt
            }
        }
    }

    fn utility(&self, terminal: f64) -> f64 {
        match self {
            Objective::Quadratic { gamma, .. } => gamma * terminal,
            Objective::Tabulated { utility, .. } => utility.eval(terminal),
        }
    }
}

/// Everything about a (scenario, control) pair that does not depend on the
/// noise.
struct Prepared<'a> {
    params: &'a ScenarioParams,
    n_steps: usize,
    lag: usize,
    dt: f64,
    /// Trapezoid weights times `a₁(ξᵢ)`, or empty when `a₁ ≡ 0`.
    state_weights: Vec<f64>,
    point_delay: Option<f64>,
    /// `b₀z(tₖ) + ∫b₁(ξ)z(tₖ+ξ)dξ` for each step.
    forcing: Vec<f64>,
}

impl<'a> Prepared<'a> {
    fn new(params: &'a ScenarioParams, control: &ControlPath, dt: f64) -> Result<Self> {
        params.validate()?;
        let n_steps = params.check_step(dt)?;
        control.check_against(params)?;
        let n = params.n_points();
        let lag = n - 1;
        let dt = params.dt();
        let trap = |i: usize| if i == 0 || i == lag { 0.5 * dt } else { dt };

        let (state_weights, point_delay) = match &params.a1 {
            StateKernel::Distributed(a1) if a1.is_zero() => (Vec::new(), None),
            StateKernel::Distributed(a1) => (
                a1.values()
                    .iter()
                    .enumerate()
                    .map(|(i, a)| trap(i) * a)
                    .collect(),
                None,
            ),
            StateKernel::PointDelay { a1 } => (Vec::new(), Some(*a1)),
        };

        let z = control.values();
        let delta = params.delta.values();
        let b1 = params.b1.values();
        let b1_zero = params.b1.is_zero();
        let forcing = (0..n_steps)
            .map(|k| {
                let lagged = if b1_zero {
                    0.0
                } else {
                    (0..n)
                        .map(|i| {
                            let zi = if k + i < lag {
                                delta[k + i]
                            } else {
                                z[k + i - lag]
                            };
                            trap(i) * b1[i] * zi
                        })
                        .sum()
                };
                params.b0 * z[k] + lagged
            })
            .collect();

        Ok(Self {
            params,
            n_steps,
            lag,
            dt,
            state_weights,
            point_delay,
            forcing,
        })
    }

    /// Integrates one path; `buf` receives `y` at time indices `-lag ..= n_steps`.
    fn integrate(&self, noise: &NoisePath, buf: &mut Vec<f64>, dw: &mut Vec<f64>) {
        let p = self.params;
        noise.fill_increments(self.dt, dw, self.n_steps);
        buf.clear();
        buf.extend_from_slice(&p.eta.values()[..self.lag]);
        buf.push(p.eta0);
        for k in 0..self.n_steps {
            let y = buf[k + self.lag];
            let memory = match self.point_delay {
                Some(a1) => a1 * buf[k],
                None => self
                    .state_weights
                    .iter()
                    .zip(&buf[k..])
                    .map(|(w, y)| w * y)
                    .sum(),
            };
            let drift = p.a0 * y + memory + self.forcing[k];
            buf.push(y + drift * self.dt + p.sigma * dw[k]);
        }
    }
}

/// Simulates one path of the controlled SDDE.
///
/// `dt` must equal the segment-grid step `r/(n_points - 1)` and `T` must be a
/// multiple of it. Histories before time zero are read from `eta`/`delta`.
pub fn simulate_sdde(
    params: &ScenarioParams,
    control: &ControlPath,
    noise: &NoisePath,
    dt: f64,
) -> Result<TrajectorySample> {
    let prep = Prepared::new(params, control, dt)?;
    let mut buf = Vec::new();
    let mut dw = Vec::new();
    prep.integrate(noise, &mut buf, &mut dw);
    let goodwill = buf.split_off(prep.lag);
    let times = (0..=prep.n_steps).map(|k| k as f64 * prep.dt).collect();
    Ok(TrajectorySample {
        times,
        terminal: goodwill[prep.n_steps],
        goodwill,
        control: control.clone(),
    })
}

/// Simulates `cfg.n_paths` paths and returns the full goodwill trajectories
/// (time indices `0 ..= n_steps`) in path order.
pub fn simulate_paths(
    params: &ScenarioParams,
    control: &ControlPath,
    cfg: &McConfig,
) -> Result<Vec<Vec<f64>>> {
    let prep = Prepared::new(params, control, params.dt())?;
    Ok(map_paths(cfg.execution, cfg.n_paths, |i| {
        let noise = NoisePath::new(cfg.seed, i).with_substeps(cfg.substeps);
        let (mut buf, mut dw) = (Vec::new(), Vec::new());
        prep.integrate(&noise, &mut buf, &mut dw);
        buf.split_off(prep.lag)
    }))
}

/// Per-path objective samples `φ₀(y(T)) - Σₖ h₀(z(tₖ))dt` in path order.
///
/// Path `i` uses `NoisePath::new(cfg.seed, i)`, so two calls with the same
/// seed share their noise (common random numbers).
pub fn objective_samples(
    params: &ScenarioParams,
    objective: &Objective,
    control: &ControlPath,
    cfg: &McConfig,
) -> Result<Vec<f64>> {
    let prep = Prepared::new(params, control, params.dt())?;
    let cost = objective.running_cost(control, prep.n_steps);
    Ok(map_paths(cfg.execution, cfg.n_paths, |i| {
        let noise = NoisePath::new(cfg.seed, i).with_substeps(cfg.substeps);
        let (mut buf, mut dw) = (Vec::new(), Vec::new());
        prep.integrate(&noise, &mut buf, &mut dw);
        objective.utility(buf[buf.len() - 1]) - cost
    }))
}

/// Monte Carlo estimate of `J(z) = E[γy(T)] - Σₖ βz(tₖ)² dt`.
pub fn mc_estimate_objective(
    params: &ScenarioParams,
    control: &ControlPath,
    n_paths: usize,
    dt: f64,
    seed: u64,
) -> Result<Estimate> {
    params.check_step(dt)?;
    mc_estimate_objective_with(
        params,
        &Objective::from_params(params),
        control,
        &McConfig::new(n_paths, seed),
    )
}

pub fn mc_estimate_objective_with(
    params: &ScenarioParams,
    objective: &Objective,
    control: &ControlPath,
    cfg: &McConfig,
) -> Result<Estimate> {
    if cfg.n_paths < 2 {
        return Err(Error::param(
            "n_paths",
            format!("must be >= 2, got {}", cfg.n_paths),
        ));
    }
    let samples = objective_samples(params, objective, control, cfg)?;
    Ok(Estimate::from_samples(&samples))
}
