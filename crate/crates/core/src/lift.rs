//! The lift of the SDDE to `X = ℝ × L²([-r, 0])`.
//!
//! The lifted state `Y = (Y₀, Y₁)` solves `dY = (AY + Bz) dt + G dW₀` where
//!
//! ```text
//! A (x₀, x₁) = (a₀x₀ + x₁(0), a₁(·)x₀ - x₁')     on x₁(-r) = 0
//! A*(x₀, x₁) = (a₀x₀ + ⟨a₁, x₁⟩, x₁')           on x₀ = x₁(0)
//! B z        = (b₀z, b₁(·)z),   G w = (σw, 0)
//! ```
//!
//! and the structural operator `M(x₀, x₁, v) = (x₀, m)` with
//! `m(ξ) = ∫_{-r}^ξ a₁(ζ)x₁(ζ-ξ)dζ + ∫_{-r}^ξ b₁(ζ)v(ζ-ξ)dζ` links the two
//! formulations: `Y₀ = y` and, for `t ≥ r`, `Y(t) = M(Y₀(t), Y₀(t+·), z(t+·))`.
//!
//! The tail is transported exactly: at CFL one a step of the truncated right
//! shift semigroup moves every sample one cell toward `ξ = 0` with zero
//! inflow at `ξ = -r`.

use crate::error::{Error, Result};
use crate::grid::{steps_in, trapezoid_product, SegmentPath};
use crate::noise::NoisePath;
use crate::params::{ScenarioParams, StateKernel};
use crate::sdde::{simulate_sdde, ControlPath};

/// Tolerance on the boundary conditions defining `D(A)` and `D(A*)`.
pub const DOMAIN_TOL: f64 = 1e-8;

/// An element `(x₀, x₁(·))` of `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedState {
    pub head: f64,
    pub tail: SegmentPath,
}

impl LiftedState {
    pub fn new(head: f64, tail: SegmentPath) -> Self {
        Self { head, tail }
    }

    pub fn zero(r: f64, n_points: usize) -> Result<Self> {
        Ok(Self::new(0.0, SegmentPath::zeros(r, n_points)?))
    }

    /// `|x|_X`.
    pub fn norm(&self) -> f64 {
        inner_product(self, self)
            .expect("same grid")
            .max(0.0)
            .sqrt()
    }

    pub fn sub(&self, other: &LiftedState) -> Result<LiftedState> {
        self.tail.check_same_grid(&other.tail)?;
        let tail: Vec<f64> = self
            .tail
            .values()
            .iter()
            .zip(other.tail.values())
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self::new(
            self.head - other.head,
            SegmentPath::new(self.tail.r(), tail)?,
        ))
    }
}

/// `⟨x, y⟩ = x₀y₀ + ∫ x₁y₁ dξ`, tail term by the trapezoidal rule.
pub fn inner_product(x: &LiftedState, y: &LiftedState) -> Result<f64> {
    Ok(x.head * y.head + x.tail.dot(&y.tail)?)
}

fn distributed_a1(params: &ScenarioParams) -> Result<&SegmentPath> {
    match &params.a1 {
        StateKernel::Distributed(a1) => Ok(a1),
        StateKernel::PointDelay { .. } => Err(Error::Unsupported(
            "the lifted operators need an L² state kernel a1; point-delay kernels are not supported"
                .into(),
        )),
    }
}

fn check_grid(params: &ScenarioParams, path: &SegmentPath) -> Result<()> {
    path.check_same_grid(&params.b1)
}

/// `M(x₀, x₁, v)`, with the inner integrals by the trapezoidal rule over
/// `[-r, ξᵢ]`.
pub fn apply_m(
    x0: f64,
    x1: &SegmentPath,
    v: &SegmentPath,
    params: &ScenarioParams,
) -> Result<LiftedState> {
    let a1 = distributed_a1(params)?.values();
    check_grid(params, x1)?;
    check_grid(params, v)?;
    let b1 = params.b1.values();
    let (x1, v) = (x1.values(), v.values());
    let n = a1.len();
    let h = params.b1.step();
    let tail = (0..n)
        .map(|i| {
            // ζ = ξⱼ, ζ - ξᵢ = ξ_{j-i+n-1}
            let integrand = |j: usize| {
                let l = j + n - 1 - i;
                a1[j] * x1[l] + b1[j] * v[l]
            };
            if i == 0 {
                return 0.0;
            }
            let inner: f64 = (1..i).map(integrand).sum();
            h * (0.5 * (integrand(0) + integrand(i)) + inner)
        })
        .collect();
    Ok(LiftedState::new(x0, SegmentPath::new(params.r, tail)?))
}

/// Second-order central difference, one-sided second order at the ends.
fn derivative(x: &[f64], h: f64) -> Vec<f64> {
    let n = x.len();
    if n == 2 {
        let d = (x[1] - x[0]) / h;
        return vec![d, d];
    }
    (0..n)
        .map(|i| match i {
            0 => (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * h),
            i if i == n - 1 => (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) / (2.0 * h),
            i => (x[i + 1] - x[i - 1]) / (2.0 * h),
        })
        .collect()
}

/// `A x` for `x ∈ D(A)` (requires `x₁(-r) = 0`).
pub fn apply_a(x: &LiftedState, params: &ScenarioParams) -> Result<LiftedState> {
    let a1 = distributed_a1(params)?;
    check_grid(params, &x.tail)?;
    if x.tail.first().abs() > DOMAIN_TOL {
        return Err(Error::Domain(format!(
            "D(A) requires x1(-r) = 0, got x1(-r) = {}",
            x.tail.first()
        )));
    }
    let d = derivative(x.tail.values(), x.tail.step());
    let tail = a1
        .values()
        .iter()
        .zip(&d)
        .map(|(a, dx)| a * x.head - dx)
        .collect();
    Ok(LiftedState::new(
        params.a0 * x.head + x.tail.last(),
        SegmentPath::new(params.r, tail)?,
    ))
}

/// `A* x` for `x ∈ D(A*)` (requires `x₀ = x₁(0)`).
pub fn apply_astar(x: &LiftedState, params: &ScenarioParams) -> Result<LiftedState> {
    let a1 = distributed_a1(params)?;
    check_grid(params, &x.tail)?;
    if (x.head - x.tail.last()).abs() > DOMAIN_TOL {
        return Err(Error::Domain(format!(
            "D(A*) requires x0 = x1(0), got x0 = {} and x1(0) = {}",
            x.head,
            x.tail.last()
        )));
    }
    let d = derivative(x.tail.values(), x.tail.step());
    Ok(LiftedState::new(
        params.a0 * x.head + a1.dot(&x.tail)?,
        SegmentPath::new(params.r, d)?,
    ))
}

/// `B z = (b₀z, b₁(·)z)`.
pub fn apply_b(z: f64, params: &ScenarioParams) -> Result<LiftedState> {
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::NegativeControl { index: 0, value: z });
    }
    Ok(LiftedState::new(params.b0 * z, params.b1.map(|b| b * z)))
}

/// A path of the lifted equation.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<LiftedState>,
    pub control: ControlPath,
}

impl LiftedTrajectory {
    pub fn heads(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.head).collect()
    }
}

/// Simulates the lifted equation from `x_init`.
///
/// Each step updates the head by Euler-Maruyama, shifts the tail one cell
/// toward `ξ = 0` (zero inflow) and then adds the source
/// `(a₁(ξ)Y₀ + b₁(ξ)z)·dt` evaluated at the start of the step.
pub fn simulate_lifted(
    params: &ScenarioParams,
    control: &ControlPath,
    noise: &NoisePath,
    x_init: &LiftedState,
    dt: f64,
) -> Result<LiftedTrajectory> {
    params.validate()?;
    let a1 = distributed_a1(params)?.values();
    let n_steps = params.check_step(dt)?;
    control.check_against(params)?;
    check_grid(params, &x_init.tail)?;
    let dt = params.dt();
    let b1 = params.b1.values();
    let no_source = a1.iter().chain(b1).all(|&v| v == 0.0);
    let z = control.values();
    let dw = noise.increments(dt, n_steps);

    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(x_init.clone());
    for k in 0..n_steps {
        let cur = &states[k];
        let y0 = cur.head;
        let head =
            y0 + (params.a0 * y0 + cur.tail.last() + params.b0 * z[k]) * dt + params.sigma * dw[k];
        let old = cur.tail.values();
        let mut tail = Vec::with_capacity(old.len());
        tail.push(0.0);
        tail.extend_from_slice(&old[..old.len() - 1]);
        if !no_source {
            for (i, v) in tail.iter_mut().enumerate() {
                *v += (a1[i] * y0 + b1[i] * z[k]) * dt;
            }
        }
        states.push(LiftedState::new(head, SegmentPath::new(params.r, tail)?));
    }
    Ok(LiftedTrajectory {
        times: (0..=n_steps).map(|k| k as f64 * dt).collect(),
        states,
        control: control.clone(),
    })
}

/// Discrepancies between the SDDE and its lift driven by the same noise.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    /// `max_t |y(t) - Y₀(t)|`.
    pub max_err_state: f64,
    /// `max_{t ≥ r} |Y(t) - M(Y₀(t), Y₀(t+·), z(t+·))|_X`; `None` when `T < r`.
    pub max_err_structural: Option<f64>,
    pub notice: Option<String>,
}

/// Runs both simulators on identical increments, the lift started from
/// `M(η⁰, η, δ)`.
pub fn check_equivalence(
    params: &ScenarioParams,
    control: &ControlPath,
    noise: &NoisePath,
    dt: f64,
) -> Result<EquivalenceReport> {
    if params.a1.is_point_delay() {
        return Err(Error::Unsupported(
            "the structural operator M is defined only for L² kernels; point-delay scenarios cannot be lifted this way"
                .into(),
        ));
    }
    let x_init = apply_m(params.eta0, &params.eta, &params.delta, params)?;
    let direct = simulate_sdde(params, control, noise, dt)?;
    let lifted = simulate_lifted(params, control, noise, &x_init, dt)?;

    let max_err_state = direct
        .goodwill
        .iter()
        .zip(&lifted.states)
        .map(|(y, s)| (y - s.head).abs())
        .fold(0.0, f64::max);

    let lag = params.n_points() - 1;
    let n_steps = lifted.states.len() - 1;
    let (max_err_structural, notice) = if n_steps < lag {
        (
            None,
            Some(format!(
                "structural check skipped: T = {} < r = {}",
                params.horizon, params.r
            )),
        )
    } else {
        let heads = lifted.heads();
        let z = control.values();
        let mut worst: f64 = 0.0;
        for k in lag..=n_steps {
            let past = SegmentPath::new(params.r, heads[k - lag..=k].to_vec())?;
            let spend = SegmentPath::new(params.r, z[k - lag..=k].to_vec())?;
            let m = apply_m(heads[k], &past, &spend, params)?;
            worst = worst.max(lifted.states[k].sub(&m)?.norm());
        }
        (Some(worst), None)
    };

    Ok(EquivalenceReport {
        max_err_state,
        max_err_structural,
        notice,
    })
}

/// One resolution of a refinement study.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementRow {
    pub n_points: usize,
    pub dt: f64,
    pub report: EquivalenceReport,
    /// `log₂` of the error ratio to the previous (coarser) row.
    pub order_state: Option<f64>,
    pub order_structural: Option<f64>,
}

/// Equivalence check at several nested resolutions driven by one Brownian
/// path.
///
/// `levels` lists segment-grid sizes; `(n_max - 1)` must be a multiple of
/// every `(n - 1)`. Coarse levels aggregate the increments of the finest one.
pub fn refinement_study(
    params: &ScenarioParams,
    levels: &[usize],
    control: impl Fn(&ScenarioParams) -> Result<ControlPath>,
    seed: u64,
) -> Result<Vec<RefinementRow>> {
    let finest = *levels
        .iter()
        .max()
        .ok_or_else(|| Error::param("levels", "at least one resolution is required"))?;
    let mut rows: Vec<RefinementRow> = Vec::with_capacity(levels.len());
    for &n in levels {
        if n < 2 || !(finest - 1).is_multiple_of(n - 1) {
            return Err(Error::param(
                "levels",
                format!("{n} points do not nest into the finest grid of {finest} points"),
            ));
        }
        let level = params.resample(n)?;
        steps_in(level.horizon, level.dt())?;
        let substeps = ((finest - 1) / (n - 1)) as u32;
        let z = control(&level)?;
        let noise = NoisePath::new(seed, 0).with_substeps(substeps);
        let report = check_equivalence(&level, &z, &noise, level.dt())?;
        let order =
            |prev: Option<f64>, cur: Option<f64>, prev_dt: f64, cur_dt: f64| match (prev, cur) {
                (Some(a), Some(b)) if a > 0.0 && b > 0.0 => {
                    Some((a / b).ln() / (prev_dt / cur_dt).ln())
                }
                _ => None,
            };
        let (order_state, order_structural) = match rows.last() {
            Some(prev) => (
                order(
                    Some(prev.report.max_err_state),
                    Some(report.max_err_state),
                    prev.dt,
                    level.dt(),
                ),
                order(
                    prev.report.max_err_structural,
                    report.max_err_structural,
                    prev.dt,
                    level.dt(),
                ),
            ),
            None => (None, None),
        };
        rows.push(RefinementRow {
            n_points: n,
            dt: level.dt(),
            report,
            order_state,
            order_structural,
        });
    }
    Ok(rows)
}

/// `⟨Ax, y⟩ - ⟨x, A*y⟩`, zero in the continuum.
pub fn adjoint_residual(x: &LiftedState, y: &LiftedState, params: &ScenarioParams) -> Result<f64> {
    let ax = apply_a(x, params)?;
    let asy = apply_astar(y, params)?;
    Ok(inner_product(&ax, y)? - inner_product(x, &asy)?)
}

/// `∫ f(ξ)g(ξ)dξ` restricted to the trailing `len` nodes of the grid.
pub(crate) fn trailing_product(f: &[f64], g: &[f64], len: usize, h: f64) -> f64 {
    let n = f.len();
    trapezoid_product(&f[n - len..], &g[n - len..], h)
}
