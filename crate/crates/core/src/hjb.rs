//! Explicit solution of the HJB equation for linear utility and quadratic
//! spending cost.
//!
//! With `φ(x) = γx₀` and `h(z) = -βz²` the Hamiltonian is
//! `H₀(p) = (⟨B,p⟩⁺)² / 4β` and the value function is affine in the state,
//! `v(t, x) = ⟨w(t), x⟩ + c(t)`, where
//!
//! ```text
//! w₀'(t) + a₀w₀(t) + ∫ a₁(ξ) w₁(t,ξ) dξ = 0,     w₀(T) = γ
//! w₁(t, ξ) = w₀(t - ξ) · 1{t - ξ ≤ T}
//! c'(t) + H₀(w(t)) = 0,                          c(T) = 0
//! ```
//!
//! The optimal spend `z*(t) = ⟨B, w(t)⟩⁺ / 2β` is deterministic.
//!
//! Integrals over `ξ` run over `[max(-r, t - T), 0]`, where the indicator is
//! one, using trapezoid weights on that truncated interval; the cut-off
//! node `t - ξ = T` carries the value `w₀(T) = γ`.

use crate::error::{Error, Result};
use crate::grid::{same_scalar, SegmentPath};
use crate::lift::{apply_a, trailing_product, LiftedState};
use crate::params::{ScenarioParams, StateKernel};
use crate::sdde::ControlPath;

/// `H₀` and its maximiser over `z ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hamiltonian {
    pub value: f64,
    pub argmax: f64,
}

/// `sup_{z ≥ 0} (bp·z - βz²)`, given the scalar `bp = ⟨B, p⟩`.
pub fn hamiltonian(bp: f64, beta: f64) -> Hamiltonian {
    let pos = bp.max(0.0);
    Hamiltonian {
        value: pos * pos / (4.0 * beta),
        argmax: pos / (2.0 * beta),
    }
}

/// A value of `w₁`, flagged when it had to be interpolated off the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct W1Value {
    pub value: f64,
    pub on_grid: bool,
}

/// `v(t, x) = ⟨w(t), x⟩ + c(t)` on the time grid. `w₁` is not stored; it is
/// read from `w₀` along characteristics.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearValueFunction {
    params: ScenarioParams,
    n_steps: usize,
    dt: f64,
    w0: Vec<f64>,
    bw: Vec<f64>,
    c: Vec<f64>,
}

/// Solves both parts.
pub fn solve(params: &ScenarioParams) -> Result<LinearValueFunction> {
    Ok(solve_c(solve_w(params)?))
}

/// Backward integration of the advanced-argument equation for `w₀`.
///
/// Classical RK4 from `T` down to `0`. At a stage time `s` the memory
/// integral needs `w₀` on `[s, s + r]`: the value at `s` itself is the stage
/// value, everything later has already been computed (midpoints by linear
/// interpolation between stored nodes).
pub fn solve_w(params: &ScenarioParams) -> Result<LinearValueFunction> {
    params.validate()?;
    let a1 = match &params.a1 {
        StateKernel::Distributed(a1) => a1.values().to_vec(),
        StateKernel::PointDelay { .. } => {
            return Err(Error::Unsupported(
                "the explicit HJB solution needs an L² state kernel a1".into(),
            ))
        }
    };
    let n_steps = params.n_steps()?;
    let h = params.dt();
    let mut w0 = vec![0.0; n_steps + 1];
    w0[n_steps] = params.gamma;

    let memory = MemoryIntegral {
        kernel: &a1,
        n_steps,
        h,
        gamma: params.gamma,
    };
    let rate = |w0: &[f64], k: usize, half_steps_back: usize, stage: f64| {
        params.a0 * stage + memory.eval(w0, k, half_steps_back, stage)
    };
    for k in (1..=n_steps).rev() {
        let wk = w0[k];
        let k1 = rate(&w0, k, 0, wk);
        let k2 = rate(&w0, k, 1, wk + 0.5 * h * k1);
        let k3 = rate(&w0, k, 1, wk + 0.5 * h * k2);
        let k4 = rate(&w0, k, 2, wk + h * k3);
        w0[k - 1] = wk + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    let mut vf = LinearValueFunction {
        params: params.clone(),
        n_steps,
        dt: h,
        w0,
        bw: Vec::new(),
        c: Vec::new(),
    };
    vf.bw = (0..=n_steps)
        .map(|k| {
            let (w1, len) = vf.w1_tail(k);
            params.b0 * vf.w0[k] + trailing_product(&w1, params.b1.values(), len, h)
        })
        .collect();
    Ok(vf)
}

/// `c(t) = ∫_t^T H₀(w(s)) ds` by the trapezoidal rule.
pub fn solve_c(mut vf: LinearValueFunction) -> LinearValueFunction {
    let beta = vf.params.beta;
    let h0: Vec<f64> = vf.bw.iter().map(|&b| hamiltonian(b, beta).value).collect();
    let mut c = vec![0.0; vf.n_steps + 1];
    for k in (0..vf.n_steps).rev() {
        c[k] = c[k + 1] + 0.5 * vf.dt * (h0[k] + h0[k + 1]);
    }
    vf.c = c;
    vf
}

/// `∫_{max(-r, s-T)}^0 kernel(ξ) w₀(s - ξ) dξ` at `s = t_k - m·h/2`.
struct MemoryIntegral<'a> {
    kernel: &'a [f64],
    n_steps: usize,
    h: f64,
    gamma: f64,
}

impl MemoryIntegral<'_> {
    fn eval(&self, w0: &[f64], k: usize, m: usize, stage: f64) -> f64 {
        let n = self.kernel.len();
        let h = self.h;
        // positions in half steps
        let s2 = 2 * k - m;
        let end2 = (s2 + 2 * (n - 1)).min(2 * self.n_steps);
        let full = (end2 - s2) / 2;
        let rem = (end2 - s2) % 2;
        let w_at = |p2: usize| {
            if p2.is_multiple_of(2) {
                w0[p2 / 2]
            } else {
                0.5 * (w0[p2 / 2] + w0[p2 / 2 + 1])
            }
        };
        let f = |j: usize| {
            let w = if j == 0 { stage } else { w_at(s2 + 2 * j) };
            self.kernel[n - 1 - j] * w
        };
        let mut total = 0.0;
        if full > 0 {
            let inner: f64 = (1..full).map(f).sum();
            total = h * (0.5 * (f(0) + f(full)) + inner);
        }
        if rem == 1 {
            // last half cell ends at u = T, ξ = -(full + ½)h
            let k_half = 0.5 * (self.kernel[n - 1 - full] + self.kernel[n - 2 - full]);
            total += 0.5 * h * 0.5 * (f(full) + k_half * self.gamma);
        }
        total
    }
}

impl LinearValueFunction {
    pub fn params(&self) -> &ScenarioParams {
        &self.params
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| k as f64 * self.dt).collect()
    }

    pub fn w0(&self) -> &[f64] {
        &self.w0
    }

    /// `⟨B, w(tₖ)⟩` at every node.
    pub fn b_dot_w(&self) -> &[f64] {
        &self.bw
    }

    /// `c(tₖ)` at every node; empty until [`solve_c`] has run.
    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// Multiplies `w₀` by `factor` and recomputes `⟨B, w⟩` and `c`.
    ///
    /// Produces a deliberately wrong value function for testing the
    /// verification checks.
    pub fn with_scaled_w0(&self, factor: f64) -> Self {
        let mut vf = self.clone();
        vf.w0.iter_mut().for_each(|w| *w *= factor);
        let h = vf.dt;
        vf.bw = (0..=vf.n_steps)
            .map(|k| {
                let (w1, len) = vf.w1_tail(k);
                vf.params.b0 * vf.w0[k] + trailing_product(&w1, vf.params.b1.values(), len, h)
            })
            .collect();
        solve_c(vf)
    }

    fn node(&self, t: f64) -> Result<usize> {
        let pos = t / self.dt;
        let k = pos.round();
        if k < 0.0 || k as usize > self.n_steps || !same_scalar(pos, k) {
            return Err(Error::OffGrid { t });
        }
        Ok(k as usize)
    }

    fn c_solved(&self) -> Result<&[f64]> {
        if self.c.is_empty() {
            return Err(Error::Unsupported("c has not been solved yet".into()));
        }
        Ok(&self.c)
    }

    /// `w₁(tₖ, ·)` on the segment grid and the number of trailing nodes
    /// inside `[max(-r, tₖ - T), 0]`.
    fn w1_tail(&self, k: usize) -> (Vec<f64>, usize) {
        let n = self.params.n_points();
        let len = (self.n_steps - k).min(n - 1) + 1;
        let w1 = (0..n)
            .map(|i| {
                let u = k + (n - 1 - i);
                if u <= self.n_steps {
                    self.w0[u]
                } else {
                    0.0
                }
            })
            .collect();
        (w1, len)
    }

    /// `w₁(t, ξ) = w₀(t - ξ) · 1{t - ξ ≤ T}`.
    pub fn eval_w1(&self, t: f64, xi: f64) -> Result<W1Value> {
        let horizon = self.params.horizon;
        if !(t >= -1e-12 && t <= horizon * (1.0 + 1e-12)) {
            return Err(Error::param(
                "t",
                format!("must lie in [0, {horizon}], got {t}"),
            ));
        }
        let r = self.params.r;
        if !(xi <= 1e-12 && xi >= -r * (1.0 + 1e-12)) {
            return Err(Error::param(
                "xi",
                format!("must lie in [-{r}, 0], got {xi}"),
            ));
        }
        let on_grid = self.node(t).is_ok() && {
            let pos = -xi / self.dt;
            same_scalar(pos, pos.round())
        };
        let u = t - xi;
        let pos = u / self.dt;
        let node = pos.round();
        if same_scalar(pos, node) {
            let j = node as usize;
            let value = if j <= self.n_steps { self.w0[j] } else { 0.0 };
            return Ok(W1Value { value, on_grid });
        }
        if u > horizon {
            return Ok(W1Value {
                value: 0.0,
                on_grid,
            });
        }
        let j = (pos.floor() as usize).min(self.n_steps - 1);
        let frac = pos - j as f64;
        Ok(W1Value {
            value: self.w0[j] + frac * (self.w0[j + 1] - self.w0[j]),
            on_grid,
        })
    }

    /// `⟨w(t), x⟩ + c(t)` for `t` on the time grid.
    pub fn value_function(&self, t: f64, x: &LiftedState) -> Result<f64> {
        let k = self.node(t)?;
        let c = self.c_solved()?;
        x.tail.check_same_grid(&self.params.b1)?;
        Ok(self.w_dot(k, x) + c[k])
    }

    fn w_dot(&self, k: usize, x: &LiftedState) -> f64 {
        let (w1, len) = self.w1_tail(k);
        self.w0[k] * x.head + trailing_product(&w1, x.tail.values(), len, self.dt)
    }

    /// `z*(tₖ) = ⟨B, w(tₖ)⟩⁺ / 2β` on the time grid.
    pub fn optimal_control_path(&self) -> ControlPath {
        let beta = self.params.beta;
        let values = self
            .bw
            .iter()
            .map(|&b| hamiltonian(b, beta).argmax)
            .collect();
        ControlPath::new(self.dt, values).expect("argmax is non-negative")
    }

    /// Left side of the integral form of the HJB equation,
    /// `φ(x) - v(t,x) + ∫_t^T [⟨Ax, w(s)⟩ + H₀(w(s))] ds`, for `x ∈ D(A)`.
    /// The trace term vanishes because `v` is affine in `x`.
    pub fn integral_residual(&self, t: f64, x: &LiftedState) -> Result<f64> {
        let k = self.node(t)?;
        let v = self.value_function(t, x)?;
        let ax = apply_a(x, &self.params)?;
        let beta = self.params.beta;
        let integrand: Vec<f64> = (k..=self.n_steps)
            .map(|s| self.w_dot(s, &ax) + hamiltonian(self.bw[s], beta).value)
            .collect();
        let integral = crate::grid::trapezoid(&integrand, self.dt);
        Ok(self.params.gamma * x.head - v + integral)
    }

    /// `w(t)` as an element of `X` (tail zero outside the indicator).
    pub fn w_state(&self, t: f64) -> Result<LiftedState> {
        let k = self.node(t)?;
        let (w1, _) = self.w1_tail(k);
        Ok(LiftedState::new(
            self.w0[k],
            SegmentPath::new(self.params.r, w1)?,
        ))
    }
}
