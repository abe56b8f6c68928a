//! Monte Carlo confirmation of the verification theorem for the explicit
//! value function.
//!
//! For an integral solution `v` and any admissible spend `z` the fundamental
//! identity reads
//!
//! ```text
//! v(0, x) = J(0, x; z) + ∫₀ᵀ [H₀(w(s)) - ⟨B, w(s)⟩z(s) + βz(s)²] ds
//! ```
//!
//! so `v ≥ J(z)` for every `z`, with equality exactly at `z*`. The checks
//! here estimate `J` on the SDDE (equivalent to the lift started from
//! `M(η⁰, η, δ)`), compare against `v` and the deterministic gap, and use
//! common random numbers across controls.

use crate::error::{Error, Result};
use crate::hjb::{hamiltonian, LinearValueFunction};
use crate::lift::{apply_m, LiftedState};
use crate::mc::{Estimate, McConfig};
use crate::params::ScenarioParams;
use crate::sdde::{objective_samples, ControlPath, Objective};

/// Runs are inconclusive below this many paths.
pub const MIN_CONCLUSIVE_PATHS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledControl {
    pub label: String,
    pub control: ControlPath,
}

impl LabeledControl {
    pub fn new(label: impl Into<String>, control: ControlPath) -> Self {
        Self {
            label: label.into(),
            control,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// `J - 3·hw > v + allowance`: the control beats the candidate value.
    Dominance,
    /// `|J + G - v| > 3·hw + allowance`: the fundamental identity fails.
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub label: String,
    pub kind: ViolationKind,
}

/// Per-control results of [`verify_dominance`].
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    /// `v(0, M(η⁰, η, δ))`.
    pub v_value: f64,
    pub control_labels: Vec<String>,
    pub j_means: Vec<f64>,
    pub j_half_widths: Vec<f64>,
    /// Deterministic gap `G(z)` of the fundamental identity.
    pub gaps: Vec<f64>,
    /// `2·|J_dt - J_{dt/2}|`, the discretisation allowance.
    pub allowances: Vec<f64>,
    /// `J(z*) - J(z)` path by path under common random numbers.
    pub advantage_of_optimal: Vec<Estimate>,
    /// `J(z*) - v(0, x)`.
    pub optimal_gap: f64,
    pub optimal_half_width: f64,
    pub n_paths: usize,
    pub violations: Vec<Violation>,
}

impl DominanceReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn conclusive(&self) -> bool {
        self.n_paths >= MIN_CONCLUSIVE_PATHS
    }
}

/// `x = M(η⁰, η, δ)`, the lifted initial datum of the scenario.
pub fn initial_datum(params: &ScenarioParams) -> Result<LiftedState> {
    apply_m(params.eta0, &params.eta, &params.delta, params)
}

fn check_vf(params: &ScenarioParams, vf: &LinearValueFunction) -> Result<usize> {
    let n_steps = params.n_steps()?;
    if vf.n_steps() != n_steps || vf.params().n_points() != params.n_points() {
        return Err(Error::GridMismatch(format!(
            "value function solved on {} steps / {} points, scenario has {} / {}",
            vf.n_steps(),
            vf.params().n_points(),
            n_steps,
            params.n_points()
        )));
    }
    if vf.c().is_empty() {
        return Err(Error::Unsupported("c has not been solved yet".into()));
    }
    Ok(n_steps)
}

/// `G(z) = ∫₀ᵀ [H₀(w) - ⟨B,w⟩z + βz²] ds`, left-point rule on the control's
/// piecewise-constant intervals. Non-negative, zero at `z*`.
pub fn fundamental_identity_gap(
    params: &ScenarioParams,
    vf: &LinearValueFunction,
    control: &ControlPath,
) -> Result<f64> {
    let n_steps = check_vf(params, vf)?;
    control.check_against(params)?;
    let beta = params.beta;
    let bw = vf.b_dot_w();
    let sum: f64 = control.values()[..n_steps]
        .iter()
        .zip(bw)
        .map(|(&z, &b)| hamiltonian(b, beta).value - b * z + beta * z * z)
        .sum();
    Ok(sum * vf.dt())
}

/// Both sides of the fundamental identity at `(0, M(η⁰, η, δ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs_mean: f64,
    pub half_width: f64,
}

impl IdentityCheck {
    pub fn agrees_within(&self, n_half_widths: f64, allowance: f64) -> bool {
        (self.lhs - self.rhs_mean).abs() <= n_half_widths * self.half_width + allowance
    }
}

/// `lhs = v(0, x)`, `rhs = mean J + G(z)`.
pub fn mc_identity_check(
    params: &ScenarioParams,
    vf: &LinearValueFunction,
    control: &ControlPath,
    cfg: &McConfig,
) -> Result<IdentityCheck> {
    if cfg.n_paths < 2 {
        return Err(Error::param(
            "n_paths",
            format!("must be >= 2, got {}", cfg.n_paths),
        ));
    }
    let x = initial_datum(params)?;
    let lhs = vf.value_function(0.0, &x)?;
    let gap = fundamental_identity_gap(params, vf, control)?;
    let samples = objective_samples(params, &Objective::from_params(params), control, cfg)?;
    let j = Estimate::from_samples(&samples);
    Ok(IdentityCheck {
        lhs,
        rhs_mean: j.mean + gap,
        half_width: j.half_width_95,
    })
}

/// Estimates `J(z)` for every control and checks `v ≥ J` and the
/// fundamental identity.
///
/// All controls, and `z*`, share the noise paths of `cfg.seed`. The main
/// estimates aggregate two normal draws per step so that the run at `dt/2`
/// used for the allowance follows the same Brownian path.
pub fn verify_dominance(
    params: &ScenarioParams,
    vf: &LinearValueFunction,
    controls: &[LabeledControl],
    cfg: &McConfig,
) -> Result<DominanceReport> {
    if cfg.n_paths < 2 {
        return Err(Error::param(
            "n_paths",
            format!("must be >= 2, got {}", cfg.n_paths),
        ));
    }
    check_vf(params, vf)?;
    let x = initial_datum(params)?;
    let v_value = vf.value_function(0.0, &x)?;
    let objective = Objective::from_params(params);
    let coarse_cfg = cfg.with_substeps(cfg.substeps * 2);
    let fine_params = params.refine(2)?;
    let fine_objective = Objective::from_params(&fine_params);

    let z_star = vf.optimal_control_path();
    let star_samples = objective_samples(params, &objective, &z_star, &coarse_cfg)?;
    let star = Estimate::from_samples(&star_samples);

    let mut report = DominanceReport {
        v_value,
        control_labels: Vec::with_capacity(controls.len()),
        j_means: Vec::with_capacity(controls.len()),
        j_half_widths: Vec::with_capacity(controls.len()),
        gaps: Vec::with_capacity(controls.len()),
        allowances: Vec::with_capacity(controls.len()),
        advantage_of_optimal: Vec::with_capacity(controls.len()),
        optimal_gap: star.mean - v_value,
        optimal_half_width: star.half_width_95,
        n_paths: cfg.n_paths,
        violations: Vec::new(),
    };

    for lc in controls {
        let samples = objective_samples(params, &objective, &lc.control, &coarse_cfg)?;
        let j = Estimate::from_samples(&samples);
        let fine = Estimate::from_samples(&objective_samples(
            &fine_params,
            &fine_objective,
            &lc.control.refine(2),
            cfg,
        )?);
        let allowance = 2.0 * (j.mean - fine.mean).abs();
        let gap = fundamental_identity_gap(params, vf, &lc.control)?;
        let advantage: Vec<f64> = star_samples
            .iter()
            .zip(&samples)
            .map(|(s, o)| s - o)
            .collect();

        if j.mean - 3.0 * j.half_width_95 > v_value + allowance {
            report.violations.push(Violation {
                label: lc.label.clone(),
                kind: ViolationKind::Dominance,
            });
        }
        if (j.mean + gap - v_value).abs() > 3.0 * j.half_width_95 + allowance {
            report.violations.push(Violation {
                label: lc.label.clone(),
                kind: ViolationKind::Identity,
            });
        }

        report.control_labels.push(lc.label.clone());
        report.j_means.push(j.mean);
        report.j_half_widths.push(j.half_width_95);
        report.gaps.push(gap);
        report.allowances.push(allowance);
        report
            .advantage_of_optimal
            .push(Estimate::from_samples(&advantage));
    }
    Ok(report)
}
