//! Invariant-measure condition for the point-delay goodwill model.
//!
//! The uncontrolled lifted Ornstein-Uhlenbeck process of
//! `dy = [a₀y(s) + a₁y(s-r)] ds + σ dW₀` has a unique non-degenerate invariant
//! measure when
//!
//! ```text
//! a₀ < 1,   a₀ < -a₁ < √(γ² + a₀²)
//! ```
//!
//! where `γ ∈ (0, π)` solves the transcendental equation `γ·cot γ = a₀`.
//! The equation is sometimes written with `coth`; that variant is
//! available as [`RootForm::Coth`] and returns `NoRoot` when it has no root
//! (for `a₀ ≤ 1` it never has one on `(0, π)`, since `γ·coth γ > 1` there).

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Which transcendental equation defines the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootForm {
    /// `γ·cot γ = a₀`, the classical delay-equation stability boundary.
    #[default]
    Cot,
    /// `γ·coth γ = a₀`, the literal spelling.
    Coth,
}

const ROOT_TOL: f64 = 1e-12;

/// Unique root of `γ·cot γ = a₀` in `(0, π)`; requires `a₀ < 1`.
pub fn gamma_root(a0: f64) -> Result<f64> {
    gamma_root_with(a0, RootForm::Cot)
}

pub fn gamma_root_with(a0: f64, form: RootForm) -> Result<f64> {
    if !a0.is_finite() {
        return Err(Error::param("a0", "must be finite"));
    }
    match form {
        RootForm::Cot => {
            if a0 >= 1.0 {
                return Err(Error::NoRoot(format!(
                    "γ·cot γ = {a0} has no solution in (0, π): γ·cot γ < 1 there"
                )));
            }
            // γ cot γ decreases from 1 (γ → 0⁺) to -∞ (γ → π⁻).
            Ok(bisect(|g| g / g.tan() - a0, 0.0, PI))
        }
        RootForm::Coth => {
            let upper = PI / PI.tanh();
            if !(a0 > 1.0 && a0 < upper) {
                return Err(Error::NoRoot(format!(
                    "γ·coth γ = {a0} has no solution in (0, π): γ·coth γ ranges over (1, {upper:.6})"
                )));
            }
            // γ coth γ increases from 1 to π coth π.
            Ok(bisect(|g| a0 - g / g.tanh(), 0.0, PI))
        }
    }
}

/// Bisection for a function positive near `lo` and negative near `hi`;
/// endpoints are never evaluated.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= ROOT_TOL * 1e-3 || mid == lo || mid == hi {
            return mid;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Outcome of the invariant-measure test, with its intermediate quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    pub a0: f64,
    pub a1: f64,
    pub form: RootForm,
    /// `None` when the transcendental equation has no root.
    pub gamma_root: Option<f64>,
    /// `√(γ² + a₀²)`.
    pub bound: Option<f64>,
    pub holds: bool,
}

pub fn invariant_measure_condition(a0: f64, a1: f64) -> StabilityVerdict {
    invariant_measure_condition_with(a0, a1, RootForm::Cot)
}

pub fn invariant_measure_condition_with(a0: f64, a1: f64, form: RootForm) -> StabilityVerdict {
    let gamma_root = gamma_root_with(a0, form).ok();
    let bound = gamma_root.map(|g| g.hypot(a0));
    let holds = match bound {
        Some(b) => a0 < 1.0 && a0 < -a1 && -a1 < b,
        None => false,
    };
    StabilityVerdict {
        a0,
        a1,
        form,
        gamma_root,
        bound,
        holds,
    }
}
