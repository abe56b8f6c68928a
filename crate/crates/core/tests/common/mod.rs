#![allow(dead_code)]

use goodwill_core::{ScenarioParams, SegmentPath, StateKernel};

/// Decaying goodwill with constant memory, a spend ramp and a short burst of
/// past spending.
pub fn generic(n: usize, horizon: f64, sigma: f64) -> ScenarioParams {
    ScenarioParams {
        a0: -0.5,
        a1: StateKernel::Distributed(SegmentPath::constant(1.0, n, 0.3).unwrap()),
        b0: 1.0,
        b1: SegmentPath::from_fn(1.0, n, |xi| xi + 1.0).unwrap(),
        sigma,
        delta: SegmentPath::from_fn(1.0, n, |xi| 0.5 + 0.5 * (3.0 * xi).cos()).unwrap(),
        ..ScenarioParams::baseline(1.0, horizon, n).unwrap()
    }
    .with_initial_goodwill(1.0)
}

/// No memory, `b₀ = 1`, `β = γ = 1`, `T = 1`, `η ≡ 1`.
pub fn canonical(n: usize, sigma: f64) -> ScenarioParams {
    ScenarioParams {
        b0: 1.0,
        sigma,
        ..ScenarioParams::baseline(1.0, 1.0, n).unwrap()
    }
    .with_initial_goodwill(1.0)
}

/// `a₁ ≡ 1`, everything else off; `y(t) = 1 + sinh t` from `η ≡ 1`.
pub fn unit_memory(n: usize) -> ScenarioParams {
    ScenarioParams {
        a1: StateKernel::Distributed(SegmentPath::constant(1.0, n, 1.0).unwrap()),
        ..ScenarioParams::baseline(1.0, 1.0, n).unwrap()
    }
    .with_initial_goodwill(1.0)
}
