//! Controlled stochastic delay differential equations for advertising goodwill.
//!
//! The crate simulates the goodwill SDDE with distributed (or point) delays in
//! both the state and the control, lifts it to an evolution equation on
//! `X = ℝ × L²([-r, 0])`, solves the linear-utility / quadratic-cost HJB
//! problem in closed form and confirms optimality of the resulting control by
//! Monte Carlo.
//!
//! Monte Carlo paths run on rayon when the `parallel` feature is enabled
//! (the default); [`Execution::Sequential`] is always available and produces
//! bit-identical results.

pub mod error;
pub mod grid;
pub mod hjb;
pub mod lift;
pub mod mc;
pub mod noise;
pub mod params;
pub mod sdde;
pub mod stability;
pub mod verification;

pub use error::{Error, Result};
pub use grid::SegmentPath;
pub use hjb::{hamiltonian, solve, solve_c, solve_w, Hamiltonian, LinearValueFunction, W1Value};
pub use lift::{
    adjoint_residual, apply_a, apply_astar, apply_b, apply_m, check_equivalence, inner_product,
    refinement_study, simulate_lifted, EquivalenceReport, LiftedState, LiftedTrajectory,
    RefinementRow,
};
pub use mc::{Estimate, Execution, McConfig};
pub use noise::NoisePath;
pub use params::{ScenarioParams, StateKernel};
pub use sdde::{
    mc_estimate_objective, mc_estimate_objective_with, objective_samples, simulate_paths,
    simulate_sdde, ControlPath, Objective, Table, TrajectorySample,
};
pub use stability::{
    gamma_root, gamma_root_with, invariant_measure_condition, invariant_measure_condition_with,
    RootForm, StabilityVerdict,
};
pub use verification::{
    fundamental_identity_gap, initial_datum, mc_identity_check, verify_dominance, DominanceReport,
    IdentityCheck, LabeledControl, Violation, ViolationKind,
};
