//! Acceptance criteria. Each test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test -p goodwill-core --test acceptance -- --nocapture` to see
//! them.

use std::time::{Duration, Instant};

use goodwill_core::hjb::solve;
use goodwill_core::lift::refinement_study;
use goodwill_core::verification::{initial_datum, LabeledControl};
use goodwill_core::*;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

fn verdict(criterion: &str, checks: &[(String, bool)]) {
    let ok = checks.iter().all(|(_, pass)| *pass);
    println!("[{}] {criterion}", if ok { "PASS" } else { "FAIL" });
    for (what, pass) in checks {
        println!("       {} {what}", if *pass { "ok " } else { "BAD" });
    }
    assert!(ok, "acceptance criterion failed: {criterion}");
}

fn runtime(limit: Duration, started: Instant) -> (String, bool) {
    let took = started.elapsed();
    (format!("runtime {took:.2?} < {limit:?}"), took < limit)
}

/// a₀ = -0.5, a₁ ≡ 0.3, b₀ = 1, b₁(ξ) = ξ + 1, σ = 0.2, r = 1, T = 2.
fn generic_scenario(n: usize) -> ScenarioParams {
    ScenarioParams {
        a0: -0.5,
        a1: StateKernel::Distributed(SegmentPath::constant(1.0, n, 0.3).unwrap()),
        b0: 1.0,
        b1: SegmentPath::from_fn(1.0, n, |xi| xi + 1.0).unwrap(),
        sigma: 0.2,
        delta: SegmentPath::constant(1.0, n, 0.2).unwrap(),
        ..ScenarioParams::baseline(1.0, 2.0, n).unwrap()
    }
    .with_initial_goodwill(1.0)
}

/// b₀ = 1, a₀ = 0, no memory, γ = β = 1, T = 1, σ = 0.5, η⁰ = 1.
fn canonical_scenario(n: usize) -> ScenarioParams {
    ScenarioParams {
        b0: 1.0,
        sigma: 0.5,
        ..ScenarioParams::baseline(1.0, 1.0, n).unwrap()
    }
    .with_initial_goodwill(1.0)
}

#[test]
fn criterion_1_equivalence_of_formulations() {
    let started = Instant::now();
    let rows = refinement_study(
        &generic_scenario(101),
        &[26, 51, 101],
        |p| Ok(solve(p)?.optimal_control_path()),
        20_240_601,
    )
    .unwrap();
    let mut checks = Vec::new();
    for row in &rows {
        println!(
            "       n_points = {:>3}  err_state = {:.4e}  err_structural = {:.4e}  order = {:?} / {:?}",
            row.n_points,
            row.report.max_err_state,
            row.report.max_err_structural.unwrap(),
            row.order_state,
            row.order_structural
        );
    }
    for row in &rows[1..] {
        let os = row.order_state.unwrap_or(f64::NAN);
        let om = row.order_structural.unwrap_or(f64::NAN);
        checks.push((
            format!("state order {os:.3} >= 0.8 at n = {}", row.n_points),
            os >= 0.8,
        ));
        checks.push((
            format!("structural order {om:.3} >= 0.8 at n = {}", row.n_points),
            om >= 0.8,
        ));
    }
    let finest = rows.last().unwrap().report.max_err_structural.unwrap();
    checks.push((
        format!("finest structural error {finest:.3e} <= 5e-2"),
        finest <= 5e-2,
    ));
    checks.push(runtime(Duration::from_secs(10), started));
    verdict("1 equivalence of SDDE and lifted equation", &checks);
}

#[test]
fn criterion_2_explicit_solution_oracles() {
    let started = Instant::now();
    let mut checks = Vec::new();

    let p = ScenarioParams {
        a0: -1.0,
        gamma: 2.0,
        ..ScenarioParams::baseline(1.0, 1.0, 101).unwrap()
    };
    let w = solve(&p).unwrap().w0()[0];
    let exact = 2.0 * (-1f64).exp();
    checks.push((
        format!("w0(0) = {w:.9} vs γe^(a0 T) = {exact:.9}, tol 1e-6"),
        (w - exact).abs() <= 1e-6,
    ));

    let n = 401;
    let p = ScenarioParams {
        a1: StateKernel::Distributed(SegmentPath::constant(1.0, n, 1.0).unwrap()),
        ..ScenarioParams::baseline(1.0, 1.0, n).unwrap()
    };
    let w = solve(&p).unwrap().w0()[0];
    let exact = 1f64.cosh();
    checks.push((
        format!("w0(0) = {w:.9} vs cosh(1) = {exact:.9}, tol 1e-5"),
        (w - exact).abs() <= 1e-5,
    ));

    let p = ScenarioParams {
        a0: -1.0,
        b0: 1.0,
        ..ScenarioParams::baseline(1.0, 1.0, 1001).unwrap()
    };
    let c = solve(&p).unwrap().c()[0];
    let exact = (1.0 - (-2f64).exp()) / 8.0;
    checks.push((
        format!("c(0) = {c:.9} vs (1 - e^-2)/8 = {exact:.9}, tol 1e-6"),
        (c - exact).abs() <= 1e-6,
    ));
    checks.push(runtime(Duration::from_secs(1), started));
    verdict("2 explicit solution oracles", &checks);
}

#[test]
fn criterion_3_verification_theorem() {
    let started = Instant::now();
    let p = canonical_scenario(101);
    let vf = solve(&p).unwrap();
    let z_star = vf.optimal_control_path();
    let controls = vec![
        LabeledControl::new("optimal", z_star.clone()),
        LabeledControl::new("zero", ControlPath::constant(&p, 0.0).unwrap()),
        LabeledControl::new("scaled:1.1", z_star.scaled(1.1).unwrap()),
    ];
    let rep = verify_dominance(&p, &vf, &controls, &McConfig::new(10_000, 77)).unwrap();
    let v = rep.v_value;
    let mut checks = vec![(format!("v(0, x) = {v:.6}"), (v - 1.25).abs() < 1e-12)];

    let tol = |i: usize| 3.0 * rep.j_half_widths[i] + rep.allowances[i];
    let (j0, j1, j2) = (rep.j_means[0], rep.j_means[1], rep.j_means[2]);
    checks.push((
        format!("|J(z*) - v| = {:.2e} <= {:.2e}", (j0 - v).abs(), tol(0)),
        (j0 - v).abs() <= tol(0),
    ));
    checks.push((
        format!(
            "|J(0) - (v - 0.25)| = {:.2e} <= {:.2e}",
            (j1 - (v - 0.25)).abs(),
            tol(1)
        ),
        (j1 - (v - 0.25)).abs() <= tol(1),
    ));
    checks.push((
        format!(
            "|J(1.1 z*) - (v - 0.0025)| = {:.2e} <= {:.2e}",
            (j2 - (v - 0.0025)).abs(),
            tol(2)
        ),
        (j2 - (v - 0.0025)).abs() <= tol(2),
    ));
    let adv = rep.advantage_of_optimal[2];
    checks.push((
        format!(
            "CRN advantage J(z*) - J(1.1 z*) = {:.6} ± {:.1e} resolved > 0",
            adv.mean, adv.half_width_95
        ),
        adv.mean - 3.0 * adv.half_width_95 > 0.0,
    ));
    checks.push(("no violations".into(), rep.passed()));
    checks.push(runtime(Duration::from_secs(30), started));
    verdict("3 verification theorem by Monte Carlo", &checks);
}

#[test]
fn criterion_4_fundamental_identity() {
    let p = canonical_scenario(101);
    let vf = solve(&p).unwrap();
    let z_star = vf.optimal_control_path();
    let mut checks = Vec::new();

    let g = fundamental_identity_gap(&p, &vf, &z_star).unwrap();
    checks.push((format!("G(z*) = {g:.2e} <= 1e-10"), g.abs() <= 1e-10));

    let mut runner = TestRunner::new_with_rng(
        Config::default(),
        TestRng::from_seed(RngAlgorithm::ChaCha, &[4; 32]),
    );
    let n = z_star.values().len();
    let strategy = prop::collection::vec(0.0f64..3.0, n);
    let mut min_gap = f64::INFINITY;
    for _ in 0..100 {
        let values = strategy.new_tree(&mut runner).unwrap().current();
        let z = ControlPath::new(p.dt(), values).unwrap();
        min_gap = min_gap.min(fundamental_identity_gap(&p, &vf, &z).unwrap());
    }
    checks.push((
        format!("min G over 100 random controls = {min_gap:.3e} >= 0"),
        min_gap >= 0.0,
    ));

    for seed in [1u64, 2, 3, 4, 5] {
        for (label, z) in [
            ("z*", z_star.clone()),
            ("0", ControlPath::constant(&p, 0.0).unwrap()),
        ] {
            let chk = mc_identity_check(&p, &vf, &z, &McConfig::new(10_000, seed)).unwrap();
            checks.push((
                format!(
                    "seed {seed}, z = {label}: lhs {:.5} rhs {:.5} ± {:.1e}",
                    chk.lhs, chk.rhs_mean, chk.half_width
                ),
                chk.agrees_within(3.0, 0.0),
            ));
        }
    }
    verdict("4 fundamental identity", &checks);
}

#[test]
fn criterion_5_hamiltonian_brute_force() {
    let mut runner = TestRunner::new_with_rng(
        Config::default(),
        TestRng::from_seed(RngAlgorithm::ChaCha, &[5; 32]),
    );
    let strategy = (-5.0f64..5.0, 0.25f64..2.0);
    let grid: Vec<f64> = (0..=10_000).map(|i| i as f64 * 1e-3).collect();
    let (mut worst_value, mut worst_arg, mut worst_attain) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let (bp, beta) = strategy.new_tree(&mut runner).unwrap().current();
        let objective = |z: f64| bp * z - beta * z * z;
        let (z_grid, best) =
            grid.iter()
                .map(|&z| (z, objective(z)))
                .fold(
                    (0.0, f64::NEG_INFINITY),
                    |a, b| if b.1 > a.1 { b } else { a },
                );
        let h = hamiltonian(bp, beta);
        worst_value = worst_value.max((h.value - best).abs());
        worst_arg = worst_arg.max((h.argmax - z_grid).abs());
        worst_attain = worst_attain.max((objective(h.argmax) - h.value).abs());
    }
    verdict(
        "5 Hamiltonian against grid search",
        &[
            (
                format!("max |H0 - grid max| = {worst_value:.2e} <= 1e-6"),
                worst_value <= 1e-6,
            ),
            (
                format!("max |objective(argmax) - H0| = {worst_attain:.2e} <= 1e-6"),
                worst_attain <= 1e-6,
            ),
            (
                format!("max |argmax - grid argmax| = {worst_arg:.2e} <= half grid step"),
                worst_arg <= 5e-4 + 1e-12,
            ),
        ],
    );
}

#[test]
fn criterion_6_stability() {
    let g0 = gamma_root(0.0).unwrap();
    let g1 = gamma_root(-1.0).unwrap();
    let res = (g1 / g1.tan() + 1.0).abs();
    verdict(
        "6 invariant-measure condition",
        &[
            (
                format!("gamma_root(0) = {g0:.15} vs π/2"),
                (g0 - std::f64::consts::FRAC_PI_2).abs() <= 1e-12,
            ),
            (
                format!("gamma_root(-1) = {g1:.12}, residual {res:.1e}"),
                res <= 1e-10,
            ),
            (
                "(-1, 0.5) holds".into(),
                invariant_measure_condition(-1.0, 0.5).holds,
            ),
            (
                "(-1, 1.5) fails".into(),
                !invariant_measure_condition(-1.0, 1.5).holds,
            ),
            (
                "(2, 0) fails".into(),
                !invariant_measure_condition(2.0, 0.0).holds,
            ),
        ],
    );
}

fn sinh_error(n: usize) -> f64 {
    let p = ScenarioParams {
        a1: StateKernel::Distributed(SegmentPath::constant(1.0, n, 1.0).unwrap()),
        ..ScenarioParams::baseline(1.0, 1.0, n).unwrap()
    }
    .with_initial_goodwill(1.0);
    let z = ControlPath::constant(&p, 0.0).unwrap();
    let s = simulate_sdde(&p, &z, &NoisePath::new(0, 0), p.dt()).unwrap();
    (s.terminal - (1.0 + 1f64.sinh())).abs()
}

#[test]
fn criterion_7_sdde_convergence() {
    let e1 = sinh_error(101);
    let e2 = sinh_error(201);
    let e3 = sinh_error(1001);
    let ratio = e2 / e1;
    verdict(
        "7 SDDE convergence on the distributed-delay closed form",
        &[
            (
                format!("error ratio dt=5e-3 / dt=1e-2 = {ratio:.3} ({e2:.3e} / {e1:.3e}) in [0.4, 0.6]"),
                (0.4..=0.6).contains(&ratio),
            ),
            (format!("error at dt=1e-3 = {e3:.3e} <= 5e-3"), e3 <= 5e-3),
        ],
    );
}

#[test]
fn initial_datum_of_canonical_scenario_is_head_only() {
    let x = initial_datum(&canonical_scenario(11)).unwrap();
    assert_eq!(x.head, 1.0);
    assert!(x.tail.is_zero());
}
