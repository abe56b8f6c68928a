mod common;

use common::generic;
use goodwill_core::*;
use proptest::prelude::*;
use std::f64::consts::PI;

fn spend(p: &ScenarioParams) -> ControlPath {
    ControlPath::from_fn(p, |t| 0.4 + 0.3 * (2.0 * t).sin()).unwrap()
}

/// `x₁(-r) = 0`, as required by `A`.
fn domain_a(n: usize) -> LiftedState {
    LiftedState::new(
        0.7,
        SegmentPath::from_fn(1.0, n, |xi| (PI * (xi + 1.0) / 2.0).sin() + xi + 1.0).unwrap(),
    )
}

/// `y₀ = y₁(0)`, as required by `A*`.
fn domain_astar(n: usize) -> LiftedState {
    let tail = SegmentPath::from_fn(1.0, n, |xi| xi.cos() + xi * xi).unwrap();
    LiftedState::new(tail.last(), tail)
}

#[test]
fn adjoint_residual_decreases_at_first_order() {
    let residuals: Vec<f64> = [21usize, 41, 81, 161]
        .iter()
        .map(|&n| {
            let p = generic(n, 2.0, 0.0);
            adjoint_residual(&domain_a(n), &domain_astar(n), &p)
                .unwrap()
                .abs()
        })
        .collect();
    for w in residuals.windows(2) {
        assert!(w[1] <= 0.6 * w[0], "{residuals:?}");
    }
}

#[test]
fn structural_identity_converges_for_every_seed() {
    let p = generic(81, 2.0, 0.2);
    for seed in 0..10u64 {
        let rows = refinement_study(&p, &[21, 41, 81], |q| Ok(spend(q)), seed).unwrap();
        for w in rows.windows(2) {
            let (coarse, fine) = (
                w[0].report.max_err_structural.unwrap(),
                w[1].report.max_err_structural.unwrap(),
            );
            assert!(fine <= 0.6 * coarse, "seed {seed}: {coarse} -> {fine}");
            assert!(w[1].report.max_err_state <= 0.6 * w[0].report.max_err_state);
        }
    }
}

#[test]
fn memoryless_scenario_is_lifted_exactly() {
    let n = 21;
    let p = ScenarioParams {
        a0: -0.3,
        b0: 1.0,
        ..ScenarioParams::baseline(1.0, 2.0, n).unwrap()
    }
    .with_initial_goodwill(1.5);
    let z = spend(&p);
    let rep = check_equivalence(&p, &z, &NoisePath::new(0, 0), p.dt()).unwrap();
    assert!(rep.max_err_state <= 1e-10);
    assert!(rep.max_err_structural.unwrap() <= 1e-10);
}

#[test]
fn lifted_trajectory_starts_at_initial_datum() {
    let p = generic(11, 2.0, 0.3);
    let x = domain_a(11);
    let traj = simulate_lifted(&p, &spend(&p), &NoisePath::new(3, 0), &x, p.dt()).unwrap();
    assert_eq!(traj.states[0], x);
    assert_eq!(traj.times.len(), traj.states.len());
    assert!(traj
        .states
        .iter()
        .all(|s| s.tail.values().iter().all(|v| v.is_finite())));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tail_is_shifted_exactly_without_sources(
        tail in prop::collection::vec(-5.0f64..5.0, 11),
        head in -2.0f64..2.0,
    ) {
        let p = ScenarioParams {
            a0: -0.4,
            b0: 2.0,
            ..ScenarioParams::baseline(1.0, 1.5, 11).unwrap()
        };
        let x = LiftedState::new(head, SegmentPath::new(1.0, tail.clone()).unwrap());
        let traj = simulate_lifted(&p, &spend(&p), &NoisePath::new(0, 0), &x, p.dt()).unwrap();
        for (k, state) in traj.states.iter().enumerate() {
            for (i, v) in state.tail.values().iter().enumerate() {
                let expected = if i >= k { tail[i - k] } else { 0.0 };
                prop_assert_eq!(*v, expected);
            }
        }
    }

    #[test]
    fn lifted_paths_are_linear_in_datum_and_spend(
        alpha in 0.0f64..2.0,
        lvl1 in 0.0f64..1.0,
        lvl2 in 0.0f64..1.0,
    ) {
        let n = 11;
        let p = generic(n, 2.0, 0.0);
        let x1 = domain_a(n);
        let x2 = domain_astar(n);
        let z1 = ControlPath::from_fn(&p, |t| lvl1 * (1.0 + t)).unwrap();
        let z2 = ControlPath::constant(&p, lvl2).unwrap();
        let noise = NoisePath::new(0, 0);
        let run = |x: &LiftedState, z: &ControlPath| {
            simulate_lifted(&p, z, &noise, x, p.dt()).unwrap().states
        };
        let xc = LiftedState::new(
            alpha * x1.head + x2.head,
            SegmentPath::new(
                1.0,
                x1.tail.values().iter().zip(x2.tail.values()).map(|(a, b)| alpha * a + b).collect(),
            ).unwrap(),
        );
        let zc = ControlPath::new(
            p.dt(),
            z1.values().iter().zip(z2.values()).map(|(a, b)| alpha * a + b).collect(),
        ).unwrap();
        let combined = run(&xc, &zc);
        let (s1, s2) = (run(&x1, &z1), run(&x2, &z2));
        for k in 0..combined.len() {
            let head = alpha * s1[k].head + s2[k].head;
            prop_assert!((combined[k].head - head).abs() <= 1e-12 * (1.0 + head.abs()));
            for i in 0..n {
                let v = alpha * s1[k].tail.values()[i] + s2[k].tail.values()[i];
                prop_assert!((combined[k].tail.values()[i] - v).abs() <= 1e-12 * (1.0 + v.abs()));
            }
        }
    }

    #[test]
    fn inner_product_is_symmetric_and_bilinear(
        a in prop::collection::vec(-3.0f64..3.0, 9),
        b in prop::collection::vec(-3.0f64..3.0, 9),
        s in -2.0f64..2.0,
    ) {
        let x = LiftedState::new(a[0], SegmentPath::new(1.0, a.clone()).unwrap());
        let y = LiftedState::new(b[0], SegmentPath::new(1.0, b.clone()).unwrap());
        let xy = inner_product(&x, &y).unwrap();
        prop_assert!((xy - inner_product(&y, &x).unwrap()).abs() <= 1e-12);
        let sx = LiftedState::new(s * a[0], SegmentPath::new(1.0, a.iter().map(|v| s * v).collect()).unwrap());
        prop_assert!((inner_product(&sx, &y).unwrap() - s * xy).abs() <= 1e-10);
        prop_assert!(inner_product(&x, &x).unwrap() >= 0.0);
    }
}
