//! Solver checks against the exact oracle.

use feasim::envs::{
    generate_demos, scripted_expert, ChainEnv, EnvKind, GridEnv, MoveSet, PointMassEnv,
};
use feasim::fmdp::{build_onestep_fmdp, build_trajectory_fmdp, FMdp};
use feasim::mdp::{rollout, Environment, Metric, StateVec, Trajectory};
use feasim::solver::{q_learning, value_iteration, SolverConfig};
use feasim::Error;

fn retag(mut demos: Vec<Trajectory>, demonstrator: u64, base: u64) -> Vec<Trajectory> {
    for (i, d) in demos.iter_mut().enumerate() {
        d.demonstrator_id = demonstrator;
        d.trajectory_id = base + i as u64;
    }
    demos
}

/// Tracking MDPs spanning all three families, tracked by imitators whose
/// dynamics differ from the demonstrators'.
fn fmdp_suite() -> Vec<(&'static str, FMdp<EnvKind>)> {
    let grid_i4 = EnvKind::Grid(GridEnv::new(MoveSet::I4));
    let mut suite = Vec::new();

    let env = GridEnv::new(MoveSet::I4);
    let expert = scripted_expert(&env).unwrap().randomized();
    let demos = retag(generate_demos(&env, &expert, 5, 1).unwrap(), 0, 0);
    suite.push((
        "grid-i4-tracks-i4",
        build_trajectory_fmdp(&demos, grid_i4.clone(), Metric::L2, 0.9).unwrap(),
    ));

    let env = GridEnv::new(MoveSet::D8);
    let expert = scripted_expert(&env).unwrap();
    let demos = retag(generate_demos(&env, &expert, 1, 0).unwrap(), 1, 0);
    suite.push((
        "grid-i4-tracks-diagonal",
        build_trajectory_fmdp(&demos, grid_i4.clone(), Metric::L2, 0.9).unwrap(),
    ));

    let env = GridEnv::new(MoveSet::DJ);
    let expert = scripted_expert(&env).unwrap();
    let demos = retag(generate_demos(&env, &expert, 3, 0).unwrap(), 2, 0);
    suite.push((
        "grid-i4-tracks-jumps",
        build_trajectory_fmdp(&demos, grid_i4.clone(), Metric::L2, 0.9).unwrap(),
    ));

    let env = PointMassEnv::new(1, true);
    let expert = scripted_expert(&env).unwrap();
    let demos = retag(generate_demos(&env, &expert, 2, 0).unwrap(), 3, 0);
    suite.push((
        "ground-tracks-flyer",
        build_trajectory_fmdp(
            &demos,
            EnvKind::PointMass(PointMassEnv::new(1, false)),
            Metric::L2,
            0.9,
        )
        .unwrap(),
    ));

    let env = ChainEnv::new(45.0, 90.0, 90.0).unwrap();
    let expert = scripted_expert(&env).unwrap();
    let demos = retag(generate_demos(&env, &expert, 2, 0).unwrap(), 4, 0);
    suite.push((
        "chain-tracks-coarse-steps",
        build_trajectory_fmdp(
            &demos,
            EnvKind::Chain(ChainEnv::new(15.0, 90.0, 90.0).unwrap()),
            Metric::L2,
            0.9,
        )
        .unwrap(),
    ));

    let env = GridEnv::new(MoveSet::D8);
    let expert = scripted_expert(&env).unwrap();
    let demos = retag(generate_demos(&env, &expert, 2, 0).unwrap(), 5, 0);
    suite.push((
        "one-step-grid-i4-tracks-diagonal",
        build_onestep_fmdp(&demos, grid_i4, Metric::L2).unwrap(),
    ));

    suite
}

#[test]
fn q_learning_matches_value_iteration_on_every_suite_fmdp() {
    for (name, fmdp) in fmdp_suite() {
        let vi = value_iteration(&fmdp, 1e-12, 200_000).unwrap();
        let ql = q_learning(&fmdp, &SolverConfig::default()).unwrap();
        for s0 in fmdp.initial_states() {
            let optimal = vi.value(s0).unwrap();
            let greedy = rollout(&fmdp, &ql, s0, fmdp.horizon())
                .unwrap()
                .discounted_return;
            assert!(
                (greedy - optimal).abs() < 1e-3,
                "{name}: greedy {greedy} vs optimal {optimal}"
            );
        }
    }
}

#[test]
fn q_learning_is_deterministic_per_config() {
    let env = GridEnv::new(MoveSet::D8);
    let expert = scripted_expert(&env).unwrap();
    let demos = retag(generate_demos(&env, &expert, 1, 0).unwrap(), 0, 0);
    let fmdp = build_trajectory_fmdp(&demos, GridEnv::new(MoveSet::I4), Metric::L2, 0.9).unwrap();
    let config = SolverConfig {
        episodes: 2_000,
        seed: 11,
        ..SolverConfig::default()
    };
    let a = q_learning(&fmdp, &config).unwrap();
    let b = q_learning(&fmdp, &config).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn median_error_is_non_increasing_as_episodes_double() {
    let env = GridEnv::new(MoveSet::D8);
    let expert = scripted_expert(&env).unwrap();
    let demos = retag(generate_demos(&env, &expert, 1, 0).unwrap(), 0, 0);
    let fmdp = build_trajectory_fmdp(&demos, GridEnv::new(MoveSet::I4), Metric::L2, 0.9).unwrap();
    let vi = value_iteration(&fmdp, 1e-12, 200_000).unwrap();
    let optimal = vi.value(&fmdp.initial_states()[0]).unwrap();

    let median_err = |episodes: usize| -> f64 {
        let mut errs: Vec<f64> = (0..5)
            .map(|seed| {
                let ql = q_learning(
                    &fmdp,
                    &SolverConfig {
                        episodes,
                        seed,
                        ..SolverConfig::default()
                    },
                )
                .unwrap();
                let out = rollout(&fmdp, &ql, &fmdp.initial_states()[0], fmdp.horizon()).unwrap();
                (out.discounted_return - optimal).abs()
            })
            .collect();
        errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        errs[2]
    };

    let mut previous = f64::INFINITY;
    for episodes in [125, 250, 500, 1000, 2000] {
        let err = median_err(episodes);
        assert!(
            err <= previous + 1e-9,
            "median error rose from {previous} to {err} at {episodes} episodes"
        );
        previous = err;
    }
}

#[test]
fn state_cap_overflow_points_at_q_learning() {
    let env = PointMassEnv::new(1, true);
    let expert = scripted_expert(&env).unwrap();
    let demos = retag(generate_demos(&env, &expert, 3, 0).unwrap(), 0, 0);
    let fmdp = build_trajectory_fmdp(
        &demos,
        EnvKind::PointMass(PointMassEnv::new(1, false)),
        Metric::L2,
        0.9,
    )
    .unwrap();
    match value_iteration(&fmdp, 1e-12, 100) {
        Err(Error::TooLarge { cap }) => {
            assert_eq!(cap, 100);
            assert!(Error::TooLarge { cap }.to_string().contains("q_learning"));
        }
        other => panic!("expected a too-large error, got {other:?}"),
    }
}

#[test]
fn single_transition_one_step_value_is_the_best_single_step_reward() {
    // One episode, one step: the optimal value is the best immediate reward.
    let demo = Trajectory::new(
        0,
        0,
        vec![StateVec::from([0.0, 0.0]), StateVec::from([1.0, 1.0])],
    )
    .unwrap();
    let fmdp = build_onestep_fmdp(&[demo], GridEnv::new(MoveSet::I4), Metric::L2).unwrap();
    let vi = value_iteration(&fmdp, 1e-12, 1_000).unwrap();
    assert!((vi.value(&fmdp.initial_states()[0]).unwrap() - (-1.0)).abs() < 1e-12);

    let ql = q_learning(
        &fmdp,
        &SolverConfig {
            episodes: 2_000,
            ..SolverConfig::default()
        },
    )
    .unwrap();
    let out = rollout(&fmdp, &ql, &fmdp.initial_states()[0], 1).unwrap();
    assert!((out.discounted_return - (-1.0)).abs() < 1e-9);
}

#[test]
fn grid_optimal_value_matches_the_expert_return_closed_form() {
    // Eight -1 steps with the +10 bonus on the last entry, discounted at
    // 0.99: sum_{t=0..7} 0.99^t * (-1) + 0.99^7 * 10.
    let env = GridEnv::new(MoveSet::I4);
    let vi = value_iteration(&env, 1e-12, 10_000).unwrap();
    let gamma: f64 = 0.99;
    let expected = -(1.0 - gamma.powi(8)) / (1.0 - gamma) + gamma.powi(7) * 10.0;
    let v0 = vi.value(&StateVec::from([0.0, 0.0])).unwrap();
    assert!((v0 - expected).abs() < 1e-9, "v0={v0}, expected={expected}");
}
