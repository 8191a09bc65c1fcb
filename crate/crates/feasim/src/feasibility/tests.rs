use super::*;
use crate::envs::{GridEnv, MoveSet};
use crate::fmdp::build_trajectory_fmdp;
use crate::mdp::{Metric, StateVec};
use crate::solver::value_iteration;

fn traj(demonstrator: u64, id: u64, pts: &[[f64; 2]]) -> Trajectory {
    Trajectory::new(
        demonstrator,
        id,
        pts.iter().map(|p| StateVec::from(*p)).collect(),
    )
    .unwrap()
}

fn diag_demo() -> Trajectory {
    traj(
        1,
        0,
        &[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [4.0, 4.0]],
    )
}

/// Optimal discounted tracking penalty of the diagonal demo under cardinal
/// moves at gamma_f = 0.9: distances (1, sqrt2, sqrt5, 2*sqrt2) weighted by
/// 0.9^t, t = 1..4.
fn diag_expected() -> f64 {
    -(0.9 * 1.0 + 0.81 * 2.0f64.sqrt() + 0.729 * 5.0f64.sqrt() + 0.6561 * 2.0 * 2.0f64.sqrt())
}

fn raw(demonstrator: u64, id: u64, value: f64) -> RawScore {
    RawScore {
        demonstrator_id: demonstrator,
        trajectory_id: id,
        raw_reward: value,
    }
}

#[test]
fn diag_demo_scores_the_hand_value() {
    let env = GridEnv::new(MoveSet::I4);
    let fmdp = build_trajectory_fmdp(&[diag_demo()], env, Metric::L2, 0.9).unwrap();
    let solution = value_iteration(&fmdp, 1e-12, 100_000).unwrap();
    let score = score_trajectory(&solution.policy, &fmdp, &diag_demo()).unwrap();
    assert!(
        (score - diag_expected()).abs() < 1e-9,
        "score={score}, expected={}",
        diag_expected()
    );
    // The score is the optimal tracking value scaled by one extra discount
    // factor: the value sums gamma^t * r_t from t=0 while the score weights
    // the t-th distance by gamma^t with t starting at 1.
    let v0 = solution.value(&fmdp.start_of(1, 0).unwrap()).unwrap();
    assert!((score - 0.9 * v0).abs() < 1e-9);
}

#[test]
fn feasible_demo_scores_exactly_zero() {
    let env = GridEnv::new(MoveSet::I4);
    let demo = traj(0, 0, &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [2.0, 1.0]]);
    let fmdp = build_trajectory_fmdp(std::slice::from_ref(&demo), env, Metric::L2, 0.9).unwrap();
    let solution = value_iteration(&fmdp, 1e-12, 100_000).unwrap();
    let score = score_trajectory(&solution.policy, &fmdp, &demo).unwrap();
    assert_eq!(score, 0.0);
}

#[test]
fn length_two_feasible_trajectory_scores_zero() {
    let env = GridEnv::new(MoveSet::I4);
    let demo = traj(0, 0, &[[0.0, 0.0], [0.0, 1.0]]);
    let fmdp = build_trajectory_fmdp(std::slice::from_ref(&demo), env, Metric::L2, 0.9).unwrap();
    let solution = value_iteration(&fmdp, 1e-12, 100_000).unwrap();
    assert_eq!(
        score_trajectory(&solution.policy, &fmdp, &demo).unwrap(),
        0.0
    );
}

#[test]
fn scoring_an_untracked_trajectory_fails() {
    let env = GridEnv::new(MoveSet::I4);
    let fmdp = build_trajectory_fmdp(&[diag_demo()], env, Metric::L2, 0.9).unwrap();
    let solution = value_iteration(&fmdp, 1e-12, 100_000).unwrap();
    let other = traj(1, 7, &[[0.0, 0.0], [1.0, 0.0]]);
    assert!(matches!(
        score_trajectory(&solution.policy, &fmdp, &other),
        Err(Error::UnknownTrajectory { .. })
    ));
}

#[test]
fn weight_transform_closed_forms() {
    // sigma = 1, C = 0: w = exp(raw).
    let records = feasibility(
        &[raw(0, 0, 0.0), raw(1, 1, diag_expected())],
        &ScoreConfig {
            sigma: Some(1.0),
            c: Some(0.0),
            ..ScoreConfig::default()
        },
    )
    .unwrap();
    assert_eq!(records[0].weight, 1.0);
    assert!((records[1].weight - diag_expected().exp()).abs() < 1e-9);
    assert!((records[1].weight - 0.00396).abs() < 5e-5);

    // sigma = 2 softens the same raw score.
    let records = feasibility(
        &[raw(0, 0, 0.0), raw(1, 1, diag_expected())],
        &ScoreConfig {
            sigma: Some(2.0),
            c: Some(0.0),
            ..ScoreConfig::default()
        },
    )
    .unwrap();
    assert!((records[1].weight - (diag_expected() / 2.0).exp()).abs() < 1e-9);
    assert!((records[1].weight - 0.0629).abs() < 5e-4);
}

#[test]
fn equal_raw_scores_all_get_weight_one() {
    let records = feasibility(
        &[raw(0, 0, -3.25), raw(0, 1, -3.25), raw(1, 2, -3.25)],
        &ScoreConfig::default(),
    )
    .unwrap();
    for r in &records {
        assert_eq!(r.weight, 1.0);
    }
}

#[test]
fn auto_sigma_pins_the_worst_weight_at_one_percent() {
    let records = feasibility(
        &[raw(0, 0, 0.0), raw(0, 1, -2.0), raw(1, 2, -8.0)],
        &ScoreConfig::default(),
    )
    .unwrap();
    assert_eq!(records[0].weight, 1.0);
    assert!((records[2].weight - 0.01).abs() < 1e-12);
    assert!(records[1].weight > records[2].weight);
}

#[test]
fn weight_is_monotone_in_raw_reward_and_sigma() {
    let config = ScoreConfig {
        sigma: Some(1.0),
        c: Some(0.0),
        ..ScoreConfig::default()
    };
    let records = feasibility(&[raw(0, 0, -1.0), raw(0, 1, -2.0)], &config).unwrap();
    assert!(records[0].weight > records[1].weight);

    let softer = feasibility(
        &[raw(0, 0, -1.0), raw(0, 1, -2.0)],
        &ScoreConfig {
            sigma: Some(3.0),
            c: Some(0.0),
            ..ScoreConfig::default()
        },
    )
    .unwrap();
    assert!(softer[1].weight > records[1].weight);
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(matches!(
        feasibility(&[], &ScoreConfig::default()),
        Err(Error::EmptyInput(_))
    ));
    assert!(feasibility(&[raw(0, 0, 0.5)], &ScoreConfig::default()).is_err());
    assert!(feasibility(
        &[raw(0, 0, -1.0)],
        &ScoreConfig {
            sigma: Some(0.0),
            ..ScoreConfig::default()
        },
    )
    .is_err());
    // Explicit C below the maximal raw reward would push weights above 1.
    assert!(feasibility(
        &[raw(0, 0, -1.0)],
        &ScoreConfig {
            c: Some(-2.0),
            ..ScoreConfig::default()
        },
    )
    .is_err());
}

#[test]
fn sampling_distribution_hand_normalization() {
    let demos = vec![
        traj(0, 0, &[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]),
        traj(1, 1, &[[0.0, 0.0], [0.0, 1.0], [0.0, 2.0]]),
    ];
    let records = vec![
        FeasibilityRecord {
            demonstrator_id: 0,
            trajectory_id: 0,
            raw_reward: 0.0,
            shifted_reward: 0.0,
            weight: 1.0,
        },
        FeasibilityRecord {
            demonstrator_id: 1,
            trajectory_id: 1,
            raw_reward: -0.7,
            shifted_reward: -0.7,
            weight: 0.5,
        },
    ];
    let weighted = transition_sampling_distribution(&demos, &records).unwrap();
    let probs: Vec<f64> = weighted.entries.iter().map(|e| e.probability).collect();
    assert_eq!(probs.len(), 4);
    for (p, expected) in probs
        .iter()
        .zip([1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0])
    {
        assert!((p - expected).abs() < 1e-12);
    }
    let total: f64 = probs.iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn single_trajectory_distribution_is_uniform() {
    let demos = vec![traj(
        0,
        0,
        &[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]],
    )];
    let records = feasibility(&[raw(0, 0, -1.0)], &ScoreConfig::default()).unwrap();
    let weighted = transition_sampling_distribution(&demos, &records).unwrap();
    for e in &weighted.entries {
        assert!((e.probability - 1.0 / 3.0).abs() < 1e-12);
    }
}

#[test]
fn underflowed_weights_are_degenerate() {
    let demos = vec![traj(0, 0, &[[0.0, 0.0], [1.0, 0.0]])];
    // exp(-2000) underflows to zero.
    let records = feasibility(
        &[raw(0, 0, -2000.0)],
        &ScoreConfig {
            sigma: Some(1.0),
            c: Some(0.0),
            ..ScoreConfig::default()
        },
    )
    .unwrap();
    assert_eq!(records[0].weight, 0.0);
    assert!(matches!(
        transition_sampling_distribution(&demos, &records),
        Err(Error::DegenerateDistribution)
    ));
}

#[test]
fn demonstrator_distribution_normalizes_means() {
    let records = vec![
        FeasibilityRecord {
            demonstrator_id: 0,
            trajectory_id: 0,
            raw_reward: 0.0,
            shifted_reward: 0.0,
            weight: 1.0,
        },
        FeasibilityRecord {
            demonstrator_id: 0,
            trajectory_id: 1,
            raw_reward: 0.0,
            shifted_reward: 0.0,
            weight: 0.5,
        },
        FeasibilityRecord {
            demonstrator_id: 1,
            trajectory_id: 2,
            raw_reward: 0.0,
            shifted_reward: 0.0,
            weight: 0.25,
        },
    ];
    let profiles = demonstrator_distribution(&records).unwrap();
    assert_eq!(profiles.len(), 2);
    assert!((profiles[0].mean_feasibility - 0.75).abs() < 1e-12);
    assert!((profiles[0].p_j - 0.75).abs() < 1e-12);
    assert!((profiles[1].p_j - 0.25).abs() < 1e-12);
    let total: f64 = profiles.iter().map(|p| p.p_j).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn budget_sampling_counts() {
    let profiles = vec![
        DemonstratorProfile {
            demonstrator_id: 0,
            n_demos: 1,
            mean_feasibility: 1.0,
            p_j: 1.0,
        },
        DemonstratorProfile {
            demonstrator_id: 1,
            n_demos: 1,
            mean_feasibility: 0.0,
            p_j: 0.0,
        },
    ];
    // Degenerate distribution: everything lands on the first demonstrator.
    let counts = budget_sample(&profiles, 10, 0).unwrap();
    assert_eq!(counts, vec![(0, 10), (1, 0)]);
    // Zero budget: all counts zero.
    let counts = budget_sample(&profiles, 0, 0).unwrap();
    assert_eq!(counts, vec![(0, 0), (1, 0)]);
}

#[test]
fn budget_sampling_matches_binomial_statistics() {
    let profiles = vec![
        DemonstratorProfile {
            demonstrator_id: 0,
            n_demos: 1,
            mean_feasibility: 0.75,
            p_j: 0.75,
        },
        DemonstratorProfile {
            demonstrator_id: 1,
            n_demos: 1,
            mean_feasibility: 0.25,
            p_j: 0.25,
        },
    ];
    let counts = budget_sample(&profiles, 10_000, 42).unwrap();
    let sigma = (10_000.0f64 * 0.75 * 0.25).sqrt();
    assert_eq!(counts[0].1 + counts[1].1, 10_000);
    assert!((counts[0].1 as f64 - 7500.0).abs() < 3.0 * sigma);
    assert!((counts[1].1 as f64 - 2500.0).abs() < 3.0 * sigma);
}

#[test]
fn gamma_f_scales_a_final_step_divergence_by_its_closed_form() {
    // Demo feasible everywhere except the last step, which hops two cells.
    // The optimal tracker matches until the end and eats a distance of 1 at
    // the final index (pre-deviating earlier only adds cost), so the raw
    // score is -gamma_f^H * 1 exactly.
    let env = GridEnv::new(MoveSet::I4);
    let demo = traj(0, 0, &[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [4.0, 0.0]]);
    let h = demo.steps();
    let mut scores = Vec::new();
    for gamma_f in [0.5, 0.9, 0.99] {
        let fmdp = build_trajectory_fmdp(
            std::slice::from_ref(&demo),
            env.clone(),
            Metric::L2,
            gamma_f,
        )
        .unwrap();
        let solution = value_iteration(&fmdp, 1e-12, 100_000).unwrap();
        let score = score_trajectory(&solution.policy, &fmdp, &demo).unwrap();
        assert!(
            (score - (-gamma_f.powi(h as i32))).abs() < 1e-12,
            "gamma_f={gamma_f}: score={score}"
        );
        scores.push(score);
    }
    assert!((scores[1] / scores[0] - (0.9f64 / 0.5).powi(h as i32)).abs() < 1e-12);
}

#[test]
fn stochastic_estimator_on_deterministic_env_matches_exact_score() {
    let env = GridEnv::new(MoveSet::I4);
    let noisy = ActionNoise::new(env, 0.0).unwrap();
    let fmdp = build_trajectory_fmdp(&[diag_demo()], noisy, Metric::L2, 0.9).unwrap();
    let solution = value_iteration(&fmdp, 1e-12, 100_000).unwrap();
    let exact = score_trajectory(&solution.policy, &fmdp, &diag_demo()).unwrap();
    for m in [1, 7, 50] {
        let record = feasibility_stochastic(
            &solution.policy,
            &fmdp,
            &diag_demo(),
            &ScoreConfig {
                mc_rollouts: m,
                sigma: Some(1.0),
                c: Some(0.0),
                ..ScoreConfig::default()
            },
            13,
        )
        .unwrap();
        assert!((record.raw_reward - exact).abs() < 1e-12);
    }
}

#[test]
fn stochastic_estimator_standard_error_shrinks_with_m() {
    let env = GridEnv::new(MoveSet::I4);
    let noisy = ActionNoise::new(env, 0.1).unwrap();
    let fmdp = build_trajectory_fmdp(&[diag_demo()], noisy, Metric::L2, 0.9).unwrap();
    let solution = value_iteration(&fmdp, 1e-12, 100_000).unwrap();

    let se = |m: usize, seed_base: u64| -> f64 {
        let estimates: Vec<f64> = (0..20)
            .map(|rep| {
                feasibility_stochastic(
                    &solution.policy,
                    &fmdp,
                    &diag_demo(),
                    &ScoreConfig {
                        mc_rollouts: m,
                        sigma: Some(1.0),
                        c: Some(0.0),
                        ..ScoreConfig::default()
                    },
                    seed_base + rep,
                )
                .unwrap()
                .raw_reward
            })
            .collect();
        let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
        (estimates
            .iter()
            .map(|e| (e - mean) * (e - mean))
            .sum::<f64>()
            / (estimates.len() - 1) as f64)
            .sqrt()
    };

    let ratio = se(10, 6000) / se(1000, 6500);
    // M grows 100x, so the standard error should shrink about 10x.
    assert!(
        (7.0..=13.0).contains(&ratio),
        "standard error ratio {ratio} outside [7, 13]"
    );
}

#[test]
fn stochastic_m_zero_is_a_config_error() {
    let env = GridEnv::new(MoveSet::I4);
    let noisy = ActionNoise::new(env, 0.1).unwrap();
    let fmdp = build_trajectory_fmdp(&[diag_demo()], noisy, Metric::L2, 0.9).unwrap();
    let solution = value_iteration(&fmdp, 1e-12, 100_000).unwrap();
    let err = feasibility_stochastic(
        &solution.policy,
        &fmdp,
        &diag_demo(),
        &ScoreConfig {
            mc_rollouts: 0,
            ..ScoreConfig::default()
        },
        0,
    );
    assert!(err.is_err());
}

#[test]
fn csv_exports_are_written_sorted() {
    let dir = tempfile::tempdir().unwrap();
    let demos = vec![
        traj(0, 1, &[[0.0, 0.0], [1.0, 0.0]]),
        traj(1, 0, &[[0.0, 0.0], [0.0, 1.0]]),
    ];
    let records = feasibility(&[raw(0, 1, 0.0), raw(1, 0, -2.0)], &ScoreConfig::default()).unwrap();
    let weighted = transition_sampling_distribution(&demos, &records).unwrap();
    let scores_path = dir.path().join("scores.csv");
    write_scores_csv(&scores_path, &records, &weighted).unwrap();
    let text = std::fs::read_to_string(&scores_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "trajectory_id,demonstrator_id,raw_reward,w,p_w");
    assert!(lines[1].starts_with("0,1,"));
    assert!(lines[2].starts_with("1,0,"));

    let profiles = demonstrator_distribution(&records).unwrap();
    let profiles_path = dir.path().join("profiles.csv");
    write_profiles_csv(&profiles_path, &profiles).unwrap();
    let text = std::fs::read_to_string(&profiles_path).unwrap();
    assert!(text.starts_with("demonstrator_id,mean_feasibility,p_j\n0,"));
}
