//! Browser demo: feasibility-weighted imitation on the grid scenario.
//!
//! Three interactive operations, each taking plain parameters and returning
//! a JSON string the page renders onto a canvas:
//!
//! - [`score_demos_json`] — scores demonstrations from a chosen demonstrator
//!   move set against a chosen imitator move set and reports the solved
//!   tracking paths alongside the feasibility weights.
//! - [`compare_methods_json`] — runs feasibility-weighted, inverse-dynamics,
//!   and uniform behavioral cloning on a mixed corpus (related grid demos
//!   plus flying point-mass demos) and reports each learned policy's
//!   greedy path and evaluation return.
//! - [`budget_counts_json`] — runs budgeted demonstration acquisition and
//!   reports per-round acquisition counts for feasibility-guided versus
//!   uniform querying.
//!
//! The crate compiles natively for testing; the wasm-bindgen exports are the
//! same functions with a JS-friendly error type.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use feasim::envs::{
    generate_demos, scripted_expert, DynamicsParams, EnvKind, FamilyId, GridEnv, MoveSet,
};
use feasim::feasibility::{
    demonstrator_distribution, feasibility, score_trajectory, transition_sampling_distribution,
    RawScore, ScoreConfig,
};
use feasim::fmdp::build_trajectory_fmdp;
use feasim::harness::{
    run_budget_experiment, run_methods, DemonstratorSpec, EnvSpec, ExperimentConfig,
    ImitationMethod,
};
use feasim::mdp::{rollout, Environment, Metric, StateVec};
use feasim::solver::value_iteration;
use feasim::Result;

const EVAL_SEED: u64 = 0;

fn points(states: &[StateVec]) -> Vec<[f64; 2]> {
    states
        .iter()
        .map(|s| [s.values()[0], s.values()[1]])
        .collect()
}

#[derive(Serialize)]
struct ScoredDemo {
    trajectory_id: u64,
    demo: Vec<[f64; 2]>,
    /// Path the solved tracking policy takes while following this demo.
    tracker: Vec<[f64; 2]>,
    raw_reward: f64,
    weight: f64,
    p_w: f64,
}

#[derive(Serialize)]
struct ScoreDemosOut {
    grid: usize,
    imitator: String,
    demonstrator: String,
    gamma_f: f64,
    sigma: f64,
    demos: Vec<ScoredDemo>,
}

/// Scores `n` demonstrations from one grid move set against an imitator
/// with another. `sigma <= 0` selects the auto rule.
pub fn score_demos(
    imitator_moveset: &str,
    demonstrator_moveset: &str,
    n: usize,
    gamma_f: f64,
    sigma: f64,
    seed: u64,
) -> Result<String> {
    let imitator = GridEnv::new(MoveSet::parse(imitator_moveset)?);
    let demonstrator = GridEnv::new(MoveSet::parse(demonstrator_moveset)?);
    let expert = scripted_expert(&demonstrator)?.randomized();
    let mut demos = generate_demos(&demonstrator, &expert, n.clamp(1, 50), seed)?;
    for (i, demo) in demos.iter_mut().enumerate() {
        demo.demonstrator_id = 0;
        demo.trajectory_id = i as u64;
    }

    let fmdp = build_trajectory_fmdp(&demos, imitator.clone(), Metric::L2, gamma_f)?;
    let solution = value_iteration(&fmdp, 1e-10, 500_000)?;
    let mut raws = Vec::new();
    let mut trackers = Vec::new();
    for demo in &demos {
        raws.push(RawScore {
            demonstrator_id: demo.demonstrator_id,
            trajectory_id: demo.trajectory_id,
            raw_reward: score_trajectory(&solution.policy, &fmdp, demo)?,
        });
        let start = fmdp.start_of(demo.demonstrator_id, demo.trajectory_id)?;
        let out = rollout(&fmdp, &solution.policy, &start, fmdp.horizon())?;
        let projected: Result<Vec<StateVec>> = out
            .trajectory
            .states
            .iter()
            .map(|aug| fmdp.project(aug))
            .collect();
        trackers.push(points(&projected?));
    }

    let config = ScoreConfig {
        gamma_f,
        sigma: (sigma > 0.0).then_some(sigma),
        ..ScoreConfig::default()
    };
    let records = feasibility(&raws, &config)?;
    let weighted = transition_sampling_distribution(&demos, &records)?;
    let resolved_sigma = if sigma > 0.0 {
        sigma
    } else {
        let min_raw = raws.iter().map(|r| r.raw_reward).fold(0.0, f64::min);
        let span = -min_raw;
        if span > 0.0 {
            span / 100.0f64.ln()
        } else {
            1.0
        }
    };

    let out = ScoreDemosOut {
        grid: 5,
        imitator: imitator.params_render(),
        demonstrator: demonstrator.params_render(),
        gamma_f,
        sigma: resolved_sigma,
        demos: demos
            .iter()
            .zip(&records)
            .zip(trackers)
            .map(|((demo, record), tracker)| ScoredDemo {
                trajectory_id: demo.trajectory_id,
                demo: points(&demo.states),
                tracker,
                raw_reward: record.raw_reward,
                weight: record.weight,
                p_w: weighted
                    .trajectory_probability(demo.trajectory_id)
                    .unwrap_or(0.0),
            })
            .collect(),
    };
    Ok(serde_json::to_string(&out)?)
}

#[derive(Serialize)]
struct MethodOut {
    method: String,
    mean_return: f64,
    /// Greedy path of the learned policy from the grid start.
    path: Vec<[f64; 2]>,
    reached_goal: bool,
}

#[derive(Serialize)]
struct CompareOut {
    grid: usize,
    n_related: usize,
    n_unrelated: usize,
    optimal_return: f64,
    methods: Vec<MethodOut>,
}

fn polluted_config(n_related: usize, n_unrelated: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        imitator: EnvSpec {
            family: FamilyId::Grid,
            params: DynamicsParams::new().with_id("moveset", "I4"),
        },
        demonstrators: vec![
            DemonstratorSpec {
                family: FamilyId::Grid,
                params: DynamicsParams::new().with_id("moveset", "I4"),
                count: n_related,
                randomized: true,
            },
            DemonstratorSpec {
                family: FamilyId::PointMass,
                params: DynamicsParams::new().with_num("fly", 1.0),
                count: n_unrelated,
                randomized: false,
            },
        ],
        seeds: vec![seed],
        corpus_seed: seed,
        fit_batch: 128,
        fit_iters: 20,
        ..ExperimentConfig::default()
    }
}

/// Trains all three methods on a corpus of related grid demos polluted with
/// flying point-mass demos, and reports each learned policy's behavior.
pub fn compare_methods(n_related: usize, n_unrelated: usize, seed: u64) -> Result<String> {
    let n_related = n_related.clamp(1, 30);
    let n_unrelated = n_unrelated.min(150);
    let config = polluted_config(n_related, n_unrelated, seed);
    let grid = GridEnv::new(MoveSet::I4);
    let optimal = value_iteration(&grid, 1e-12, 10_000)?
        .value(&StateVec::from([0.0, 0.0]))
        .unwrap_or(0.0);

    let reports = run_methods(
        &config,
        &[
            ImitationMethod::Ours,
            ImitationMethod::IdFeas,
            ImitationMethod::Uniform,
        ],
    )?;

    // Re-fit each method's policy to trace its greedy path for drawing.
    let imitator = EnvKind::Grid(grid.clone());
    let corpus = feasim::harness::build_corpus(&config)?;
    let mut cache = feasim::harness::ScoreCache::new();
    let mut methods = Vec::new();
    for report in &reports {
        let mut method_config = config.clone();
        method_config.method = report.method;
        let records =
            feasim::harness::method_records(&imitator, &corpus, &method_config, &mut cache)?;
        let weighted = match report.method {
            ImitationMethod::Uniform => feasim::imitate::uniform_weights(&corpus)?,
            _ => transition_sampling_distribution(&corpus, &records)?,
        };
        let policy = feasim::imitate::fit_weighted_bc(
            &weighted,
            &imitator,
            Metric::L2,
            config.fit_batch,
            config.fit_iters,
            seed,
        )?;
        let out = rollout(&grid, &policy, &StateVec::from([0.0, 0.0]), grid.horizon())?;
        methods.push(MethodOut {
            method: report.method.to_string(),
            mean_return: report.mean_return,
            reached_goal: grid.is_terminal(out.trajectory.last()),
            path: points(&out.trajectory.states),
        });
    }

    Ok(serde_json::to_string(&CompareOut {
        grid: 5,
        n_related,
        n_unrelated,
        optimal_return: optimal,
        methods,
    })?)
}

#[derive(Serialize)]
struct BudgetRoundOut {
    round: usize,
    acquired: Vec<(u64, usize)>,
    corpus_sizes: Vec<(u64, usize)>,
    mean_return: f64,
}

#[derive(Serialize)]
struct BudgetOut {
    p_j: Vec<(u64, f64)>,
    feasibility: Vec<BudgetRoundOut>,
    uniform: Vec<BudgetRoundOut>,
}

/// Budgeted acquisition between a related (cardinal grid) and an unrelated
/// (jump grid) demonstrator: `rounds` rounds of `budget` queries each.
pub fn budget_counts(budget: usize, rounds: usize, seed: u64) -> Result<String> {
    let config = ExperimentConfig {
        imitator: EnvSpec {
            family: FamilyId::Grid,
            params: DynamicsParams::new().with_id("moveset", "I4"),
        },
        demonstrators: vec![
            DemonstratorSpec {
                family: FamilyId::Grid,
                params: DynamicsParams::new().with_id("moveset", "I4"),
                count: 1,
                randomized: true,
            },
            DemonstratorSpec {
                family: FamilyId::Grid,
                params: DynamicsParams::new().with_id("moveset", "D8"),
                count: 1,
                randomized: false,
            },
        ],
        score: ScoreConfig {
            sigma: Some(1.0),
            ..ScoreConfig::default()
        },
        seeds: vec![EVAL_SEED],
        corpus_seed: seed,
        fit_batch: 128,
        fit_iters: 20,
        ..ExperimentConfig::default()
    };
    let steps = vec![budget.clamp(1, 100); rounds.clamp(1, 10)];
    let report = run_budget_experiment(&config, 1, &steps)?;

    // Current acquisition distribution over the final corpus.
    let imitator = feasim::envs::make_env(config.imitator.family, &config.imitator.params)?;
    let corpus = feasim::harness::build_corpus(&ExperimentConfig {
        demonstrators: config
            .demonstrators
            .iter()
            .map(|d| DemonstratorSpec {
                count: 1,
                ..d.clone()
            })
            .collect(),
        ..config.clone()
    })?;
    let mut cache = feasim::harness::ScoreCache::new();
    let raws = feasim::harness::score_corpus(&imitator, &corpus, &config, &mut cache)?;
    let records = feasibility(&raws, &config.score)?;
    let profiles = demonstrator_distribution(&records)?;

    let convert = |rounds: &[feasim::harness::BudgetRound]| -> Vec<BudgetRoundOut> {
        rounds
            .iter()
            .map(|r| BudgetRoundOut {
                round: r.round,
                acquired: r.acquired.clone(),
                corpus_sizes: r.corpus_sizes.clone(),
                mean_return: r.mean_return,
            })
            .collect()
    };

    Ok(serde_json::to_string(&BudgetOut {
        p_j: profiles
            .iter()
            .map(|p| (p.demonstrator_id, p.p_j))
            .collect(),
        feasibility: convert(&report.feasibility_guided),
        uniform: convert(&report.uniform_acquisition),
    })?)
}

fn to_js<T>(result: Result<T>) -> std::result::Result<T, JsValue> {
    result.map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen]
pub fn score_demos_json(
    imitator_moveset: &str,
    demonstrator_moveset: &str,
    n: usize,
    gamma_f: f64,
    sigma: f64,
    seed: u64,
) -> std::result::Result<String, JsValue> {
    to_js(score_demos(
        imitator_moveset,
        demonstrator_moveset,
        n,
        gamma_f,
        sigma,
        seed,
    ))
}

#[wasm_bindgen]
pub fn compare_methods_json(
    n_related: usize,
    n_unrelated: usize,
    seed: u64,
) -> std::result::Result<String, JsValue> {
    to_js(compare_methods(n_related, n_unrelated, seed))
}

#[wasm_bindgen]
pub fn budget_counts_json(
    budget: usize,
    rounds: usize,
    seed: u64,
) -> std::result::Result<String, JsValue> {
    to_js(budget_counts(budget, rounds, seed))
}
