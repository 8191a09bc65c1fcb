//! End-to-end experiment pipeline.
//!
//! A run builds a demonstration corpus from configured demonstrators, scores
//! every trajectory against the imitator's dynamics, reweights transitions
//! per the configured method, fits an imitation policy per seed, and
//! evaluates it. All randomness flows through per-stage derived streams, so a
//! configuration reproduces its outputs byte for byte.

mod budget;
mod config;
mod report;

pub use budget::{run_budget_experiment, BudgetReport, BudgetRound};
pub use config::{DemonstratorSpec, EnvSpec, ExperimentConfig, ImitationMethod, SolverKind};
pub use report::{emit_budget_csv, emit_csv, RunReport, ScoreRow, SeedOutcome};

use std::collections::HashMap;

use crate::envs::{generate_demos, make_env, scripted_expert, EnvKind};
use crate::error::{Error, Result};
use crate::feasibility::{
    demonstrator_distribution, feasibility, score_trajectory, transition_sampling_distribution,
    FeasibilityRecord, RawScore, WeightedTransitionSet,
};
use crate::fmdp::build_trajectory_fmdp;
use crate::imitate::{fit_weighted_bc, id_feas_raw_scores, uniform_weights};
use crate::mdp::{expected_return, Environment, Metric, Trajectory};
use crate::rng::fnv1a;
use crate::solver::{q_learning, value_iteration, SolverConfig, TabularPolicy};

/// Cache of solved-and-scored demonstrator groups, keyed by corpus content
/// and scoring configuration. Lets several imitation methods (and repeated
/// runs) reuse one solve.
#[derive(Debug, Default)]
pub struct ScoreCache {
    entries: HashMap<u64, Vec<RawScore>>,
    pub hits: usize,
    pub misses: usize,
}

impl ScoreCache {
    pub fn new() -> Self {
        Self::default()
    }
}

fn corpus_key(
    demos: &[Trajectory],
    env_label: &str,
    metric: Metric,
    score_key: &str,
    solver_key: &str,
) -> u64 {
    let mut bytes: Vec<u8> = Vec::new();
    for demo in demos {
        bytes.extend(demo.demonstrator_id.to_le_bytes());
        bytes.extend(demo.trajectory_id.to_le_bytes());
        for s in &demo.states {
            for v in s.values() {
                bytes.extend(v.to_bits().to_le_bytes());
            }
        }
    }
    bytes.extend(env_label.as_bytes());
    bytes.extend(metric.to_string().as_bytes());
    bytes.extend(score_key.as_bytes());
    bytes.extend(solver_key.as_bytes());
    fnv1a(bytes)
}

/// Builds the demonstration corpus described by the configuration.
///
/// Demonstrator `j` gets demonstrator id `j`; trajectory ids are globally
/// unique across the corpus. Deterministic given the corpus seed.
pub fn build_corpus(config: &ExperimentConfig) -> Result<Vec<Trajectory>> {
    config.validate()?;
    let mut corpus = Vec::new();
    let mut next_id = 0u64;
    for (j, spec) in config.demonstrators.iter().enumerate() {
        if spec.count == 0 {
            continue;
        }
        let env = make_env(spec.family, &spec.params)?;
        let mut expert = scripted_expert(&env)?;
        if spec.randomized {
            expert = expert.randomized();
        }
        let seed = crate::rng::fnv1a(format!("corpus:{}:{}", config.corpus_seed, j).into_bytes());
        let demos = generate_demos(&env, &expert, spec.count, seed)?;
        for mut demo in demos {
            demo.demonstrator_id = j as u64;
            demo.trajectory_id = next_id;
            next_id += 1;
            corpus.push(demo);
        }
    }
    if corpus.is_empty() {
        return Err(Error::EmptyInput("configured corpus"));
    }
    Ok(corpus)
}

/// Solves one tracking MDP per demonstrator and scores every trajectory.
/// Value iteration is used when the reachable space fits the cap, Q-learning
/// otherwise (or as forced by the solver kind).
pub fn score_corpus(
    imitator_env: &EnvKind,
    corpus: &[Trajectory],
    config: &ExperimentConfig,
    cache: &mut ScoreCache,
) -> Result<Vec<RawScore>> {
    let mut groups: std::collections::BTreeMap<u64, Vec<Trajectory>> =
        std::collections::BTreeMap::new();
    for demo in corpus {
        groups
            .entry(demo.demonstrator_id)
            .or_default()
            .push(demo.clone());
    }

    let mut all = Vec::with_capacity(corpus.len());
    for (_, group) in groups {
        let key = corpus_key(
            &group,
            &imitator_env.label(),
            config.metric,
            &config.score.render(),
            &format!("{:?}:{}", config.solver_kind, config.solver.render()),
        );
        if let Some(scores) = cache.entries.get(&key) {
            cache.hits += 1;
            all.extend(scores.iter().cloned());
            continue;
        }
        cache.misses += 1;
        let fmdp = build_trajectory_fmdp(
            &group,
            imitator_env.clone(),
            config.metric,
            config.score.gamma_f,
        )?;
        let policy = solve(&fmdp, &config.solver, config.solver_kind)?;
        let mut scores = Vec::with_capacity(group.len());
        for demo in &group {
            scores.push(RawScore {
                demonstrator_id: demo.demonstrator_id,
                trajectory_id: demo.trajectory_id,
                raw_reward: score_trajectory(&policy, &fmdp, demo)?,
            });
        }
        cache.entries.insert(key, scores.clone());
        all.extend(scores);
    }
    all.sort_by_key(|s| s.trajectory_id);
    Ok(all)
}

fn solve<E: Environment>(
    fmdp: &E,
    solver: &SolverConfig,
    kind: SolverKind,
) -> Result<TabularPolicy> {
    match kind {
        SolverKind::Vi => Ok(value_iteration(fmdp, solver.vi_tolerance, solver.state_cap)?.policy),
        SolverKind::Q => q_learning(fmdp, solver),
        SolverKind::Auto => match value_iteration(fmdp, solver.vi_tolerance, solver.state_cap) {
            Ok(solution) => Ok(solution.policy),
            Err(Error::TooLarge { .. }) => q_learning(fmdp, solver),
            Err(e) => Err(e),
        },
    }
}

/// Feasibility records for a corpus under the configured imitation method:
/// solved tracking scores for `ours`, greedy-chained scores for `idfeas`,
/// and unit weights for `uniform`.
pub fn method_records(
    imitator_env: &EnvKind,
    corpus: &[Trajectory],
    config: &ExperimentConfig,
    cache: &mut ScoreCache,
) -> Result<Vec<FeasibilityRecord>> {
    match config.method {
        ImitationMethod::Ours => {
            let raws = score_corpus(imitator_env, corpus, config, cache)?;
            feasibility(&raws, &config.score)
        }
        ImitationMethod::IdFeas => {
            let raws =
                id_feas_raw_scores(corpus, imitator_env, config.metric, config.score.gamma_f)?;
            feasibility(&raws, &config.score)
        }
        ImitationMethod::Uniform => Ok(corpus
            .iter()
            .map(|d| FeasibilityRecord {
                demonstrator_id: d.demonstrator_id,
                trajectory_id: d.trajectory_id,
                raw_reward: 0.0,
                shifted_reward: 0.0,
                weight: 1.0,
            })
            .collect()),
    }
}

fn weighted_for(
    records: &[FeasibilityRecord],
    corpus: &[Trajectory],
    config: &ExperimentConfig,
) -> Result<WeightedTransitionSet> {
    match config.method {
        ImitationMethod::Uniform => uniform_weights(corpus),
        _ => transition_sampling_distribution(corpus, records),
    }
}

/// Runs the full pipeline with a fresh score cache.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    run_experiment_with_cache(config, &mut ScoreCache::new())
}

/// Runs the full pipeline, reusing previously solved scores where possible.
pub fn run_experiment_with_cache(
    config: &ExperimentConfig,
    cache: &mut ScoreCache,
) -> Result<RunReport> {
    config.validate()?;
    let imitator_env = make_env(config.imitator.family, &config.imitator.params)?;
    let corpus = build_corpus(config)?;
    run_on_corpus(&imitator_env, &corpus, config, cache)
}

/// Pipeline stages downstream of corpus construction; exposed so callers can
/// run several methods or compositions on one corpus.
pub fn run_on_corpus(
    imitator_env: &EnvKind,
    corpus: &[Trajectory],
    config: &ExperimentConfig,
    cache: &mut ScoreCache,
) -> Result<RunReport> {
    let records = method_records(imitator_env, corpus, config, cache)?;
    let weighted = weighted_for(&records, corpus, config)?;
    let profiles = demonstrator_distribution(&records)?;

    let mut per_seed = Vec::with_capacity(config.seeds.len());
    for &seed in &config.seeds {
        let policy = fit_weighted_bc(
            &weighted,
            imitator_env,
            config.metric,
            config.fit_batch,
            config.fit_iters,
            seed,
        )?;
        let (mean, std) = expected_return(imitator_env, &policy, config.eval_rollouts, seed)?;
        per_seed.push(SeedOutcome {
            seed,
            mean_return: mean,
            std_return: std,
        });
    }

    let scores = records
        .iter()
        .map(|r| ScoreRow {
            trajectory_id: r.trajectory_id,
            demonstrator_id: r.demonstrator_id,
            raw_reward: r.raw_reward,
            weight: r.weight,
            p_w: weighted
                .trajectory_probability(r.trajectory_id)
                .unwrap_or(0.0),
        })
        .collect();

    Ok(RunReport::assemble(
        config.method,
        imitator_env.label(),
        per_seed,
        profiles,
        scores,
    ))
}

/// Runs several methods on one shared corpus and score cache.
pub fn run_methods(
    config: &ExperimentConfig,
    methods: &[ImitationMethod],
) -> Result<Vec<RunReport>> {
    config.validate()?;
    let imitator_env = make_env(config.imitator.family, &config.imitator.params)?;
    let corpus = build_corpus(config)?;
    let mut cache = ScoreCache::new();
    let mut reports = Vec::with_capacity(methods.len());
    for &method in methods {
        let mut method_config = config.clone();
        method_config.method = method;
        reports.push(run_on_corpus(
            &imitator_env,
            &corpus,
            &method_config,
            &mut cache,
        )?);
    }
    Ok(reports)
}
