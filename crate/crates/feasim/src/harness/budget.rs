//! Budgeted demonstration acquisition.
//!
//! Starting from a small corpus, each round scores the corpus, turns mean
//! per-demonstrator feasibility into the acquisition distribution, draws the
//! round's budget from it, generates that many new demonstrations, retrains,
//! and evaluates. A uniform-acquisition ablation runs the same loop with an
//! equal-probability draw.

use crate::envs::{generate_demos, make_env, scripted_expert, EnvKind, ScriptedExpert};
use crate::error::{Error, Result};
use crate::feasibility::{budget_sample, demonstrator_distribution, DemonstratorProfile};
use crate::harness::config::ExperimentConfig;
use crate::harness::{method_records, run_on_corpus, ScoreCache};
use crate::mdp::Trajectory;
use crate::rng::fnv1a;

/// State of one acquisition round.
#[derive(Debug, Clone)]
pub struct BudgetRound {
    pub round: usize,
    /// Demos drawn this round, per demonstrator (round 0 reports the initial
    /// allocation).
    pub acquired: Vec<(u64, usize)>,
    /// Corpus size after acquisition, per demonstrator.
    pub corpus_sizes: Vec<(u64, usize)>,
    pub mean_return: f64,
    pub std_return: f64,
}

#[derive(Debug, Clone)]
pub struct BudgetReport {
    pub feasibility_guided: Vec<BudgetRound>,
    pub uniform_acquisition: Vec<BudgetRound>,
}

struct Demonstrator {
    id: u64,
    env: EnvKind,
    expert: ScriptedExpert,
}

/// Runs the acquisition experiment: `initial_per_demonstrator` demos per
/// demonstrator up front, then one round per entry of `budget_steps`.
/// `budget_steps = []` reports only the initial evaluation.
pub fn run_budget_experiment(
    config: &ExperimentConfig,
    initial_per_demonstrator: usize,
    budget_steps: &[usize],
) -> Result<BudgetReport> {
    config.validate()?;
    if initial_per_demonstrator == 0 {
        return Err(Error::Config(
            "initial_per_demonstrator must be >= 1".into(),
        ));
    }
    let imitator_env = make_env(config.imitator.family, &config.imitator.params)?;
    let mut demonstrators = Vec::new();
    for (j, spec) in config.demonstrators.iter().enumerate() {
        let env = make_env(spec.family, &spec.params)?;
        let mut expert = scripted_expert(&env)?;
        if spec.randomized {
            expert = expert.randomized();
        }
        demonstrators.push(Demonstrator {
            id: j as u64,
            env,
            expert,
        });
    }

    let feasibility_guided = run_strategy(
        config,
        &imitator_env,
        &demonstrators,
        initial_per_demonstrator,
        budget_steps,
        false,
    )?;
    let uniform_acquisition = run_strategy(
        config,
        &imitator_env,
        &demonstrators,
        initial_per_demonstrator,
        budget_steps,
        true,
    )?;
    Ok(BudgetReport {
        feasibility_guided,
        uniform_acquisition,
    })
}

fn run_strategy(
    config: &ExperimentConfig,
    imitator_env: &EnvKind,
    demonstrators: &[Demonstrator],
    initial: usize,
    budget_steps: &[usize],
    uniform: bool,
) -> Result<Vec<BudgetRound>> {
    let tag = if uniform { "uniform" } else { "feasibility" };
    let mut cache = ScoreCache::new();
    let mut corpus: Vec<Trajectory> = Vec::new();
    let mut next_id = 0u64;
    let mut generated: Vec<u64> = demonstrators.iter().map(|_| 0).collect();

    for d in demonstrators {
        acquire(
            d,
            initial,
            config.corpus_seed,
            &mut generated,
            &mut next_id,
            &mut corpus,
        )?;
    }

    let mut rounds = Vec::with_capacity(budget_steps.len() + 1);
    let report = run_on_corpus(imitator_env, &corpus, config, &mut cache)?;
    rounds.push(BudgetRound {
        round: 0,
        acquired: demonstrators.iter().map(|d| (d.id, initial)).collect(),
        corpus_sizes: sizes(demonstrators, &corpus),
        mean_return: report.mean_return,
        std_return: report.std_return,
    });

    for (round, &budget) in budget_steps.iter().enumerate() {
        let records = method_records(imitator_env, &corpus, config, &mut cache)?;
        let profiles = demonstrator_distribution(&records)?;
        let draw_profiles = if uniform {
            equal_profiles(&profiles)
        } else {
            profiles
        };
        let draw_seed =
            fnv1a(format!("acquire:{}:{}:{}", tag, config.corpus_seed, round).into_bytes());
        let counts = budget_sample(&draw_profiles, budget, draw_seed)?;
        for (id, count) in &counts {
            if *count == 0 {
                continue;
            }
            let d = &demonstrators[*id as usize];
            acquire(
                d,
                *count,
                config.corpus_seed,
                &mut generated,
                &mut next_id,
                &mut corpus,
            )?;
        }
        let report = run_on_corpus(imitator_env, &corpus, config, &mut cache)?;
        rounds.push(BudgetRound {
            round: round + 1,
            acquired: counts,
            corpus_sizes: sizes(demonstrators, &corpus),
            mean_return: report.mean_return,
            std_return: report.std_return,
        });
    }
    Ok(rounds)
}

fn acquire(
    d: &Demonstrator,
    count: usize,
    corpus_seed: u64,
    generated: &mut [u64],
    next_id: &mut u64,
    corpus: &mut Vec<Trajectory>,
) -> Result<()> {
    // Each demonstrator draws from its own stream, offset by how many demos
    // it has produced so far: later rounds never replay earlier demos, and
    // the two acquisition strategies see identical demo content for equal
    // counts (a paired comparison).
    let seed = fnv1a(
        format!(
            "budget_gen:{}:{}:{}",
            corpus_seed, d.id, generated[d.id as usize]
        )
        .into_bytes(),
    );
    let demos = generate_demos(&d.env, &d.expert, count, seed)?;
    generated[d.id as usize] += count as u64;
    for mut demo in demos {
        demo.demonstrator_id = d.id;
        demo.trajectory_id = *next_id;
        *next_id += 1;
        corpus.push(demo);
    }
    Ok(())
}

fn sizes(demonstrators: &[Demonstrator], corpus: &[Trajectory]) -> Vec<(u64, usize)> {
    demonstrators
        .iter()
        .map(|d| {
            (
                d.id,
                corpus.iter().filter(|t| t.demonstrator_id == d.id).count(),
            )
        })
        .collect()
}

fn equal_profiles(profiles: &[DemonstratorProfile]) -> Vec<DemonstratorProfile> {
    let p = 1.0 / profiles.len() as f64;
    profiles
        .iter()
        .map(|profile| DemonstratorProfile {
            p_j: p,
            ..profile.clone()
        })
        .collect()
}
