//! Policy learning from weighted state transitions.
//!
//! With a finite action set and queryable deterministic dynamics, the inverse
//! step is exact: the action behind a transition is recovered by exhaustive
//! search over the action table. Weighted behavioral cloning samples
//! transitions from the feasibility-weighted distribution, recovers their
//! actions, and keeps the majority action per state, so transitions from
//! highly feasible trajectories dominate the vote.
//!
//! Two baselines share the interface: uniform weighting (every trajectory
//! weight 1) and an inverse-dynamics score that replays each demonstration by
//! chaining greedy one-step recoveries instead of solving the tracking MDP.
//! Greedy chaining is itself a tracking policy, so its score can never exceed
//! the solved optimum.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::feasibility::{
    feasibility, transition_sampling_distribution, FeasibilityRecord, RawScore, ScoreConfig,
    WeightedTransitionSet,
};
use crate::mdp::{
    distance, step, ActionId, Environment, Metric, Policy, StateKey, StateVec, Trajectory,
};
use crate::rng::seeded_rng;

/// Result of exhaustively inverting one transition.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredTransition {
    pub from: StateVec,
    pub target: StateVec,
    pub best_action: ActionId,
    pub achieved: StateVec,
    /// Distance between `achieved` and `target`; zero exactly when a single
    /// action reproduces the transition.
    pub residual: f64,
}

/// The action whose successor lands closest to `target`, ties broken by
/// lowest action index.
pub fn recover_action<E: Environment>(
    env: &E,
    s: &StateVec,
    target: &StateVec,
    metric: Metric,
) -> Result<RecoveredTransition> {
    let mut best: Option<RecoveredTransition> = None;
    for a in 0..env.num_actions() {
        let action = ActionId(a);
        let achieved = step(env, s, action)?;
        let residual = distance(metric, &achieved, target)?;
        let better = match &best {
            None => true,
            Some(b) => residual < b.residual,
        };
        if better {
            best = Some(RecoveredTransition {
                from: s.clone(),
                target: target.clone(),
                best_action: action,
                achieved,
                residual,
            });
        }
    }
    best.ok_or_else(|| Error::Config("environment has no actions".into()))
}

/// A total state-to-action policy learned by behavioral cloning.
///
/// Lookups hit the learned table when the state was voted on; otherwise the
/// policy falls back to the nearest stored state under its metric, ties
/// broken by lexicographic state order. The fallback makes the policy total,
/// which evaluation rollouts need.
#[derive(Debug, Clone)]
pub struct ImitatorPolicy {
    eps: f64,
    metric: Metric,
    entries: BTreeMap<StateKey, (StateVec, ActionId)>,
}

impl ImitatorPolicy {
    /// Wraps a saved tabular policy with the nearest-stored-state fallback,
    /// making it total for evaluation rollouts.
    pub fn from_tabular(policy: &crate::solver::TabularPolicy, metric: Metric) -> Self {
        let eps = policy.quantization_eps();
        let entries = policy
            .entries()
            .map(|(key, action)| (key.clone(), (key.to_state(eps), action)))
            .collect();
        ImitatorPolicy {
            eps,
            metric,
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup_exact(&self, s: &StateVec) -> Option<ActionId> {
        self.entries.get(&s.key(self.eps)).map(|(_, a)| *a)
    }

    /// Serializes in the tabular policy JSON format.
    pub fn to_json(&self) -> Result<String> {
        let mut policy = crate::solver::TabularPolicy::new(self.eps);
        for (state, action) in self.entries.values() {
            policy.insert(state, *action);
        }
        policy.to_json()
    }

    pub fn save<P: AsRef<std::path::Path>>(&self, path: P) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

impl Policy for ImitatorPolicy {
    fn action(&self, s: &StateVec) -> Result<ActionId> {
        if let Some(a) = self.lookup_exact(s) {
            return Ok(a);
        }
        let mut best: Option<(f64, &StateVec, ActionId)> = None;
        for (stored, action) in self.entries.values() {
            let d = distance(self.metric, s, stored)?;
            let better = match &best {
                None => true,
                Some((bd, bs, _)) => {
                    d < *bd || (d == *bd && stored.lex_cmp(bs) == std::cmp::Ordering::Less)
                }
            };
            if better {
                best = Some((d, stored, *action));
            }
        }
        best.map(|(_, _, a)| a)
            .ok_or_else(|| Error::MissingPolicyEntry(s.values().to_vec()))
    }
}

/// Weighted behavioral cloning over recovered actions.
///
/// Draws `batch * iters` transitions from the sampling distribution, recovers
/// each transition's action in the imitator environment, and keeps the
/// most-sampled action per former state (ties by lowest action index).
/// Deterministic given the seed.
pub fn fit_weighted_bc<E: Environment>(
    weighted: &WeightedTransitionSet,
    env: &E,
    metric: Metric,
    batch: usize,
    iters: usize,
    seed: u64,
) -> Result<ImitatorPolicy> {
    if batch == 0 || iters == 0 {
        return Err(Error::Config("batch and iters must be >= 1".into()));
    }
    if weighted.is_empty() {
        return Err(Error::EmptyInput("weighted transition set"));
    }
    let eps = env.quantization_eps();
    let mut rng = seeded_rng(seed, "fit_weighted_bc", 0);

    // Recovery is deterministic, so cache it per distinct transition.
    let mut recovered: HashMap<(StateKey, StateKey), ActionId> = HashMap::new();
    let mut votes: BTreeMap<StateKey, (StateVec, Vec<u64>)> = BTreeMap::new();
    let num_actions = env.num_actions();

    for _ in 0..iters {
        for _ in 0..batch {
            let entry = weighted.sample(&mut rng);
            let from = &entry.transition.from;
            let to = &entry.transition.to;
            let cache_key = (from.key(eps), to.key(eps));
            let action = match recovered.get(&cache_key) {
                Some(a) => *a,
                None => {
                    let rec = recover_action(env, from, to, metric)?;
                    recovered.insert(cache_key, rec.best_action);
                    rec.best_action
                }
            };
            let slot = votes
                .entry(from.key(eps))
                .or_insert_with(|| (from.clone(), vec![0; num_actions]));
            slot.1[action.index()] += 1;
        }
    }

    let entries = votes
        .into_iter()
        .map(|(key, (state, counts))| {
            let mut best_a = 0;
            let mut best_count = 0u64;
            for (a, &count) in counts.iter().enumerate() {
                if count > best_count {
                    best_count = count;
                    best_a = a;
                }
            }
            (key, (state, ActionId(best_a)))
        })
        .collect();

    Ok(ImitatorPolicy {
        eps,
        metric,
        entries,
    })
}

/// Baseline: every trajectory gets weight 1, so the sampling distribution is
/// uniform over all transitions.
pub fn uniform_weights(demos: &[Trajectory]) -> Result<WeightedTransitionSet> {
    let records: Vec<FeasibilityRecord> = demos
        .iter()
        .map(|d| FeasibilityRecord {
            demonstrator_id: d.demonstrator_id,
            trajectory_id: d.trajectory_id,
            raw_reward: 0.0,
            shifted_reward: 0.0,
            weight: 1.0,
        })
        .collect();
    transition_sampling_distribution(demos, &records)
}

/// Inverse-dynamics feasibility: replays each demonstration by chaining
/// greedy one-step recoveries from its start (each achieved state feeds the
/// next query) and sums the discounted distances to the demonstration.
pub fn id_feas_raw_scores<E: Environment>(
    demos: &[Trajectory],
    env: &E,
    metric: Metric,
    gamma_f: f64,
) -> Result<Vec<RawScore>> {
    if !(gamma_f > 0.0 && gamma_f <= 1.0) {
        return Err(Error::Config("gamma_f must be in (0, 1]".into()));
    }
    let mut scores = Vec::with_capacity(demos.len());
    for demo in demos {
        let mut current = demo.states[0].clone();
        let mut total = 0.0;
        let mut disc = 1.0;
        for target in demo.states.iter().skip(1) {
            let rec = recover_action(env, &current, target, metric)?;
            disc *= gamma_f;
            total -= disc * rec.residual;
            current = rec.achieved;
        }
        scores.push(RawScore {
            demonstrator_id: demo.demonstrator_id,
            trajectory_id: demo.trajectory_id,
            raw_reward: total,
        });
    }
    Ok(scores)
}

/// Baseline weighting from the inverse-dynamics scores, using the same
/// weight transform as the solved scores so the two are comparable.
pub fn id_feas_weights<E: Environment>(
    demos: &[Trajectory],
    env: &E,
    metric: Metric,
    config: &ScoreConfig,
) -> Result<WeightedTransitionSet> {
    let raws = id_feas_raw_scores(demos, env, metric, config.gamma_f)?;
    let records = feasibility(&raws, config)?;
    transition_sampling_distribution(demos, &records)
}
