use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::mdp::{rollout, ActionId, Environment, Policy, StateKey, StateVec, Trajectory};
use crate::rng::seeded_rng;
use crate::solver::value_iteration;

/// An optimal policy planned by value iteration, carrying the full set of
/// optimal actions per state.
///
/// As a [`Policy`] it is canonical: it always plays the lowest-index optimal
/// action. Demo generation can instead sample uniformly among the optimal
/// actions (see [`ScriptedExpert::randomized`]), which yields a varied corpus
/// of equally optimal trajectories.
#[derive(Debug, Clone)]
pub struct ScriptedExpert {
    optimal: HashMap<StateKey, Vec<ActionId>>,
    eps: f64,
    randomized: bool,
}

impl ScriptedExpert {
    /// Switches demo sampling to uniform draws among optimal actions.
    pub fn randomized(mut self) -> Self {
        self.randomized = true;
        self
    }

    pub fn is_randomized(&self) -> bool {
        self.randomized
    }

    fn choices(&self, s: &StateVec) -> Result<&[ActionId]> {
        self.optimal
            .get(&s.key(self.eps))
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::MissingPolicyEntry(s.values().to_vec()))
    }
}

impl Policy for ScriptedExpert {
    fn action(&self, s: &StateVec) -> Result<ActionId> {
        Ok(self.choices(s)?[0])
    }
}

/// Plans an optimal expert for `env` with value iteration.
///
/// Fails if no initial state can reach a terminal goal state within the
/// horizon, since such an environment has no demonstrating expert.
pub fn scripted_expert<E: Environment>(env: &E) -> Result<ScriptedExpert> {
    let solution = value_iteration(env, 1e-12, 200_000)?;
    let eps = env.quantization_eps();

    let mut optimal = HashMap::new();
    let mut stack: Vec<StateVec> = env.initial_states().to_vec();
    let mut seen: std::collections::HashSet<StateKey> = stack.iter().map(|s| s.key(eps)).collect();
    while let Some(s) = stack.pop() {
        if env.is_terminal(&s) {
            continue;
        }
        let actions = solution.optimal_actions(env, &s)?;
        for &a in &actions {
            let next = env.transition(&s, a)?;
            if seen.insert(next.key(eps)) {
                stack.push(next);
            }
        }
        optimal.insert(s.key(eps), actions);
    }

    let expert = ScriptedExpert {
        optimal,
        eps,
        randomized: false,
    };

    // The expert must actually reach the goal from every start.
    for s0 in env.initial_states() {
        let out = rollout(env, &expert, s0, env.horizon())?;
        if !env.is_terminal(out.trajectory.last()) {
            return Err(Error::ExpertFailure);
        }
    }
    Ok(expert)
}

/// Generates `n` expert demonstrations, deterministic given `seed`.
///
/// Trajectories are tagged 0..n with demonstrator id 0; corpus assembly
/// re-tags them. Every demonstration must reach the goal, otherwise the
/// expert has failed.
pub fn generate_demos<E: Environment>(
    env: &E,
    expert: &ScriptedExpert,
    n: usize,
    seed: u64,
) -> Result<Vec<Trajectory>> {
    if n == 0 {
        return Err(Error::Config("demo count must be >= 1".into()));
    }
    let starts = env.initial_states();
    let mut demos = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = seeded_rng(seed, "demo", i as u64);
        let mut state = starts[rng.gen_range(0..starts.len())].clone();
        let mut states = vec![state.clone()];
        for _ in 0..env.horizon() {
            if env.is_terminal(&state) {
                break;
            }
            let choices = expert.choices(&state)?;
            let a = if expert.randomized {
                choices[rng.gen_range(0..choices.len())]
            } else {
                choices[0]
            };
            state = crate::mdp::step(env, &state, a)?;
            states.push(state.clone());
        }
        if !env.is_terminal(&state) {
            return Err(Error::ExpertFailure);
        }
        demos.push(Trajectory::new(0, i as u64, states)?);
    }
    Ok(demos)
}
