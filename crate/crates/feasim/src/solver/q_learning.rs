use std::collections::HashMap;

use rand::Rng;

use crate::error::Result;
use crate::mdp::{ActionId, Environment, StateKey, StateVec};
use crate::rng::seeded_rng;
use crate::solver::{SolverConfig, TabularPolicy, TIE_EPS};

/// Tabular Q-learning with epsilon-greedy exploration and a linear epsilon
/// decay over the episode budget.
///
/// Episodes start uniformly from the environment's initial states and run to
/// a terminal state or the horizon. The returned policy is greedy in the
/// learned Q table with ties broken by lowest action index; identical
/// configurations (including the seed) produce identical policies.
pub fn q_learning<E: Environment>(env: &E, config: &SolverConfig) -> Result<TabularPolicy> {
    config.validate()?;
    let eps = env.quantization_eps();
    let num_actions = env.num_actions();
    let gamma = env.gamma();
    let starts = env.initial_states().to_vec();
    let mut rng = seeded_rng(config.seed, "q_learning", 0);

    // Q values and a representative state per key (keys are quantized).
    let mut q: HashMap<StateKey, Vec<f64>> = HashMap::new();
    let mut reps: HashMap<StateKey, StateVec> = HashMap::new();

    let greedy = |row: &[f64]| -> usize {
        let mut best = f64::NEG_INFINITY;
        let mut best_a = 0;
        for (a, &v) in row.iter().enumerate() {
            if v > best + TIE_EPS {
                best = v;
                best_a = a;
            }
        }
        best_a
    };

    for episode in 0..config.episodes {
        let frac = if config.episodes > 1 {
            episode as f64 / (config.episodes - 1) as f64
        } else {
            0.0
        };
        let epsilon = config.epsilon_start + (config.epsilon_end - config.epsilon_start) * frac;

        let mut s = starts[rng.gen_range(0..starts.len())].clone();
        for _ in 0..env.horizon() {
            if env.is_terminal(&s) {
                break;
            }
            let key = s.key(eps);
            reps.entry(key.clone()).or_insert_with(|| s.clone());
            let row = q
                .entry(key.clone())
                .or_insert_with(|| vec![0.0; num_actions]);
            let a = if rng.gen::<f64>() < epsilon {
                rng.gen_range(0..num_actions)
            } else {
                greedy(row)
            };
            let action = ActionId(a);
            let next = env.transition(&s, action)?;
            let r = env.reward(&s, action, &next)?;
            let target = if env.is_terminal(&next) {
                r
            } else {
                let next_key = next.key(eps);
                reps.entry(next_key.clone()).or_insert_with(|| next.clone());
                let next_row = q.entry(next_key).or_insert_with(|| vec![0.0; num_actions]);
                let max_next = next_row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                r + gamma * max_next
            };
            let row = q.get_mut(&s.key(eps)).expect("row inserted above");
            row[a] += config.learning_rate * (target - row[a]);
            s = next;
        }
    }

    let mut policy = TabularPolicy::new(eps);
    for (key, row) in &q {
        let rep = &reps[key];
        policy.insert(rep, ActionId(greedy(row)));
    }
    Ok(policy)
}
