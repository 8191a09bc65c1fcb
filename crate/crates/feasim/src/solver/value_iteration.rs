use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::mdp::{ActionId, Environment, StateKey, StateVec};
use crate::solver::{TabularPolicy, TIE_EPS};

/// Exact solution of a finite deterministic MDP.
#[derive(Debug, Clone)]
pub struct ValueSolution {
    pub policy: TabularPolicy,
    states: Vec<StateVec>,
    values: HashMap<StateKey, f64>,
    eps: f64,
    pub iterations: usize,
}

impl ValueSolution {
    /// Optimal value of a state, if it was reachable during the solve.
    pub fn value(&self, s: &StateVec) -> Option<f64> {
        self.values.get(&s.key(self.eps)).copied()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// All actions whose one-step lookahead ties the optimum at `s`,
    /// in ascending index order.
    pub fn optimal_actions<E: Environment>(&self, env: &E, s: &StateVec) -> Result<Vec<ActionId>> {
        let mut best = f64::NEG_INFINITY;
        let mut qs = Vec::with_capacity(env.num_actions());
        for a in 0..env.num_actions() {
            let action = ActionId(a);
            let next = env.transition(s, action)?;
            let r = env.reward(s, action, &next)?;
            let v_next = if env.is_terminal(&next) {
                0.0
            } else {
                *self
                    .values
                    .get(&next.key(self.eps))
                    .ok_or_else(|| Error::MissingPolicyEntry(next.values().to_vec()))?
            };
            let q = r + env.gamma() * v_next;
            qs.push(q);
            if q > best {
                best = q;
            }
        }
        Ok(qs
            .iter()
            .enumerate()
            .filter(|(_, q)| **q >= best - TIE_EPS)
            .map(|(a, _)| ActionId(a))
            .collect())
    }
}

/// Enumerates every state reachable from the initial set and solves the
/// Bellman optimality equations by Gauss-Seidel sweeps until the residual
/// drops below `tol`.
///
/// Sweeps run in reverse discovery order, which resolves finite-horizon
/// (DAG-shaped) problems in a single pass. Terminal states are absorbing
/// with value zero and are never expanded.
///
/// Fails with a too-large error when the reachable space exceeds `cap`;
/// callers should fall back to `q_learning`.
pub fn value_iteration<E: Environment>(env: &E, tol: f64, cap: usize) -> Result<ValueSolution> {
    if tol <= 0.0 || tol.is_nan() {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    let eps = env.quantization_eps();
    let num_actions = env.num_actions();
    let gamma = env.gamma();

    // Breadth-first closure of the reachable space.
    let mut index: HashMap<StateKey, usize> = HashMap::new();
    let mut states: Vec<StateVec> = Vec::new();
    let mut terminal: Vec<bool> = Vec::new();
    let mut frontier = std::collections::VecDeque::new();
    for s0 in env.initial_states() {
        if let std::collections::hash_map::Entry::Vacant(slot) = index.entry(s0.key(eps)) {
            slot.insert(states.len());
            terminal.push(env.is_terminal(s0));
            states.push(s0.clone());
            frontier.push_back(states.len() - 1);
        }
    }
    // (next index, reward) per state and action; empty for terminals.
    let mut arcs: Vec<Vec<(usize, f64)>> = Vec::new();
    arcs.resize_with(states.len(), Vec::new);

    while let Some(i) = frontier.pop_front() {
        if terminal[i] {
            continue;
        }
        let mut row = Vec::with_capacity(num_actions);
        for a in 0..num_actions {
            let action = ActionId(a);
            let s = states[i].clone();
            let next = env.transition(&s, action)?;
            let r = env.reward(&s, action, &next)?;
            let key = next.key(eps);
            let j = match index.get(&key) {
                Some(&j) => j,
                None => {
                    let j = states.len();
                    if j >= cap {
                        return Err(Error::TooLarge { cap });
                    }
                    index.insert(key, j);
                    terminal.push(env.is_terminal(&next));
                    states.push(next);
                    arcs.push(Vec::new());
                    frontier.push_back(j);
                    j
                }
            };
            row.push((j, r));
        }
        arcs[i] = row;
    }

    let n = states.len();
    let mut values = vec![0.0f64; n];
    let mut iterations = 0;
    // Reverse discovery order: deepest states first.
    let order: Vec<usize> = (0..n).rev().collect();
    loop {
        iterations += 1;
        let mut residual = 0.0f64;
        for &i in &order {
            if terminal[i] {
                continue;
            }
            let mut best = f64::NEG_INFINITY;
            for &(j, r) in &arcs[i] {
                let v = if terminal[j] { 0.0 } else { values[j] };
                let q = r + gamma * v;
                if q > best {
                    best = q;
                }
            }
            let delta = (best - values[i]).abs();
            if delta > residual {
                residual = delta;
            }
            values[i] = best;
        }
        if residual < tol {
            break;
        }
        if iterations > 1_000_000 {
            return Err(Error::Config(
                "value iteration failed to converge; check gamma and rewards".into(),
            ));
        }
    }

    let mut policy = TabularPolicy::new(eps);
    for i in 0..n {
        if terminal[i] {
            continue;
        }
        let mut best = f64::NEG_INFINITY;
        let mut best_action = ActionId(0);
        for (a, &(j, r)) in arcs[i].iter().enumerate() {
            let v = if terminal[j] { 0.0 } else { values[j] };
            let q = r + gamma * v;
            if q > best + TIE_EPS {
                best = q;
                best_action = ActionId(a);
            }
        }
        policy.insert(&states[i], best_action);
    }

    let values: HashMap<StateKey, f64> = states
        .iter()
        .zip(values.iter())
        .map(|(s, v)| (s.key(eps), *v))
        .collect();

    Ok(ValueSolution {
        policy,
        states,
        values,
        eps,
        iterations,
    })
}
