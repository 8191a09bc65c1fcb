use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::mdp::state::{ActionId, StateVec};
use crate::mdp::trajectory::Trajectory;
use crate::rng::seeded_rng;

/// A deterministic, finite-action environment.
///
/// `transition` is a pure function of `(state, action)`; the same pair always
/// yields the same successor, and the successor always satisfies the state
/// invariants. Out-of-range motions clip to the nearest valid state rather
/// than erroring, so the dynamics are total over valid states.
///
/// The reward takes three arguments `(s, a, s')` to match the general return
/// definition; the environments supplied by this crate ignore the action
/// argument and reward state transitions only.
///
/// Implementations are immutable and cheaply cloneable, so independent
/// workers can step copies in parallel.
pub trait Environment: Send + Sync {
    fn state_dim(&self) -> usize;

    fn num_actions(&self) -> usize;

    /// Human-readable label for an action index, for logs and reports.
    fn action_label(&self, a: ActionId) -> String {
        format!("a{}", a.index())
    }

    /// Deterministic successor of `(s, a)`.
    fn transition(&self, s: &StateVec, a: ActionId) -> Result<StateVec>;

    fn reward(&self, s: &StateVec, a: ActionId, next: &StateVec) -> Result<f64>;

    /// Finite set of initial states, sampled uniformly.
    fn initial_states(&self) -> &[StateVec];

    fn gamma(&self) -> f64;

    fn horizon(&self) -> usize;

    /// Whether an episode ends in this state. Terminal states still have
    /// total dynamics; rollouts simply stop there.
    fn is_terminal(&self, s: &StateVec) -> bool;

    /// Quantization granularity for state identity. Discrete environments
    /// keep the default.
    fn quantization_eps(&self) -> f64 {
        1e-9
    }
}

impl<E: Environment + ?Sized> Environment for &E {
    fn state_dim(&self) -> usize {
        (**self).state_dim()
    }
    fn num_actions(&self) -> usize {
        (**self).num_actions()
    }
    fn action_label(&self, a: ActionId) -> String {
        (**self).action_label(a)
    }
    fn transition(&self, s: &StateVec, a: ActionId) -> Result<StateVec> {
        (**self).transition(s, a)
    }
    fn reward(&self, s: &StateVec, a: ActionId, next: &StateVec) -> Result<f64> {
        (**self).reward(s, a, next)
    }
    fn initial_states(&self) -> &[StateVec] {
        (**self).initial_states()
    }
    fn gamma(&self) -> f64 {
        (**self).gamma()
    }
    fn horizon(&self) -> usize {
        (**self).horizon()
    }
    fn is_terminal(&self, s: &StateVec) -> bool {
        (**self).is_terminal(s)
    }
    fn quantization_eps(&self) -> f64 {
        (**self).quantization_eps()
    }
}

/// A deterministic state-to-action mapping.
pub trait Policy {
    fn action(&self, s: &StateVec) -> Result<ActionId>;
}

impl<F> Policy for F
where
    F: Fn(&StateVec) -> Result<ActionId>,
{
    fn action(&self, s: &StateVec) -> Result<ActionId> {
        self(s)
    }
}

/// Validated single environment step.
pub fn step<E: Environment>(env: &E, s: &StateVec, a: ActionId) -> Result<StateVec> {
    s.check_dim(env.state_dim())?;
    a.check(env.num_actions())?;
    let next = env.transition(s, a)?;
    debug_assert_eq!(next.dim(), env.state_dim());
    next.check_dim(env.state_dim())?;
    Ok(next)
}

/// Result of rolling a policy forward from a start state.
///
/// `trajectory` stores states only (ids default to zero; corpus generators
/// re-tag them). Actions are reported separately so callers can replay or
/// audit the rollout.
#[derive(Debug, Clone)]
pub struct Rollout {
    pub trajectory: Trajectory,
    pub actions: Vec<ActionId>,
    pub discounted_return: f64,
}

/// Rolls `policy` forward from `s0` for at most `steps` steps, stopping early
/// at a terminal state. The discounted return is `sum_t gamma^t r_t` with the
/// environment's own gamma.
pub fn rollout<E: Environment, P: Policy + ?Sized>(
    env: &E,
    policy: &P,
    s0: &StateVec,
    steps: usize,
) -> Result<Rollout> {
    s0.check_dim(env.state_dim())?;
    let mut states = vec![s0.clone()];
    let mut actions = Vec::new();
    let mut ret = 0.0;
    let mut disc = 1.0;
    let gamma = env.gamma();
    let mut current = s0.clone();
    for _ in 0..steps {
        if env.is_terminal(&current) {
            break;
        }
        let a = policy.action(&current)?;
        let next = step(env, &current, a)?;
        ret += disc * env.reward(&current, a, &next)?;
        disc *= gamma;
        states.push(next.clone());
        actions.push(a);
        current = next;
    }
    Ok(Rollout {
        trajectory: Trajectory::untagged(states),
        actions,
        discounted_return: ret,
    })
}

/// Mean and population standard deviation of the discounted return over
/// `n_rollouts` episodes, drawing start states uniformly from the
/// environment's initial set with a seeded generator.
pub fn expected_return<E: Environment, P: Policy + ?Sized>(
    env: &E,
    policy: &P,
    n_rollouts: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if n_rollouts == 0 {
        return Err(Error::Config("n_rollouts must be >= 1".into()));
    }
    let starts = env.initial_states();
    if starts.is_empty() {
        return Err(Error::EmptyInput("environment has no initial states"));
    }
    let mut rng: ChaCha12Rng = seeded_rng(seed, "expected_return", 0);
    let mut returns = Vec::with_capacity(n_rollouts);
    for _ in 0..n_rollouts {
        let s0 = &starts[rng.gen_range(0..starts.len())];
        let out = rollout(env, policy, s0, env.horizon())?;
        returns.push(out.discounted_return);
    }
    let mean = returns.iter().sum::<f64>() / n_rollouts as f64;
    let var = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n_rollouts as f64;
    Ok((mean, var.sqrt()))
}
