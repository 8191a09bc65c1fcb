//! Stochastic-dynamics extension of the feasibility estimator.
//!
//! Under stochastic transitions the tracking penalty is an expectation, so
//! the score of a trajectory is estimated by averaging the discounted
//! distance sums of M independent rollouts of the solved policy. On a
//! deterministic environment the estimate equals the deterministic score for
//! any M.

use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::feasibility::{FeasibilityRecord, ScoreConfig};
use crate::fmdp::{FMdp, FmdpVariant};
use crate::mdp::{distance, ActionId, Environment, Policy, StateVec, Trajectory};
use crate::rng::seeded_rng;

/// An environment whose transitions can be sampled with an explicit
/// generator. The inherited deterministic `transition` is the noiseless
/// skeleton used for construction and exact solving.
pub trait StochasticDynamics: Environment {
    fn sample_transition(
        &self,
        s: &StateVec,
        a: ActionId,
        rng: &mut ChaCha12Rng,
    ) -> Result<StateVec>;
}

/// Action-slip noise: with probability `flip_prob` the executed action is
/// resampled uniformly from the whole action table.
#[derive(Debug, Clone)]
pub struct ActionNoise<E: Environment> {
    base: E,
    flip_prob: f64,
}

impl<E: Environment> ActionNoise<E> {
    pub fn new(base: E, flip_prob: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&flip_prob) {
            return Err(Error::Config("flip_prob must be in [0, 1]".into()));
        }
        Ok(ActionNoise { base, flip_prob })
    }

    pub fn base(&self) -> &E {
        &self.base
    }
}

impl<E: Environment> Environment for ActionNoise<E> {
    fn state_dim(&self) -> usize {
        self.base.state_dim()
    }
    fn num_actions(&self) -> usize {
        self.base.num_actions()
    }
    fn action_label(&self, a: ActionId) -> String {
        self.base.action_label(a)
    }
    fn transition(&self, s: &StateVec, a: ActionId) -> Result<StateVec> {
        self.base.transition(s, a)
    }
    fn reward(&self, s: &StateVec, a: ActionId, next: &StateVec) -> Result<f64> {
        self.base.reward(s, a, next)
    }
    fn initial_states(&self) -> &[StateVec] {
        self.base.initial_states()
    }
    fn gamma(&self) -> f64 {
        self.base.gamma()
    }
    fn horizon(&self) -> usize {
        self.base.horizon()
    }
    fn is_terminal(&self, s: &StateVec) -> bool {
        self.base.is_terminal(s)
    }
    fn quantization_eps(&self) -> f64 {
        self.base.quantization_eps()
    }
}

impl<E: Environment> StochasticDynamics for ActionNoise<E> {
    fn sample_transition(
        &self,
        s: &StateVec,
        a: ActionId,
        rng: &mut ChaCha12Rng,
    ) -> Result<StateVec> {
        use rand::Rng;
        let executed = if self.flip_prob > 0.0 && rng.gen::<f64>() < self.flip_prob {
            ActionId(rng.gen_range(0..self.num_actions()))
        } else {
            a
        };
        self.base.transition(s, executed)
    }
}

impl<E: StochasticDynamics> StochasticDynamics for FMdp<E> {
    fn sample_transition(
        &self,
        s: &StateVec,
        a: ActionId,
        rng: &mut ChaCha12Rng,
    ) -> Result<StateVec> {
        self.step_with(s, a, |base, action| {
            self.imitator_env().sample_transition(base, action, rng)
        })
    }
}

/// M-rollout Monte Carlo estimate of a trajectory's feasibility under
/// stochastic dynamics. Deterministic given the seed.
///
/// The record's shift constant and sigma resolve over the single estimate
/// (an explicit `c` in the config is typical here).
pub fn feasibility_stochastic<E: StochasticDynamics, P: Policy + ?Sized>(
    policy: &P,
    fmdp: &FMdp<E>,
    xi: &Trajectory,
    config: &ScoreConfig,
    seed: u64,
) -> Result<FeasibilityRecord> {
    config.validate()?;
    if fmdp.variant() != FmdpVariant::Trajectory {
        return Err(Error::Config(
            "scoring requires a trajectory-variant f-MDP".into(),
        ));
    }
    let start = fmdp.start_of(xi.demonstrator_id, xi.trajectory_id)?;
    if fmdp.track_len_of(&start)? != xi.states.len() {
        return Err(Error::UnknownTrajectory {
            demonstrator_id: xi.demonstrator_id,
            trajectory_id: xi.trajectory_id,
        });
    }
    let gamma_f = fmdp.gamma_f();
    let metric = fmdp.metric();
    let m = config.mc_rollouts;
    let mut total = 0.0;
    for rep in 0..m {
        let mut rng = seeded_rng(seed, "mc_rollout", rep as u64);
        let mut aug = start.clone();
        let mut disc = 1.0;
        for t in 1..xi.states.len() {
            let a = policy.action(&aug)?;
            aug = fmdp.sample_transition(&aug, a, &mut rng)?;
            disc *= gamma_f;
            let reached = fmdp.project(&aug)?;
            total -= disc * distance(metric, &reached, &xi.states[t])?;
        }
    }
    let raw = total / m as f64;
    let c = config.c.unwrap_or_else(|| raw.min(0.0));
    let sigma = match config.sigma {
        Some(sigma) => sigma,
        None => {
            let span = c - raw.min(0.0);
            if span > 0.0 {
                span / 100.0f64.ln()
            } else {
                1.0
            }
        }
    };
    let shifted = raw - c;
    Ok(FeasibilityRecord {
        demonstrator_id: xi.demonstrator_id,
        trajectory_id: xi.trajectory_id,
        raw_reward: raw,
        shifted_reward: shifted,
        weight: (shifted / sigma).exp(),
    })
}
