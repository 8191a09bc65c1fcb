//! Tabular solvers: exact value iteration and Q-learning.
//!
//! Value iteration is the reference solver. It enumerates the reachable state
//! space, so it is capped; Q-learning handles anything larger and is checked
//! against value iteration wherever both apply.

mod policy;
mod q_learning;
mod value_iteration;

pub use policy::TabularPolicy;
pub use q_learning::q_learning;
pub use value_iteration::{value_iteration, ValueSolution};

use crate::error::{Error, Result};

/// Tolerance under which two action values count as tied; ties resolve to the
/// lowest action index so solved policies are reproducible.
pub(crate) const TIE_EPS: f64 = 1e-12;

/// Knobs for the tabular solvers.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Q-learning episodes.
    pub episodes: usize,
    /// Q-learning step size.
    pub learning_rate: f64,
    /// Exploration schedule: linear decay from `epsilon_start` to
    /// `epsilon_end` across the episode budget.
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub seed: u64,
    /// Bellman residual tolerance for value iteration.
    pub vi_tolerance: f64,
    /// Reachable-state cap for value iteration.
    pub state_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            episodes: 50_000,
            learning_rate: 0.1,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            seed: 0,
            vi_tolerance: 1e-10,
            state_cap: 200_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::Config("episodes must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Config("learning_rate must be in (0, 1]".into()));
        }
        for (name, eps) in [
            ("epsilon_start", self.epsilon_start),
            ("epsilon_end", self.epsilon_end),
        ] {
            if !(0.0..=1.0).contains(&eps) {
                return Err(Error::Config(format!("{name} must be in [0, 1]")));
            }
        }
        if self.epsilon_end > self.epsilon_start {
            return Err(Error::Config(
                "epsilon schedule must be non-increasing".into(),
            ));
        }
        if self.vi_tolerance <= 0.0 || self.vi_tolerance.is_nan() {
            return Err(Error::Config("vi_tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Canonical rendering for cache keys and reports.
    pub fn render(&self) -> String {
        format!(
            "episodes={};lr={};eps={}..{};seed={};tol={};cap={}",
            self.episodes,
            self.learning_rate,
            self.epsilon_start,
            self.epsilon_end,
            self.seed,
            self.vi_tolerance,
            self.state_cap
        )
    }
}
