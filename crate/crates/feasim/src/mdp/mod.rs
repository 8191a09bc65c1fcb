//! Core MDP abstractions: states, actions, environments, trajectories,
//! transition collections, distance metrics, and rollout machinery.

mod env;
mod metric;
mod state;
mod trajectory;

pub use env::{expected_return, rollout, step, Environment, Policy, Rollout};
pub use metric::{distance, Metric};
pub use state::{ActionId, StateKey, StateVec};
pub use trajectory::{
    collect_transitions, load_demos_jsonl, save_demos_jsonl, Trajectory, Transition, TransitionSet,
};
