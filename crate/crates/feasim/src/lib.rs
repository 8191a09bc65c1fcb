//! Feasibility-weighted imitation learning from state-only demonstrations.
//!
//! Demonstrations recorded on agents with different dynamics may be partially
//! or entirely infeasible for the imitator. This crate scores each
//! demonstration trajectory by how closely the imitator's best effort can
//! track it, then uses those scores to reweight behavioral cloning and to
//! decide which demonstrator to query for more data.
//!
//! The pipeline, bottom to top:
//!
//! 1. [`mdp`] — deterministic finite-action environments, trajectories,
//!    transition collections, distance metrics, rollouts.
//! 2. [`envs`] — parameterized environment families (grid, point mass,
//!    two-joint chain) with scripted experts and demo corpus generation.
//! 3. [`fmdp`] — the tracking MDP: an auxiliary environment whose reward
//!    penalizes distance to the next state of a tracked demonstration.
//! 4. [`solver`] — exact value iteration and tabular Q-learning over any
//!    environment, used both to plan experts and to solve tracking MDPs.
//! 5. [`feasibility`] — trajectory scores, per-transition weights, the
//!    transition sampling distribution, demonstrator profiles, and budgeted
//!    demonstration acquisition.
//! 6. [`imitate`] — exhaustive inverse-action recovery and weighted
//!    behavioral cloning, plus uniform and inverse-dynamics baselines.
//! 7. [`harness`] — end-to-end experiment pipeline with CSV reporting.

pub mod envs;
pub mod error;
pub mod feasibility;
pub mod fmdp;
pub mod harness;
pub mod imitate;
pub mod mdp;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use mdp::{
    collect_transitions, distance, expected_return, rollout, step, ActionId, Environment, Metric,
    Policy, StateVec, Trajectory, TransitionSet,
};
