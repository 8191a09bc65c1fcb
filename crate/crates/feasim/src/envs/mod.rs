//! Parameterized environment families.
//!
//! All members of a family share the state space, reward, initial states,
//! and horizon; a family's dynamics knobs change only the action set and the
//! transition function. That lets one family host both the imitator and
//! demonstrators whose motions the imitator may not be able to reproduce.
//!
//! Families:
//! - [`GridEnv`] — 5x5 grid, goal in the far corner. Knob: the allowed move
//!   set (cardinal steps, cardinal+diagonal steps, or distance-2 jumps).
//! - [`PointMassEnv`] — 20x7 board with a pocket-shaped wall. Knobs: maximum
//!   step length, and whether the agent flies over walls or is blocked.
//! - [`ChainEnv`] — two-joint arm in discretized angle space. Knobs: per-step
//!   angle increment and per-joint angle limits.

mod chain;
mod expert;
mod grid;
mod params;
mod pointmass;

pub use chain::ChainEnv;
pub use expert::{generate_demos, scripted_expert, ScriptedExpert};
pub use grid::{GridEnv, MoveSet};
pub use params::{DynamicsParams, ParamValue};
pub use pointmass::PointMassEnv;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{ActionId, Environment, StateVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyId {
    Grid,
    PointMass,
    Chain,
}

impl FamilyId {
    pub fn parse(s: &str) -> Result<FamilyId> {
        match s.to_ascii_lowercase().as_str() {
            "grid" => Ok(FamilyId::Grid),
            "pointmass" => Ok(FamilyId::PointMass),
            "chain" => Ok(FamilyId::Chain),
            other => Err(Error::Config(format!(
                "unknown environment family `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for FamilyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilyId::Grid => write!(f, "grid"),
            FamilyId::PointMass => write!(f, "pointmass"),
            FamilyId::Chain => write!(f, "chain"),
        }
    }
}

/// A concrete environment from any family, for call sites that pick the
/// family at runtime (CLI, config files).
#[derive(Debug, Clone)]
pub enum EnvKind {
    Grid(GridEnv),
    PointMass(PointMassEnv),
    Chain(ChainEnv),
}

impl EnvKind {
    pub fn family(&self) -> FamilyId {
        match self {
            EnvKind::Grid(_) => FamilyId::Grid,
            EnvKind::PointMass(_) => FamilyId::PointMass,
            EnvKind::Chain(_) => FamilyId::Chain,
        }
    }

    /// Canonical `family:knob=value,...` label for reports and cache keys.
    pub fn label(&self) -> String {
        match self {
            EnvKind::Grid(e) => format!("grid:{}", e.params_render()),
            EnvKind::PointMass(e) => format!("pointmass:{}", e.params_render()),
            EnvKind::Chain(e) => format!("chain:{}", e.params_render()),
        }
    }
}

/// Builds an environment from a family id and dynamics knobs.
pub fn make_env(family: FamilyId, params: &DynamicsParams) -> Result<EnvKind> {
    match family {
        FamilyId::Grid => Ok(EnvKind::Grid(GridEnv::from_params(params)?)),
        FamilyId::PointMass => Ok(EnvKind::PointMass(PointMassEnv::from_params(params)?)),
        FamilyId::Chain => Ok(EnvKind::Chain(ChainEnv::from_params(params)?)),
    }
}

macro_rules! dispatch {
    ($self:ident, $env:ident => $body:expr) => {
        match $self {
            EnvKind::Grid($env) => $body,
            EnvKind::PointMass($env) => $body,
            EnvKind::Chain($env) => $body,
        }
    };
}

impl Environment for EnvKind {
    fn state_dim(&self) -> usize {
        dispatch!(self, e => e.state_dim())
    }
    fn num_actions(&self) -> usize {
        dispatch!(self, e => e.num_actions())
    }
    fn action_label(&self, a: ActionId) -> String {
        dispatch!(self, e => e.action_label(a))
    }
    fn transition(&self, s: &StateVec, a: ActionId) -> Result<StateVec> {
        dispatch!(self, e => e.transition(s, a))
    }
    fn reward(&self, s: &StateVec, a: ActionId, next: &StateVec) -> Result<f64> {
        dispatch!(self, e => e.reward(s, a, next))
    }
    fn initial_states(&self) -> &[StateVec] {
        dispatch!(self, e => e.initial_states())
    }
    fn gamma(&self) -> f64 {
        dispatch!(self, e => e.gamma())
    }
    fn horizon(&self) -> usize {
        dispatch!(self, e => e.horizon())
    }
    fn is_terminal(&self, s: &StateVec) -> bool {
        dispatch!(self, e => e.is_terminal(s))
    }
    fn quantization_eps(&self) -> f64 {
        dispatch!(self, e => e.quantization_eps())
    }
}
