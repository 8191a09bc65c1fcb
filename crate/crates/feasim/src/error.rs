//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state has dimension {got}, environment expects {want}")]
    DimensionMismatch { want: usize, got: usize },

    #[error("state contains a non-finite coordinate: {0:?}")]
    NonFiniteState(Vec<f64>),

    #[error("action index {index} out of range, environment has {count} actions")]
    InvalidAction { index: usize, count: usize },

    #[error("cosine distance is undefined for a zero vector")]
    UndefinedCosine,

    #[error("policy has no entry for state {0:?}")]
    MissingPolicyEntry(Vec<f64>),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("unknown dynamics knob `{knob}` for family {family}")]
    UnknownKnob { family: String, knob: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("expert failed to reach the goal within the horizon")]
    ExpertFailure,

    #[error("reachable state space exceeds the cap of {cap} states; use q_learning instead")]
    TooLarge { cap: usize },

    #[error("trajectory {trajectory_id} from demonstrator {demonstrator_id} is not tracked by this f-MDP")]
    UnknownTrajectory {
        demonstrator_id: u64,
        trajectory_id: u64,
    },

    #[error("sampling distribution is degenerate: all weights are zero")]
    DegenerateDistribution,

    #[error("demonstration file carries action data; loaders accept states only")]
    ActionDataPresent,

    #[error("malformed demonstration on line {line}: {msg}")]
    MalformedDemo { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
