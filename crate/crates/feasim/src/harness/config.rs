use serde::{Deserialize, Serialize};

use crate::envs::{DynamicsParams, FamilyId};
use crate::error::{Error, Result};
use crate::feasibility::ScoreConfig;
use crate::mdp::Metric;
use crate::solver::SolverConfig;

/// Which environment to build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub family: FamilyId,
    #[serde(default)]
    pub params: DynamicsParams,
}

/// One demonstrator: an environment plus how many demos it contributes.
///
/// `randomized` demos sample uniformly among the expert's optimal actions,
/// giving a varied corpus; otherwise every demo follows the canonical
/// lowest-index optimal path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemonstratorSpec {
    pub family: FamilyId,
    #[serde(default)]
    pub params: DynamicsParams,
    pub count: usize,
    #[serde(default)]
    pub randomized: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImitationMethod {
    Ours,
    IdFeas,
    Uniform,
}

impl ImitationMethod {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ours" => Ok(ImitationMethod::Ours),
            "idfeas" => Ok(ImitationMethod::IdFeas),
            "uniform" => Ok(ImitationMethod::Uniform),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

impl std::fmt::Display for ImitationMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ImitationMethod::Ours => write!(f, "ours"),
            ImitationMethod::IdFeas => write!(f, "idfeas"),
            ImitationMethod::Uniform => write!(f, "uniform"),
        }
    }
}

/// How tracking MDPs get solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    /// Value iteration, falling back to Q-learning past the state cap.
    Auto,
    Vi,
    Q,
}

/// Full pipeline configuration. Loadable from a TOML file; CLI flags
/// override file values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub imitator: EnvSpec,
    pub demonstrators: Vec<DemonstratorSpec>,
    pub score: ScoreConfig,
    pub solver: SolverConfig,
    pub solver_kind: SolverKind,
    pub method: ImitationMethod,
    pub metric: Metric,
    pub eval_rollouts: usize,
    pub seeds: Vec<u64>,
    /// Seed for corpus generation, separate from the training/eval seeds so
    /// every seed trains on the same corpus.
    pub corpus_seed: u64,
    pub fit_batch: usize,
    pub fit_iters: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        // Default composition: a few related demonstrators, many unrelated,
        // on the grid scenario.
        ExperimentConfig {
            imitator: EnvSpec {
                family: FamilyId::Grid,
                params: DynamicsParams::new().with_id("moveset", "I4"),
            },
            demonstrators: vec![
                DemonstratorSpec {
                    family: FamilyId::Grid,
                    params: DynamicsParams::new().with_id("moveset", "I4"),
                    count: 5,
                    randomized: true,
                },
                DemonstratorSpec {
                    family: FamilyId::Grid,
                    params: DynamicsParams::new().with_id("moveset", "D8"),
                    count: 5,
                    randomized: false,
                },
                DemonstratorSpec {
                    family: FamilyId::Grid,
                    params: DynamicsParams::new().with_id("moveset", "DJ"),
                    count: 50,
                    randomized: false,
                },
                DemonstratorSpec {
                    family: FamilyId::PointMass,
                    params: DynamicsParams::new().with_num("fly", 1.0),
                    count: 50,
                    randomized: false,
                },
            ],
            score: ScoreConfig::default(),
            solver: SolverConfig::default(),
            solver_kind: SolverKind::Auto,
            method: ImitationMethod::Ours,
            metric: Metric::L2,
            eval_rollouts: 100,
            seeds: vec![0, 1, 2, 3, 4],
            corpus_seed: 9,
            fit_batch: 256,
            fit_iters: 40,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.demonstrators.is_empty() {
            return Err(Error::Config("at least one demonstrator required".into()));
        }
        if self.eval_rollouts == 0 {
            return Err(Error::Config("eval_rollouts must be >= 1".into()));
        }
        if self.fit_batch == 0 || self.fit_iters == 0 {
            return Err(Error::Config("fit_batch and fit_iters must be >= 1".into()));
        }
        self.score.validate()?;
        self.solver.validate()?;
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("bad config file: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load<P: AsRef<std::path::Path>>(path: P) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("render config: {e}")))
    }
}
