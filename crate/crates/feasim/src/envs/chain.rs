use crate::envs::params::DynamicsParams;
use crate::error::{Error, Result};
use crate::mdp::{ActionId, Environment, StateVec};

/// Two-joint arm in discretized angle space (degrees).
///
/// State (front, back) joint angles, start (0,0), goal (45,45). Each step
/// changes each joint by -step, 0, or +step degrees; results clip at the
/// per-joint limits. Reward -1 per step, +10 on reaching the goal
/// configuration; horizon 10.
///
/// Knobs:
/// - `step_deg` (default 15): per-joint angle increment.
/// - `joint_limit_deg` (default 90): symmetric limit applied to both joints.
/// - `limit_front_deg` / `limit_back_deg`: per-joint overrides.
#[derive(Debug, Clone)]
pub struct ChainEnv {
    step_deg: f64,
    limit_front: f64,
    limit_back: f64,
    actions: Vec<(f64, f64)>,
    labels: Vec<String>,
    initial: Vec<StateVec>,
}

const GOAL: (f64, f64) = (45.0, 45.0);
const RANGE: f64 = 90.0;
const STEP_REWARD: f64 = -1.0;
const GOAL_BONUS: f64 = 10.0;

impl ChainEnv {
    pub fn new(step_deg: f64, limit_front: f64, limit_back: f64) -> Result<Self> {
        if step_deg <= 0.0 || step_deg.is_nan() {
            return Err(Error::Config("step_deg must be positive".into()));
        }
        for (name, limit) in [("limit_front", limit_front), ("limit_back", limit_back)] {
            if !(limit > 0.0 && limit <= RANGE) {
                return Err(Error::Config(format!(
                    "{name} must be in (0, {RANGE}] degrees"
                )));
            }
        }
        let moves = [
            (1.0, 0.0, "F+"),
            (0.0, 1.0, "B+"),
            (-1.0, 0.0, "F-"),
            (0.0, -1.0, "B-"),
            (1.0, 1.0, "F+B+"),
            (-1.0, 1.0, "F-B+"),
            (-1.0, -1.0, "F-B-"),
            (1.0, -1.0, "F+B-"),
            (0.0, 0.0, "HOLD"),
        ];
        let actions = moves
            .iter()
            .map(|(a, b, _)| (a * step_deg, b * step_deg))
            .collect();
        let labels = moves.iter().map(|(_, _, l)| l.to_string()).collect();
        Ok(ChainEnv {
            step_deg,
            limit_front,
            limit_back,
            actions,
            labels,
            initial: vec![StateVec::from([0.0, 0.0])],
        })
    }

    pub fn from_params(params: &DynamicsParams) -> Result<Self> {
        params.check_known(
            "chain",
            &[
                "step_deg",
                "joint_limit_deg",
                "limit_front_deg",
                "limit_back_deg",
            ],
        )?;
        let step = params.num("step_deg").unwrap_or(15.0);
        let shared = params.num("joint_limit_deg").unwrap_or(RANGE);
        let front = params.num("limit_front_deg").unwrap_or(shared);
        let back = params.num("limit_back_deg").unwrap_or(shared);
        ChainEnv::new(step, front, back)
    }

    pub fn params_render(&self) -> String {
        format!(
            "limit_back_deg={},limit_front_deg={},step_deg={}",
            self.limit_back, self.limit_front, self.step_deg
        )
    }

    pub fn goal(&self) -> StateVec {
        StateVec::from([GOAL.0, GOAL.1])
    }

    pub fn limits(&self) -> (f64, f64) {
        (self.limit_front, self.limit_back)
    }

    fn at_goal(&self, s: &StateVec) -> bool {
        s.values()[0] == GOAL.0 && s.values()[1] == GOAL.1
    }
}

impl Environment for ChainEnv {
    fn state_dim(&self) -> usize {
        2
    }

    fn num_actions(&self) -> usize {
        self.actions.len()
    }

    fn action_label(&self, a: ActionId) -> String {
        self.labels[a.index()].clone()
    }

    fn transition(&self, s: &StateVec, a: ActionId) -> Result<StateVec> {
        s.check_dim(2)?;
        a.check(self.num_actions())?;
        let (df, db) = self.actions[a.index()];
        let front = (s.values()[0] + df).clamp(-self.limit_front, self.limit_front);
        let back = (s.values()[1] + db).clamp(-self.limit_back, self.limit_back);
        Ok(StateVec::from([front, back]))
    }

    fn reward(&self, s: &StateVec, _a: ActionId, next: &StateVec) -> Result<f64> {
        if self.at_goal(s) {
            return Ok(0.0);
        }
        Ok(STEP_REWARD + if self.at_goal(next) { GOAL_BONUS } else { 0.0 })
    }

    fn initial_states(&self) -> &[StateVec] {
        &self.initial
    }

    fn gamma(&self) -> f64 {
        0.99
    }

    fn horizon(&self) -> usize {
        10
    }

    fn is_terminal(&self, s: &StateVec) -> bool {
        self.at_goal(s)
    }
}
