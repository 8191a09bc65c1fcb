use crate::envs::params::DynamicsParams;
use crate::error::{Error, Result};
use crate::mdp::{ActionId, Environment, StateVec};

/// Allowed move set: the grid family's dynamics knob.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveSet {
    /// Unit cardinal moves E, N, W, S.
    I4,
    /// Unit cardinal plus diagonal moves.
    D8,
    /// Distance-2 jumps along the axes only.
    DJ,
}

impl MoveSet {
    pub fn parse(s: &str) -> Result<MoveSet> {
        match s.to_ascii_uppercase().as_str() {
            "I4" => Ok(MoveSet::I4),
            "D8" => Ok(MoveSet::D8),
            "DJ" => Ok(MoveSet::DJ),
            other => Err(Error::Config(format!("unknown grid move set `{other}`"))),
        }
    }

    fn deltas(self) -> &'static [(f64, f64)] {
        match self {
            MoveSet::I4 => &[(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)],
            MoveSet::D8 => &[
                (1.0, 0.0),
                (0.0, 1.0),
                (-1.0, 0.0),
                (0.0, -1.0),
                (1.0, 1.0),
                (-1.0, 1.0),
                (-1.0, -1.0),
                (1.0, -1.0),
            ],
            MoveSet::DJ => &[(2.0, 0.0), (0.0, 2.0), (-2.0, 0.0), (0.0, -2.0)],
        }
    }

    fn labels(self) -> &'static [&'static str] {
        match self {
            MoveSet::I4 => &["E", "N", "W", "S"],
            MoveSet::D8 => &["E", "N", "W", "S", "NE", "NW", "SW", "SE"],
            MoveSet::DJ => &["E2", "N2", "W2", "S2"],
        }
    }
}

impl std::fmt::Display for MoveSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MoveSet::I4 => write!(f, "I4"),
            MoveSet::D8 => write!(f, "D8"),
            MoveSet::DJ => write!(f, "DJ"),
        }
    }
}

/// 5x5 grid, start (0,0), goal (4,4). Step reward -1, plus +10 on entering
/// the goal; the episode ends at the goal. Moves that would leave the grid
/// clip to the nearest cell.
#[derive(Debug, Clone)]
pub struct GridEnv {
    moveset: MoveSet,
    initial: Vec<StateVec>,
}

const GRID_MAX: f64 = 4.0;
const STEP_REWARD: f64 = -1.0;
const GOAL_BONUS: f64 = 10.0;

impl GridEnv {
    pub fn new(moveset: MoveSet) -> Self {
        GridEnv {
            moveset,
            initial: vec![StateVec::from([0.0, 0.0])],
        }
    }

    /// Knobs: `moveset` = `I4` | `D8` | `DJ` (default `I4`).
    pub fn from_params(params: &DynamicsParams) -> Result<Self> {
        params.check_known("grid", &["moveset"])?;
        let moveset = match params.id("moveset") {
            Some(id) => MoveSet::parse(id)?,
            None => MoveSet::I4,
        };
        Ok(GridEnv::new(moveset))
    }

    pub fn moveset(&self) -> MoveSet {
        self.moveset
    }

    pub fn params_render(&self) -> String {
        format!("moveset={}", self.moveset)
    }

    pub fn goal(&self) -> StateVec {
        StateVec::from([GRID_MAX, GRID_MAX])
    }

    fn at_goal(&self, s: &StateVec) -> bool {
        s.values()[0] == GRID_MAX && s.values()[1] == GRID_MAX
    }
}

impl Environment for GridEnv {
    fn state_dim(&self) -> usize {
        2
    }

    fn num_actions(&self) -> usize {
        self.moveset.deltas().len()
    }

    fn action_label(&self, a: ActionId) -> String {
        self.moveset.labels()[a.index()].to_string()
    }

    fn transition(&self, s: &StateVec, a: ActionId) -> Result<StateVec> {
        s.check_dim(2)?;
        a.check(self.num_actions())?;
        let (dx, dy) = self.moveset.deltas()[a.index()];
        let x = (s.values()[0] + dx).clamp(0.0, GRID_MAX);
        let y = (s.values()[1] + dy).clamp(0.0, GRID_MAX);
        Ok(StateVec::from([x, y]))
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
        12
    }

    fn is_terminal(&self, s: &StateVec) -> bool {
        self.at_goal(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::step;

    fn s(x: f64, y: f64) -> StateVec {
        StateVec::from([x, y])
    }

    #[test]
    fn unit_cardinal_moves() {
        let env = GridEnv::new(MoveSet::I4);
        assert_eq!(step(&env, &s(0.0, 0.0), ActionId(0)).unwrap(), s(1.0, 0.0));
        assert_eq!(step(&env, &s(2.0, 3.0), ActionId(1)).unwrap(), s(2.0, 4.0));
    }

    #[test]
    fn boundary_clips() {
        let env = GridEnv::new(MoveSet::I4);
        assert_eq!(step(&env, &s(4.0, 4.0), ActionId(0)).unwrap(), s(4.0, 4.0));
        assert_eq!(step(&env, &s(0.0, 0.0), ActionId(2)).unwrap(), s(0.0, 0.0));
    }

    #[test]
    fn jumps_move_two_cells() {
        let env = GridEnv::new(MoveSet::DJ);
        assert_eq!(step(&env, &s(0.0, 0.0), ActionId(0)).unwrap(), s(2.0, 0.0));
        assert_eq!(step(&env, &s(3.0, 0.0), ActionId(0)).unwrap(), s(4.0, 0.0));
    }

    #[test]
    fn action_counts_per_moveset() {
        assert_eq!(GridEnv::new(MoveSet::I4).num_actions(), 4);
        assert_eq!(GridEnv::new(MoveSet::D8).num_actions(), 8);
        assert_eq!(GridEnv::new(MoveSet::DJ).num_actions(), 4);
    }

    #[test]
    fn invalid_inputs_error() {
        let env = GridEnv::new(MoveSet::I4);
        assert!(step(&env, &StateVec::from([0.0]), ActionId(0)).is_err());
        assert!(step(&env, &s(0.0, 0.0), ActionId(4)).is_err());
    }

    #[test]
    fn goal_entry_pays_bonus() {
        let env = GridEnv::new(MoveSet::I4);
        let r = env.reward(&s(4.0, 3.0), ActionId(1), &s(4.0, 4.0)).unwrap();
        assert_eq!(r, 9.0);
        let r = env.reward(&s(2.0, 2.0), ActionId(0), &s(3.0, 2.0)).unwrap();
        assert_eq!(r, -1.0);
    }
}
