use crate::envs::params::DynamicsParams;
use crate::error::Result;
use crate::mdp::{ActionId, Environment, StateVec};

/// 20x7 board with a pocket-shaped wall straddling the straight line from
/// start to goal.
///
/// Start (0,3), goal (19,3). The wall occupies rows y=2 and y=4 for x from
/// 3 through 9 plus the cell (9,3), leaving a dead-end corridor
/// (3,3)..(8,3) that opens only to the west. Reward -1 per step, +10 on
/// entering the goal; horizon 26.
///
/// Knobs:
/// - `max_step` (integer >= 1, default 1): moves go 1..=max_step cells in one
///   of eight directions. A grounded agent sweeps cell by cell and stops in
///   front of walls and board edges.
/// - `fly` (0 or 1, default 0): a flying agent ignores walls entirely and
///   clips only at the board edges.
#[derive(Debug, Clone)]
pub struct PointMassEnv {
    max_step: usize,
    fly: bool,
    actions: Vec<(f64, f64, usize)>,
    labels: Vec<String>,
    initial: Vec<StateVec>,
}

const WIDTH: f64 = 19.0;
const HEIGHT: f64 = 6.0;
const STEP_REWARD: f64 = -1.0;
const GOAL_BONUS: f64 = 10.0;

const DIRS: [(f64, f64, &str); 8] = [
    (1.0, 0.0, "E"),
    (0.0, 1.0, "N"),
    (-1.0, 0.0, "W"),
    (0.0, -1.0, "S"),
    (1.0, 1.0, "NE"),
    (-1.0, 1.0, "NW"),
    (-1.0, -1.0, "SW"),
    (1.0, -1.0, "SE"),
];

fn is_wall(x: f64, y: f64) -> bool {
    let inside_band = (3.0..=9.0).contains(&x);
    (inside_band && (y == 2.0 || y == 4.0)) || (x == 9.0 && y == 3.0)
}

impl PointMassEnv {
    pub fn new(max_step: usize, fly: bool) -> Self {
        let mut actions = Vec::new();
        let mut labels = Vec::new();
        for len in 1..=max_step {
            for (dx, dy, name) in DIRS {
                actions.push((dx, dy, len));
                labels.push(if len == 1 {
                    name.to_string()
                } else {
                    format!("{name}{len}")
                });
            }
        }
        PointMassEnv {
            max_step,
            fly,
            actions,
            labels,
            initial: vec![StateVec::from([0.0, 3.0])],
        }
    }

    pub fn from_params(params: &DynamicsParams) -> Result<Self> {
        params.check_known("pointmass", &["max_step", "fly"])?;
        let max_step = params.num("max_step").unwrap_or(1.0);
        if max_step < 1.0 || max_step.fract() != 0.0 {
            return Err(crate::error::Error::Config(
                "max_step must be a positive integer".into(),
            ));
        }
        let fly = params.num("fly").unwrap_or(0.0);
        if fly != 0.0 && fly != 1.0 {
            return Err(crate::error::Error::Config("fly must be 0 or 1".into()));
        }
        let fly = fly == 1.0;
        Ok(PointMassEnv::new(max_step as usize, fly))
    }

    pub fn params_render(&self) -> String {
        format!("fly={},max_step={}", u8::from(self.fly), self.max_step)
    }

    pub fn goal(&self) -> StateVec {
        StateVec::from([WIDTH, 3.0])
    }

    pub fn wall_cells() -> Vec<(f64, f64)> {
        let mut cells = Vec::new();
        for x in 3..=9 {
            cells.push((x as f64, 2.0));
            cells.push((x as f64, 4.0));
        }
        cells.push((9.0, 3.0));
        cells
    }

    fn at_goal(&self, s: &StateVec) -> bool {
        s.values()[0] == WIDTH && s.values()[1] == 3.0
    }
}

impl Environment for PointMassEnv {
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
        let (dx, dy, len) = self.actions[a.index()];
        if self.fly {
            let x = (s.values()[0] + dx * len as f64).clamp(0.0, WIDTH);
            let y = (s.values()[1] + dy * len as f64).clamp(0.0, HEIGHT);
            return Ok(StateVec::from([x, y]));
        }
        // Grounded: advance one cell at a time, stopping at walls and edges.
        let mut x = s.values()[0];
        let mut y = s.values()[1];
        for _ in 0..len {
            let nx = (x + dx).clamp(0.0, WIDTH);
            let ny = (y + dy).clamp(0.0, HEIGHT);
            if (nx == x && ny == y) || is_wall(nx, ny) {
                break;
            }
            x = nx;
            y = ny;
        }
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
        26
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
    fn grounded_agent_is_blocked_by_walls() {
        let env = PointMassEnv::new(1, false);
        // Moving north from (3,3) into the wall row stays put.
        assert_eq!(step(&env, &s(3.0, 3.0), ActionId(1)).unwrap(), s(3.0, 3.0));
        // Moving east inside the corridor works until the end cap.
        assert_eq!(step(&env, &s(7.0, 3.0), ActionId(0)).unwrap(), s(8.0, 3.0));
        assert_eq!(step(&env, &s(8.0, 3.0), ActionId(0)).unwrap(), s(8.0, 3.0));
    }

    #[test]
    fn flying_agent_ignores_walls() {
        let env = PointMassEnv::new(1, true);
        assert_eq!(step(&env, &s(8.0, 3.0), ActionId(0)).unwrap(), s(9.0, 3.0));
        assert_eq!(step(&env, &s(3.0, 3.0), ActionId(1)).unwrap(), s(3.0, 4.0));
    }

    #[test]
    fn long_steps_sweep_and_stop_early() {
        let env = PointMassEnv::new(2, false);
        // Action table: 8 unit moves then 8 double moves.
        assert_eq!(env.num_actions(), 16);
        let east2 = ActionId(8);
        assert_eq!(step(&env, &s(0.0, 0.0), east2).unwrap(), s(2.0, 0.0));
        // Double move toward the wall stops in front of it.
        assert_eq!(step(&env, &s(1.0, 2.0), east2).unwrap(), s(2.0, 2.0));
    }

    #[test]
    fn board_edges_clip() {
        let env = PointMassEnv::new(1, false);
        assert_eq!(step(&env, &s(0.0, 6.0), ActionId(1)).unwrap(), s(0.0, 6.0));
        assert_eq!(
            step(&env, &s(19.0, 3.0), ActionId(0)).unwrap(),
            s(19.0, 3.0)
        );
    }
}
