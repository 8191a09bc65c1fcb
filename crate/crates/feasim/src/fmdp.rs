//! The tracking MDP built from a demonstration set and the imitator's
//! environment.
//!
//! Its state is the imitator's state augmented with the tracked
//! demonstration and the time index; its actions and transitions are exactly
//! the imitator's; its reward is the negative distance between the state the
//! imitator reached and the state the demonstration reaches next. An optimal
//! policy therefore follows each demonstration as closely as the imitator's
//! dynamics allow, and the reward it collects measures how feasible the
//! demonstration is.
//!
//! Two variants:
//! - **trajectory**: one episode per demonstration, starting at the
//!   demonstration's start state and running to its end. This is the variant
//!   feasibility scores are computed from.
//! - **one-step**: one episode per demonstration transition, starting at the
//!   transition's former state and lasting a single step. It assumes the
//!   imitator can visit every former state, which cross-dynamics
//!   demonstrations can violate; it is kept as a cheap cross-check.
//!
//! The augmentation makes the tracking reward well defined even when two
//! demonstrations share states: the tracked demonstration and step are part
//! of the state, not ambient context. Initial episodes draw uniformly over
//! tracks (demonstrations or transitions), so duplicate start states stay
//! unambiguous.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::mdp::{distance, ActionId, Environment, Metric, StateVec, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmdpVariant {
    OneStep,
    Trajectory,
}

/// Decoded augmented state.
#[derive(Debug, Clone, PartialEq)]
pub struct FMdpState {
    pub imitator_state: StateVec,
    pub demonstrator_id: u64,
    pub trajectory_id: u64,
    /// Time index into the tracked state sequence; terminal at the last one.
    pub t: usize,
}

/// A tracked state sequence: a full demonstration (trajectory variant) or a
/// two-state window (one-step variant).
#[derive(Debug, Clone)]
struct Track {
    states: Vec<StateVec>,
    demonstrator_id: u64,
    trajectory_id: u64,
}

/// The tracking MDP. Implements [`Environment`], so rollouts and solvers
/// apply unchanged.
#[derive(Debug, Clone)]
pub struct FMdp<E: Environment> {
    variant: FmdpVariant,
    imitator_env: E,
    metric: Metric,
    gamma_f: f64,
    tracks: Vec<Track>,
    initial: Vec<StateVec>,
    max_len: usize,
    by_traj: HashMap<(u64, u64), usize>,
    base_dim: usize,
}

/// Builds the one-step variant: one single-step episode per demonstration
/// transition, rewarded by how closely one imitator action reproduces it.
pub fn build_onestep_fmdp<E: Environment>(
    demos: &[Trajectory],
    imitator_env: E,
    metric: Metric,
) -> Result<FMdp<E>> {
    let mut tracks = Vec::new();
    for demo in validated(demos, &imitator_env)? {
        for pair in demo.states.windows(2) {
            tracks.push(Track {
                states: vec![pair[0].clone(), pair[1].clone()],
                demonstrator_id: demo.demonstrator_id,
                trajectory_id: demo.trajectory_id,
            });
        }
    }
    FMdp::assemble(FmdpVariant::OneStep, imitator_env, metric, 1.0, tracks)
}

/// Builds the trajectory variant: one episode per demonstration, starting at
/// the demonstration's own start state and running to its horizon.
pub fn build_trajectory_fmdp<E: Environment>(
    demos: &[Trajectory],
    imitator_env: E,
    metric: Metric,
    gamma_f: f64,
) -> Result<FMdp<E>> {
    if !(gamma_f > 0.0 && gamma_f <= 1.0) {
        return Err(Error::Config("gamma_f must be in (0, 1]".into()));
    }
    let tracks = validated(demos, &imitator_env)?
        .iter()
        .map(|demo| Track {
            states: demo.states.clone(),
            demonstrator_id: demo.demonstrator_id,
            trajectory_id: demo.trajectory_id,
        })
        .collect();
    FMdp::assemble(
        FmdpVariant::Trajectory,
        imitator_env,
        metric,
        gamma_f,
        tracks,
    )
}

fn validated<'d, E: Environment>(demos: &'d [Trajectory], env: &E) -> Result<&'d [Trajectory]> {
    if demos.is_empty() {
        return Err(Error::EmptyInput("demonstration set"));
    }
    for demo in demos {
        for s in &demo.states {
            s.check_dim(env.state_dim())?;
        }
    }
    Ok(demos)
}

impl<E: Environment> FMdp<E> {
    fn assemble(
        variant: FmdpVariant,
        imitator_env: E,
        metric: Metric,
        gamma_f: f64,
        tracks: Vec<Track>,
    ) -> Result<Self> {
        let base_dim = imitator_env.state_dim();
        let max_len = tracks.iter().map(|t| t.states.len()).max().unwrap_or(2);
        let mut by_traj = HashMap::new();
        if variant == FmdpVariant::Trajectory {
            for (slot, track) in tracks.iter().enumerate() {
                by_traj.insert((track.demonstrator_id, track.trajectory_id), slot);
            }
        }
        let mut fmdp = FMdp {
            variant,
            imitator_env,
            metric,
            gamma_f,
            tracks,
            initial: Vec::new(),
            max_len,
            by_traj,
            base_dim,
        };
        fmdp.initial = (0..fmdp.tracks.len())
            .map(|slot| fmdp.encode(&fmdp.tracks[slot].states[0], slot, 0))
            .collect();
        Ok(fmdp)
    }

    pub fn variant(&self) -> FmdpVariant {
        self.variant
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn gamma_f(&self) -> f64 {
        self.gamma_f
    }

    pub fn imitator_env(&self) -> &E {
        &self.imitator_env
    }

    pub fn num_tracks(&self) -> usize {
        self.tracks.len()
    }

    fn encode(&self, base: &StateVec, slot: usize, t: usize) -> StateVec {
        let mut coords = base.values().to_vec();
        coords.push(slot as f64);
        coords.push(t as f64);
        StateVec(coords)
    }

    fn decode<'s>(&self, aug: &'s StateVec) -> Result<(&'s [f64], usize, usize)> {
        aug.check_dim(self.base_dim + 2)?;
        let coords = aug.values();
        let slot = coords[self.base_dim].round() as usize;
        let t = coords[self.base_dim + 1].round() as usize;
        if slot >= self.tracks.len() || t >= self.tracks[slot].states.len() {
            return Err(Error::Config(format!(
                "augmented state refers to track {slot} step {t}, which does not exist"
            )));
        }
        Ok((&coords[..self.base_dim], slot, t))
    }

    /// Splits an augmented state into its parts.
    pub fn state_info(&self, aug: &StateVec) -> Result<FMdpState> {
        let (base, slot, t) = self.decode(aug)?;
        Ok(FMdpState {
            imitator_state: StateVec(base.to_vec()),
            demonstrator_id: self.tracks[slot].demonstrator_id,
            trajectory_id: self.tracks[slot].trajectory_id,
            t,
        })
    }

    /// The imitator-state component of an augmented state.
    pub fn project(&self, aug: &StateVec) -> Result<StateVec> {
        let (base, _, _) = self.decode(aug)?;
        Ok(StateVec(base.to_vec()))
    }

    /// The augmented start state tracking a given demonstration
    /// (trajectory variant only).
    pub fn start_of(&self, demonstrator_id: u64, trajectory_id: u64) -> Result<StateVec> {
        let slot = *self.by_traj.get(&(demonstrator_id, trajectory_id)).ok_or(
            Error::UnknownTrajectory {
                demonstrator_id,
                trajectory_id,
            },
        )?;
        Ok(self.encode(&self.tracks[slot].states[0], slot, 0))
    }

    /// Length (state count) of the tracked sequence behind an augmented state.
    pub fn track_len_of(&self, aug: &StateVec) -> Result<usize> {
        let (_, slot, _) = self.decode(aug)?;
        Ok(self.tracks[slot].states.len())
    }

    /// Tracked target state at index `t` for the track behind `aug`.
    pub fn target_at(&self, aug: &StateVec, t: usize) -> Result<&StateVec> {
        let (_, slot, _) = self.decode(aug)?;
        self.tracks[slot]
            .states
            .get(t)
            .ok_or_else(|| Error::Config(format!("track has no step {t}")))
    }

    /// Advances an augmented state with a caller-supplied stepper for the
    /// imitator component; stochastic adapters plug their samplers in here.
    /// Terminal states absorb.
    pub fn step_with<F>(&self, s: &StateVec, a: ActionId, step_fn: F) -> Result<StateVec>
    where
        F: FnOnce(&StateVec, ActionId) -> Result<StateVec>,
    {
        let (base, slot, t) = self.decode(s)?;
        if t + 1 >= self.tracks[slot].states.len() {
            return Ok(s.clone());
        }
        let base_state = StateVec(base.to_vec());
        let next = step_fn(&base_state, a)?;
        next.check_dim(self.base_dim)?;
        Ok(self.encode(&next, slot, t + 1))
    }
}

impl<E: Environment> Environment for FMdp<E> {
    fn state_dim(&self) -> usize {
        self.base_dim + 2
    }

    fn num_actions(&self) -> usize {
        self.imitator_env.num_actions()
    }

    fn action_label(&self, a: ActionId) -> String {
        self.imitator_env.action_label(a)
    }

    fn transition(&self, s: &StateVec, a: ActionId) -> Result<StateVec> {
        self.step_with(s, a, |base, action| {
            self.imitator_env.transition(base, action)
        })
    }

    fn reward(&self, s: &StateVec, _a: ActionId, next: &StateVec) -> Result<f64> {
        let (_, slot, t) = self.decode(s)?;
        if t + 1 >= self.tracks[slot].states.len() {
            return Ok(0.0);
        }
        let (next_base, next_slot, next_t) = self.decode(next)?;
        debug_assert_eq!(slot, next_slot);
        let target = &self.tracks[next_slot].states[next_t];
        let reached = StateVec(next_base.to_vec());
        Ok(-distance(self.metric, &reached, target)?)
    }

    fn initial_states(&self) -> &[StateVec] {
        &self.initial
    }

    fn gamma(&self) -> f64 {
        self.gamma_f
    }

    fn horizon(&self) -> usize {
        self.max_len - 1
    }

    fn is_terminal(&self, s: &StateVec) -> bool {
        match self.decode(s) {
            Ok((_, slot, t)) => t + 1 >= self.tracks[slot].states.len(),
            Err(_) => true,
        }
    }

    fn quantization_eps(&self) -> f64 {
        self.imitator_env.quantization_eps()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{GridEnv, MoveSet};
    use crate::mdp::rollout;
    use crate::solver::value_iteration;

    fn traj(demonstrator: u64, id: u64, pts: &[[f64; 2]]) -> Trajectory {
        Trajectory::new(
            demonstrator,
            id,
            pts.iter().map(|p| StateVec::from(*p)).collect(),
        )
        .unwrap()
    }

    fn diag_demo() -> Trajectory {
        traj(
            1,
            0,
            &[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [4.0, 4.0]],
        )
    }

    #[test]
    fn onestep_value_is_best_single_step_reward() {
        let env = GridEnv::new(MoveSet::I4);
        // Infeasible diagonal transition: best effort is distance 1.
        let demos = vec![traj(0, 0, &[[0.0, 0.0], [1.0, 1.0]])];
        let fmdp = build_onestep_fmdp(&demos, env.clone(), Metric::L2).unwrap();
        let solution = value_iteration(&fmdp, 1e-12, 10_000).unwrap();
        let v = solution.value(&fmdp.initial_states()[0]).unwrap();
        assert!((v - (-1.0)).abs() < 1e-12);

        // Feasible unit move: exact match, reward zero.
        let demos = vec![traj(0, 0, &[[0.0, 0.0], [1.0, 0.0]])];
        let fmdp = build_onestep_fmdp(&demos, env.clone(), Metric::L2).unwrap();
        let solution = value_iteration(&fmdp, 1e-12, 10_000).unwrap();
        assert_eq!(solution.value(&fmdp.initial_states()[0]).unwrap(), 0.0);

        // The jump move set reproduces a two-cell hop exactly.
        let demos = vec![traj(0, 0, &[[0.0, 0.0], [2.0, 0.0]])];
        let fmdp = build_onestep_fmdp(&demos, GridEnv::new(MoveSet::DJ), Metric::L2).unwrap();
        let solution = value_iteration(&fmdp, 1e-12, 10_000).unwrap();
        assert_eq!(solution.value(&fmdp.initial_states()[0]).unwrap(), 0.0);
    }

    #[test]
    fn onestep_initial_states_cover_every_transition() {
        let env = GridEnv::new(MoveSet::I4);
        // Two demos sharing a former state still get separate episodes.
        let demos = vec![
            traj(0, 0, &[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]),
            traj(0, 1, &[[0.0, 0.0], [0.0, 1.0]]),
        ];
        let fmdp = build_onestep_fmdp(&demos, env, Metric::L2).unwrap();
        assert_eq!(fmdp.initial_states().len(), 3);
        assert_eq!(fmdp.num_tracks(), 3);
    }

    #[test]
    fn trajectory_fmdp_tracks_to_the_demo_horizon() {
        let env = GridEnv::new(MoveSet::I4);
        let fmdp = build_trajectory_fmdp(&[diag_demo()], env, Metric::L2, 0.9).unwrap();
        assert_eq!(fmdp.horizon(), 4);
        let start = fmdp.start_of(1, 0).unwrap();
        assert_eq!(start, StateVec::from([0.0, 0.0, 0.0, 0.0]));
        assert!(!fmdp.is_terminal(&start));
    }

    #[test]
    fn diagonal_demo_value_matches_the_hand_bound() {
        // Tracking the diagonal under cardinal moves: per-step the reachable
        // set satisfies x+y <= t, and the path (1,0),(1,1),(2,1),(2,2)
        // achieves the bound at every step, so the optimal distance sequence
        // is (1, sqrt(2), sqrt(5), 2*sqrt(2)).
        let env = GridEnv::new(MoveSet::I4);
        let fmdp = build_trajectory_fmdp(&[diag_demo()], env, Metric::L2, 0.9).unwrap();
        let solution = value_iteration(&fmdp, 1e-12, 10_000).unwrap();
        let expected =
            -(1.0 + 0.9 * 2.0f64.sqrt() + 0.81 * 5.0f64.sqrt() + 0.729 * 2.0 * 2.0f64.sqrt());
        let v = solution.value(&fmdp.start_of(1, 0).unwrap()).unwrap();
        assert!((v - expected).abs() < 1e-9, "v={v}, expected={expected}");
    }

    #[test]
    fn feasible_demo_has_zero_optimal_value() {
        let env = GridEnv::new(MoveSet::I4);
        let demo = traj(0, 0, &[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [2.0, 1.0]]);
        let fmdp = build_trajectory_fmdp(&[demo], env, Metric::L2, 0.9).unwrap();
        let solution = value_iteration(&fmdp, 1e-12, 10_000).unwrap();
        assert_eq!(solution.value(&fmdp.start_of(0, 0).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn rewards_are_never_positive() {
        let env = GridEnv::new(MoveSet::D8);
        let fmdp = build_trajectory_fmdp(&[diag_demo()], env, Metric::L2, 0.9).unwrap();
        let mut stack = fmdp.initial_states().to_vec();
        let mut seen = std::collections::BTreeSet::new();
        while let Some(s) = stack.pop() {
            if !seen.insert(s.key(1e-9)) || fmdp.is_terminal(&s) {
                continue;
            }
            for a in 0..fmdp.num_actions() {
                let next = fmdp.transition(&s, ActionId(a)).unwrap();
                let r = fmdp.reward(&s, ActionId(a), &next).unwrap();
                assert!(r <= 0.0);
                stack.push(next);
            }
        }
    }

    #[test]
    fn projected_rollout_is_a_valid_imitator_rollout() {
        let env = GridEnv::new(MoveSet::I4);
        let fmdp = build_trajectory_fmdp(&[diag_demo()], env.clone(), Metric::L2, 0.9).unwrap();
        let solution = value_iteration(&fmdp, 1e-12, 10_000).unwrap();
        let start = fmdp.start_of(1, 0).unwrap();
        let out = rollout(&fmdp, &solution.policy, &start, fmdp.horizon()).unwrap();
        // Replaying the same actions in the imitator environment visits the
        // projected states.
        let mut s = fmdp.project(&start).unwrap();
        for (aug, a) in out.trajectory.states.iter().skip(1).zip(&out.actions) {
            let next = crate::mdp::step(&env, &s, *a).unwrap();
            assert_eq!(next, fmdp.project(aug).unwrap());
            s = next;
        }
    }

    #[test]
    fn unknown_trajectory_lookup_fails() {
        let env = GridEnv::new(MoveSet::I4);
        let fmdp = build_trajectory_fmdp(&[diag_demo()], env, Metric::L2, 0.9).unwrap();
        assert!(matches!(
            fmdp.start_of(1, 99),
            Err(Error::UnknownTrajectory { .. })
        ));
    }

    #[test]
    fn cosine_metric_with_a_zero_state_surfaces_the_distance_error() {
        // The tracking rollout passes through the origin, where the cosine
        // distance is undefined; the solve must fail with that error rather
        // than fabricate a reward.
        let env = GridEnv::new(MoveSet::I4);
        let fmdp = build_trajectory_fmdp(&[diag_demo()], env, Metric::Cosine, 0.9).unwrap();
        assert!(matches!(
            value_iteration(&fmdp, 1e-12, 10_000),
            Err(Error::UndefinedCosine)
        ));
    }

    #[test]
    fn empty_demo_set_is_rejected() {
        let env = GridEnv::new(MoveSet::I4);
        assert!(matches!(
            build_trajectory_fmdp(&[], env, Metric::L2, 0.9),
            Err(Error::EmptyInput(_))
        ));
    }
}
