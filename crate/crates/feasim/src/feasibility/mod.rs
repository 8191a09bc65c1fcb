//! Feasibility scores and everything derived from them.
//!
//! A trajectory's raw score is the discounted tracking penalty collected by
//! the solved tracking policy: `-sum_{t>=1} gamma_f^t * dist(s_t, s^d_t)`,
//! where `s_t` is the state the imitator reaches at step t while tracking the
//! demonstration. Feasible demonstrations score exactly zero; the score grows
//! more negative the further the imitator's best effort diverges.
//!
//! Raw scores map to weights `w = exp((raw - C) / sigma)` in (0, 1]. `C`
//! defaults to the maximal raw score over the demo set so the best
//! demonstration gets weight 1; `sigma` controls how quickly weight decays
//! and defaults to a rule that pins the worst demonstration at 0.01.
//!
//! Weights are shared per trajectory: every transition of a trajectory
//! carries its trajectory's weight, so a trajectory is only learned from
//! when it is helpful in all parts. The per-transition sampling distribution
//! `p_w` is the normalized weight; the per-demonstrator distribution `p_j`
//! normalizes mean feasibility across demonstrators and drives budgeted
//! demonstration acquisition.

mod stochastic;

pub use stochastic::{feasibility_stochastic, ActionNoise, StochasticDynamics};

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmdp::{FMdp, FmdpVariant};
use crate::mdp::{
    collect_transitions, distance, rollout, Environment, Policy, Trajectory, Transition,
};
use crate::rng::seeded_rng;

/// Raw discounted tracking penalty of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct RawScore {
    pub demonstrator_id: u64,
    pub trajectory_id: u64,
    pub raw_reward: f64,
}

/// A trajectory's score after the weight transform.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityRecord {
    pub demonstrator_id: u64,
    pub trajectory_id: u64,
    /// Discounted tracking penalty, always <= 0.
    pub raw_reward: f64,
    /// `raw_reward - C`.
    pub shifted_reward: f64,
    /// `exp(shifted_reward / sigma)`, in (0, 1].
    pub weight: f64,
}

/// Scoring knobs.
///
/// `sigma = None` resolves to `(C - min raw) / ln(100)` so the worst
/// demonstration receives weight 0.01, falling back to 1.0 when all raw
/// scores are equal. `c = None` uses the maximal raw score over the set,
/// which pins the maximal weight at exactly 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoreConfig {
    pub gamma_f: f64,
    pub sigma: Option<f64>,
    pub c: Option<f64>,
    /// Rollouts per trajectory for the stochastic estimator.
    pub mc_rollouts: usize,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            gamma_f: 0.9,
            sigma: None,
            c: None,
            mc_rollouts: 1,
        }
    }
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_f > 0.0 && self.gamma_f <= 1.0) {
            return Err(Error::Config("gamma_f must be in (0, 1]".into()));
        }
        if let Some(sigma) = self.sigma {
            if sigma <= 0.0 || sigma.is_nan() {
                return Err(Error::Config("sigma must be positive".into()));
            }
        }
        if self.mc_rollouts == 0 {
            return Err(Error::Config("mc_rollouts must be >= 1".into()));
        }
        Ok(())
    }

    /// Canonical rendering for cache keys.
    pub fn render(&self) -> String {
        format!(
            "gamma_f={};sigma={};c={};mc={}",
            self.gamma_f,
            self.sigma.map_or("auto".into(), |v| v.to_string()),
            self.c.map_or("max".into(), |v| v.to_string()),
            self.mc_rollouts
        )
    }
}

/// Scores one tracked demonstration by rolling the solved policy greedily
/// from the demonstration's start and summing the discounted distances
/// between the states reached and the demonstration's states at equal
/// indices (from index 1; index 0 matches by construction).
pub fn score_trajectory<E: Environment, P: Policy + ?Sized>(
    policy: &P,
    fmdp: &FMdp<E>,
    xi: &Trajectory,
) -> Result<f64> {
    if fmdp.variant() != FmdpVariant::Trajectory {
        return Err(Error::Config(
            "scoring requires a trajectory-variant f-MDP".into(),
        ));
    }
    let start = fmdp.start_of(xi.demonstrator_id, xi.trajectory_id)?;
    if fmdp.track_len_of(&start)? != xi.states.len() {
        return Err(Error::UnknownTrajectory {
            demonstrator_id: xi.demonstrator_id,
            trajectory_id: xi.trajectory_id,
        });
    }
    let out = rollout(fmdp, policy, &start, fmdp.horizon())?;
    debug_assert_eq!(out.trajectory.states.len(), xi.states.len());
    let gamma_f = fmdp.gamma_f();
    let metric = fmdp.metric();
    let mut total = 0.0;
    let mut disc = 1.0;
    for (t, aug) in out.trajectory.states.iter().enumerate().skip(1) {
        disc *= gamma_f;
        let reached = fmdp.project(aug)?;
        total -= disc * distance(metric, &reached, &xi.states[t])?;
    }
    Ok(total)
}

/// Applies the weight transform to a set of raw scores.
pub fn feasibility(raws: &[RawScore], config: &ScoreConfig) -> Result<Vec<FeasibilityRecord>> {
    config.validate()?;
    if raws.is_empty() {
        return Err(Error::EmptyInput("raw scores"));
    }
    let mut max_raw = f64::NEG_INFINITY;
    let mut min_raw = f64::INFINITY;
    for r in raws {
        if r.raw_reward > 1e-12 {
            return Err(Error::Config(format!(
                "raw reward {} for trajectory {} is positive; tracking penalties are <= 0",
                r.raw_reward, r.trajectory_id
            )));
        }
        max_raw = max_raw.max(r.raw_reward.min(0.0));
        min_raw = min_raw.min(r.raw_reward.min(0.0));
    }
    let c = match config.c {
        Some(c) => {
            if c + 1e-12 < max_raw {
                return Err(Error::Config(format!(
                    "explicit C={c} is below the maximal raw reward {max_raw}; weights would exceed 1"
                )));
            }
            c
        }
        None => max_raw,
    };
    let sigma = match config.sigma {
        Some(sigma) => sigma,
        None => {
            let span = c - min_raw;
            if span > 0.0 {
                span / 100.0f64.ln()
            } else {
                1.0
            }
        }
    };
    Ok(raws
        .iter()
        .map(|r| {
            let raw = r.raw_reward.min(0.0);
            let shifted = raw - c;
            FeasibilityRecord {
                demonstrator_id: r.demonstrator_id,
                trajectory_id: r.trajectory_id,
                raw_reward: raw,
                shifted_reward: shifted,
                weight: (shifted / sigma).exp(),
            }
        })
        .collect())
}

/// One demonstration transition with its trajectory's weight and sampling
/// probability.
#[derive(Debug, Clone)]
pub struct WeightedEntry {
    pub transition: Transition,
    pub demonstrator_id: u64,
    pub weight: f64,
    pub probability: f64,
}

/// All demonstration transitions with the normalized sampling distribution.
#[derive(Debug, Clone)]
pub struct WeightedTransitionSet {
    pub entries: Vec<WeightedEntry>,
    cumulative: Vec<f64>,
}

impl WeightedTransitionSet {
    fn build(entries: Vec<WeightedEntry>) -> Self {
        let mut cumulative = Vec::with_capacity(entries.len());
        let mut acc = 0.0;
        for e in &entries {
            acc += e.probability;
            cumulative.push(acc);
        }
        WeightedTransitionSet {
            entries,
            cumulative,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Samples an entry according to the distribution.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> &WeightedEntry {
        let u: f64 = rng.gen();
        let idx = match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&u).expect("finite probabilities"))
        {
            Ok(i) => (i + 1).min(self.entries.len() - 1),
            Err(i) => i.min(self.entries.len() - 1),
        };
        &self.entries[idx]
    }

    /// Per-trajectory sampling probability (shared by all its transitions).
    pub fn trajectory_probability(&self, trajectory_id: u64) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.transition.trajectory_id == trajectory_id)
            .map(|e| e.probability)
    }
}

/// Builds the per-transition sampling distribution: each transition's
/// probability is proportional to its trajectory's weight.
pub fn transition_sampling_distribution(
    demos: &[Trajectory],
    records: &[FeasibilityRecord],
) -> Result<WeightedTransitionSet> {
    let by_traj: BTreeMap<u64, &FeasibilityRecord> =
        records.iter().map(|r| (r.trajectory_id, r)).collect();
    let set = collect_transitions(demos)?;
    let mut entries = Vec::with_capacity(set.transitions.len());
    let mut total = 0.0;
    for transition in set.transitions {
        let record = by_traj.get(&transition.trajectory_id).ok_or_else(|| {
            Error::Config(format!(
                "trajectory {} has no feasibility record",
                transition.trajectory_id
            ))
        })?;
        total += record.weight;
        entries.push(WeightedEntry {
            demonstrator_id: record.demonstrator_id,
            weight: record.weight,
            probability: 0.0,
            transition,
        });
    }
    if total <= 0.0 {
        return Err(Error::DegenerateDistribution);
    }
    for e in &mut entries {
        e.probability = e.weight / total;
    }
    Ok(WeightedTransitionSet::build(entries))
}

/// Mean feasibility of one demonstrator and its share of the acquisition
/// distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DemonstratorProfile {
    pub demonstrator_id: u64,
    pub n_demos: usize,
    pub mean_feasibility: f64,
    pub p_j: f64,
}

/// Groups records by demonstrator and normalizes mean feasibility into the
/// acquisition distribution `p_j`. Output is sorted by demonstrator id.
pub fn demonstrator_distribution(
    records: &[FeasibilityRecord],
) -> Result<Vec<DemonstratorProfile>> {
    if records.is_empty() {
        return Err(Error::EmptyInput("feasibility records"));
    }
    let mut grouped: BTreeMap<u64, (usize, f64)> = BTreeMap::new();
    for r in records {
        let slot = grouped.entry(r.demonstrator_id).or_insert((0, 0.0));
        slot.0 += 1;
        slot.1 += r.weight;
    }
    let mut profiles: Vec<DemonstratorProfile> = grouped
        .into_iter()
        .map(|(id, (n, sum))| DemonstratorProfile {
            demonstrator_id: id,
            n_demos: n,
            mean_feasibility: sum / n as f64,
            p_j: 0.0,
        })
        .collect();
    let total: f64 = profiles.iter().map(|p| p.mean_feasibility).sum();
    if total <= 0.0 {
        return Err(Error::DegenerateDistribution);
    }
    for p in &mut profiles {
        p.p_j = p.mean_feasibility / total;
    }
    Ok(profiles)
}

/// Draws `budget` independent demonstrator queries from `p_j` and returns
/// the per-demonstrator counts (sorted by demonstrator id). Deterministic
/// given the seed.
pub fn budget_sample(
    profiles: &[DemonstratorProfile],
    budget: usize,
    seed: u64,
) -> Result<Vec<(u64, usize)>> {
    if profiles.is_empty() {
        return Err(Error::EmptyInput("demonstrator profiles"));
    }
    let mut counts: Vec<(u64, usize)> = profiles.iter().map(|p| (p.demonstrator_id, 0)).collect();
    let mut rng = seeded_rng(seed, "budget", 0);
    for _ in 0..budget {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = counts.len() - 1;
        for (i, p) in profiles.iter().enumerate() {
            acc += p.p_j;
            if u < acc {
                chosen = i;
                break;
            }
        }
        counts[chosen].1 += 1;
    }
    Ok(counts)
}

/// Writes per-trajectory scores as CSV:
/// `trajectory_id,demonstrator_id,raw_reward,w,p_w`, sorted by trajectory id.
pub fn write_scores_csv<P: AsRef<Path>>(
    path: P,
    records: &[FeasibilityRecord],
    weighted: &WeightedTransitionSet,
) -> Result<()> {
    let mut rows: Vec<&FeasibilityRecord> = records.iter().collect();
    rows.sort_by_key(|r| r.trajectory_id);
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "trajectory_id,demonstrator_id,raw_reward,w,p_w")?;
    for r in rows {
        let p_w = weighted
            .trajectory_probability(r.trajectory_id)
            .unwrap_or(0.0);
        writeln!(
            out,
            "{},{},{},{},{}",
            r.trajectory_id, r.demonstrator_id, r.raw_reward, r.weight, p_w
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Writes demonstrator profiles as CSV:
/// `demonstrator_id,mean_feasibility,p_j`, sorted by demonstrator id.
pub fn write_profiles_csv<P: AsRef<Path>>(path: P, profiles: &[DemonstratorProfile]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "demonstrator_id,mean_feasibility,p_j")?;
    for p in profiles {
        writeln!(
            out,
            "{},{},{}",
            p.demonstrator_id, p.mean_feasibility, p.p_j
        )?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests;
