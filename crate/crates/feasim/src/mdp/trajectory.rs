use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::state::{StateKey, StateVec};

/// An ordered sequence of states recorded from a demonstrator.
///
/// Actions are never stored: demonstrators may have action spaces that differ
/// from the imitator's, so only the visited states carry over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub demonstrator_id: u64,
    pub trajectory_id: u64,
    pub states: Vec<StateVec>,
}

impl Trajectory {
    pub fn new(demonstrator_id: u64, trajectory_id: u64, states: Vec<StateVec>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::Config(
                "a trajectory needs at least two states".into(),
            ));
        }
        Ok(Trajectory {
            demonstrator_id,
            trajectory_id,
            states,
        })
    }

    /// A trajectory with placeholder ids, as produced by `rollout`.
    pub(crate) fn untagged(states: Vec<StateVec>) -> Self {
        Trajectory {
            demonstrator_id: 0,
            trajectory_id: 0,
            states,
        }
    }

    /// Number of transitions, i.e. `len(states) - 1`.
    pub fn steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn start(&self) -> &StateVec {
        &self.states[0]
    }

    pub fn last(&self) -> &StateVec {
        self.states.last().expect("trajectories are non-empty")
    }
}

/// One state transition with its provenance inside the demo set.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub from: StateVec,
    pub to: StateVec,
    pub trajectory_id: u64,
    pub step_index: usize,
}

/// Every transition of a demonstration set, along with the set of former
/// states (the states one can transition from) and the set of trajectory
/// start states.
#[derive(Debug, Clone)]
pub struct TransitionSet {
    pub transitions: Vec<Transition>,
    pub former_set: Vec<StateVec>,
    pub initial_set: Vec<StateVec>,
}

/// Flattens demonstrations into their transitions.
///
/// `former_set` holds the deduplicated first elements of all transitions and
/// `initial_set` the deduplicated start states of the source trajectories.
/// Trajectory ids must be unique across the input.
pub fn collect_transitions(demos: &[Trajectory]) -> Result<TransitionSet> {
    if demos.is_empty() {
        return Err(Error::EmptyInput("demonstration set"));
    }
    let mut seen_ids = BTreeSet::new();
    for demo in demos {
        if demo.states.len() < 2 {
            return Err(Error::Config(format!(
                "trajectory {} has fewer than two states",
                demo.trajectory_id
            )));
        }
        if !seen_ids.insert(demo.trajectory_id) {
            return Err(Error::Config(format!(
                "duplicate trajectory id {} in demonstration set",
                demo.trajectory_id
            )));
        }
    }

    let eps = 1e-9;
    let mut transitions = Vec::new();
    let mut former_keys: BTreeSet<StateKey> = BTreeSet::new();
    let mut former_set = Vec::new();
    let mut initial_keys: BTreeSet<StateKey> = BTreeSet::new();
    let mut initial_set = Vec::new();

    for demo in demos {
        if initial_keys.insert(demo.start().key(eps)) {
            initial_set.push(demo.start().clone());
        }
        for (i, pair) in demo.states.windows(2).enumerate() {
            if former_keys.insert(pair[0].key(eps)) {
                former_set.push(pair[0].clone());
            }
            transitions.push(Transition {
                from: pair[0].clone(),
                to: pair[1].clone(),
                trajectory_id: demo.trajectory_id,
                step_index: i,
            });
        }
    }

    Ok(TransitionSet {
        transitions,
        former_set,
        initial_set,
    })
}

#[derive(Serialize, Deserialize)]
struct DemoLine {
    demonstrator_id: u64,
    trajectory_id: u64,
    states: Vec<Vec<f64>>,
}

/// Writes demonstrations as JSON Lines, one trajectory per line:
/// `{"demonstrator_id": .., "trajectory_id": .., "states": [[..], ..]}`.
pub fn save_demos_jsonl<P: AsRef<Path>>(path: P, demos: &[Trajectory]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for demo in demos {
        let line = DemoLine {
            demonstrator_id: demo.demonstrator_id,
            trajectory_id: demo.trajectory_id,
            states: demo.states.iter().map(|s| s.0.clone()).collect(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Loads demonstrations from JSON Lines. Rejects any line carrying action
/// data: the corpus format is states-only by contract.
pub fn load_demos_jsonl<P: AsRef<Path>>(path: P) -> Result<Vec<Trajectory>> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut demos = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| Error::MalformedDemo {
                line: lineno + 1,
                msg: e.to_string(),
            })?;
        if let Some(obj) = value.as_object() {
            if obj.contains_key("actions") || obj.contains_key("action") {
                return Err(Error::ActionDataPresent);
            }
        }
        let parsed: DemoLine = serde_json::from_value(value).map_err(|e| Error::MalformedDemo {
            line: lineno + 1,
            msg: e.to_string(),
        })?;
        let states: Result<Vec<StateVec>> = parsed.states.into_iter().map(StateVec::new).collect();
        demos.push(Trajectory::new(
            parsed.demonstrator_id,
            parsed.trajectory_id,
            states?,
        )?);
    }
    Ok(demos)
}
