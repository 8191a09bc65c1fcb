use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mdp::{ActionId, Policy, StateKey, StateVec};

/// A deterministic state-to-action table over quantized states.
///
/// Solvers fill it with the greedy action per state, breaking value ties by
/// lowest action index. Lookups of states without an entry fail with a
/// missing-entry error; total policies are built on top (see the imitation
/// module's fallback rule).
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPolicy {
    eps: f64,
    table: BTreeMap<StateKey, ActionId>,
}

impl TabularPolicy {
    pub fn new(eps: f64) -> Self {
        TabularPolicy {
            eps,
            table: BTreeMap::new(),
        }
    }

    pub fn quantization_eps(&self) -> f64 {
        self.eps
    }

    pub fn insert(&mut self, state: &StateVec, action: ActionId) {
        self.table.insert(state.key(self.eps), action);
    }

    pub fn get(&self, state: &StateVec) -> Option<ActionId> {
        self.table.get(&state.key(self.eps)).copied()
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Iterates entries in key order.
    pub fn entries(&self) -> impl Iterator<Item = (&StateKey, ActionId)> {
        self.table.iter().map(|(k, a)| (k, *a))
    }

    /// Serializes as a JSON object mapping rendered state keys to action
    /// indices. Keys are sorted, so the output is byte-stable.
    pub fn to_json(&self) -> Result<String> {
        let entries: BTreeMap<String, usize> = self
            .table
            .iter()
            .map(|(k, a)| (k.render(), a.index()))
            .collect();
        let doc = serde_json::json!({
            "quantization_eps": self.eps,
            "actions": entries,
        });
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: serde_json::Value = serde_json::from_str(text)?;
        let eps = doc
            .get("quantization_eps")
            .and_then(|v| v.as_f64())
            .ok_or_else(|| Error::Config("policy JSON lacks quantization_eps".into()))?;
        let entries = doc
            .get("actions")
            .and_then(|v| v.as_object())
            .ok_or_else(|| Error::Config("policy JSON lacks actions map".into()))?;
        let mut table = BTreeMap::new();
        for (key, value) in entries {
            let coords: std::result::Result<Vec<i64>, _> =
                key.split(',').map(|p| p.parse::<i64>()).collect();
            let coords =
                coords.map_err(|e| Error::Config(format!("bad policy state key `{key}`: {e}")))?;
            let action = value
                .as_u64()
                .ok_or_else(|| Error::Config(format!("bad action for state `{key}`")))?;
            table.insert(StateKey(coords), ActionId(action as usize));
        }
        Ok(TabularPolicy { eps, table })
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl Policy for TabularPolicy {
    fn action(&self, s: &StateVec) -> Result<ActionId> {
        self.get(s)
            .ok_or_else(|| Error::MissingPolicyEntry(s.values().to_vec()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let mut policy = TabularPolicy::new(1e-9);
        policy.insert(&StateVec::from([0.0, 0.0]), ActionId(2));
        policy.insert(&StateVec::from([1.0, 3.0]), ActionId(0));
        let text = policy.to_json().unwrap();
        let back = TabularPolicy::from_json(&text).unwrap();
        assert_eq!(policy, back);
    }

    #[test]
    fn missing_entry_is_an_error() {
        let policy = TabularPolicy::new(1e-9);
        let err = policy.action(&StateVec::from([9.0, 9.0])).unwrap_err();
        assert!(matches!(err, Error::MissingPolicyEntry(_)));
    }
}
