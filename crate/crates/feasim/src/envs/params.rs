use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dynamics knob value: a number or a symbolic id (e.g. a move-set name).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Num(f64),
    Id(String),
}

impl std::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamValue::Num(v) => write!(f, "{v}"),
            ParamValue::Id(s) => write!(f, "{s}"),
        }
    }
}

/// Named dynamics knobs for an environment family.
///
/// Every knob a family accepts is documented on the family's builder;
/// builders reject unknown knobs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DynamicsParams(pub BTreeMap<String, ParamValue>);

impl DynamicsParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_num(mut self, key: &str, value: f64) -> Self {
        self.0.insert(key.to_string(), ParamValue::Num(value));
        self
    }

    pub fn with_id(mut self, key: &str, value: &str) -> Self {
        self.0
            .insert(key.to_string(), ParamValue::Id(value.to_string()));
        self
    }

    /// Parses `key=value,key=value`. Values that parse as numbers become
    /// numeric knobs; everything else is a symbolic id.
    pub fn parse(text: &str) -> Result<Self> {
        let mut params = DynamicsParams::new();
        for part in text.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got `{part}`")))?;
            let value = value.trim();
            let parsed = match value.parse::<f64>() {
                Ok(num) => ParamValue::Num(num),
                Err(_) => ParamValue::Id(value.to_string()),
            };
            params.0.insert(key.trim().to_string(), parsed);
        }
        Ok(params)
    }

    pub fn num(&self, key: &str) -> Option<f64> {
        match self.0.get(key) {
            Some(ParamValue::Num(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn id(&self, key: &str) -> Option<&str> {
        match self.0.get(key) {
            Some(ParamValue::Id(s)) => Some(s.as_str()),
            _ => None,
        }
    }

    /// Rejects knobs outside the family's documented set.
    pub fn check_known(&self, family: &str, known: &[&str]) -> Result<()> {
        for key in self.0.keys() {
            if !known.contains(&key.as_str()) {
                return Err(Error::UnknownKnob {
                    family: family.to_string(),
                    knob: key.clone(),
                });
            }
        }
        Ok(())
    }

    /// Canonical `key=value,...` rendering (keys sorted).
    pub fn render(&self) -> String {
        self.0
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_mixed_values() {
        let p = DynamicsParams::parse("moveset=D8,max_step=2").unwrap();
        assert_eq!(p.id("moveset"), Some("D8"));
        assert_eq!(p.num("max_step"), Some(2.0));
        assert_eq!(p.render(), "max_step=2,moveset=D8");
    }

    #[test]
    fn unknown_knob_is_rejected() {
        let p = DynamicsParams::parse("warp=9").unwrap();
        let err = p.check_known("grid", &["moveset"]).unwrap_err();
        assert!(matches!(err, Error::UnknownKnob { .. }));
    }
}
