use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::state::StateVec;

/// State distance metric used by tracking rewards and inverse recovery.
///
/// `L2` and `L1` are proper metrics. `Cosine` is `1 - cos(angle)` in
/// `[0, 2]` and is undefined when either vector is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    L2,
    L1,
    Cosine,
}

impl Metric {
    pub fn parse(s: &str) -> Result<Metric> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(Metric::L2),
            "l1" => Ok(Metric::L1),
            "cosine" => Ok(Metric::Cosine),
            other => Err(Error::Config(format!("unknown metric `{other}`"))),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::L2 => write!(f, "l2"),
            Metric::L1 => write!(f, "l1"),
            Metric::Cosine => write!(f, "cosine"),
        }
    }
}

/// Distance between two equal-dimension states under the given metric.
pub fn distance(metric: Metric, s: &StateVec, t: &StateVec) -> Result<f64> {
    if s.dim() != t.dim() {
        return Err(Error::DimensionMismatch {
            want: s.dim(),
            got: t.dim(),
        });
    }
    let d = match metric {
        Metric::L2 => s
            .values()
            .iter()
            .zip(t.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt(),
        Metric::L1 => s
            .values()
            .iter()
            .zip(t.values())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>(),
        Metric::Cosine => {
            let dot: f64 = s.values().iter().zip(t.values()).map(|(a, b)| a * b).sum();
            let ns: f64 = s.values().iter().map(|a| a * a).sum::<f64>().sqrt();
            let nt: f64 = t.values().iter().map(|b| b * b).sum::<f64>().sqrt();
            if ns == 0.0 || nt == 0.0 {
                return Err(Error::UndefinedCosine);
            }
            // Clamp against rounding so the result stays in [0, 2].
            1.0 - (dot / (ns * nt)).clamp(-1.0, 1.0)
        }
    };
    Ok(d)
}
