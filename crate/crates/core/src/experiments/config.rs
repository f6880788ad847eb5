use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::construction::ConstructionKind;
use crate::error::{invalid, JlError, Result};

/// The three transforms compared by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    /// Gaussian entries.
    Dense,
    /// Achlioptas `{+1, 0, -1}` entries.
    Ach,
    /// Graph construction with `s` nonzeros per column.
    Sparse,
}

impl Construction {
    pub const ALL: [Construction; 3] =
        [Construction::Dense, Construction::Ach, Construction::Sparse];

    pub fn kind(self, s: usize) -> ConstructionKind {
        match self {
            Construction::Dense => ConstructionKind::DenseGaussian,
            Construction::Ach => ConstructionKind::AchlioptasSparse,
            Construction::Sparse => ConstructionKind::GraphSparse { s },
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Construction::Dense => "dense",
            Construction::Ach => "ach",
            Construction::Sparse => "sparse",
        }
    }

    pub(crate) fn code(self) -> u64 {
        match self {
            Construction::Dense => 1,
            Construction::Ach => 2,
            Construction::Sparse => 3,
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Construction {
    type Err = JlError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dense" | "gaussian" => Ok(Construction::Dense),
            "ach" | "achlioptas" => Ok(Construction::Ach),
            "sparse" | "graph" => Ok(Construction::Sparse),
            other => invalid(format!("unknown construction '{other}'")),
        }
    }
}

/// How input vectors are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFamily {
    /// `t` nonzeros at uniform positions.
    Sparse,
    /// Uniform on the unit sphere.
    Dense,
}

impl InputFamily {
    pub fn label(self) -> &'static str {
        match self {
            InputFamily::Sparse => "sparse",
            InputFamily::Dense => "dense",
        }
    }

    pub(crate) fn code(self) -> u64 {
        match self {
            InputFamily::Sparse => 1,
            InputFamily::Dense => 2,
        }
    }
}

impl fmt::Display for InputFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for InputFamily {
    type Err = JlError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sparse" => Ok(InputFamily::Sparse),
            "dense" | "sphere" => Ok(InputFamily::Dense),
            other => invalid(format!("unknown input family '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Input vectors per family.
    pub n: usize,
    /// Ambient dimension.
    pub d: usize,
    /// Target dimension.
    pub k: usize,
    /// Nonzeros per column of the graph construction.
    pub s: usize,
    /// Nonzeros per sparse input vector.
    pub t: usize,
    /// Independent transform instances per series.
    pub trials: usize,
    pub epsilon: f64,
    pub master_seed: u64,
    pub constructions: Vec<Construction>,
    pub probes: Vec<f64>,
}

impl Default for ExperimentConfig {
    /// Desk-scale defaults: small enough for CI, same `k`, `s`, `t`.
    fn default() -> Self {
        Self {
            n: 500,
            d: 1000,
            k: 50,
            s: 16,
            t: 5,
            trials: 10,
            epsilon: 0.5,
            master_seed: 0,
            constructions: Construction::ALL.to_vec(),
            probes: vec![0.5, 0.99],
        }
    }
}

impl ExperimentConfig {
    /// Full-size setup: 5000 vectors in 10000 dimensions, 30 instances.
    pub fn paper_scale() -> Self {
        Self {
            n: 5000,
            d: 10_000,
            trials: 30,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 || self.k == 0 {
            return invalid("n, d and k must be positive");
        }
        if self.s == 0 || self.s > self.k {
            return invalid(format!("s={} must satisfy 1 <= s <= k={}", self.s, self.k));
        }
        if self.t == 0 || self.t > self.d {
            return invalid(format!("t={} must satisfy 1 <= t <= d={}", self.t, self.d));
        }
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return invalid(format!("epsilon={} must lie in (0, 1)", self.epsilon));
        }
        if self.constructions.is_empty() {
            return invalid("at least one construction is required");
        }
        if self.probes.is_empty() {
            return invalid("at least one quantile probe is required");
        }
        if let Some(p) = self.probes.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
            return invalid(format!("probe {p} must lie in (0, 1)"));
        }
        Ok(())
    }

    pub(crate) fn has(&self, c: Construction) -> bool {
        self.constructions.contains(&c)
    }
}

/// Smallest `k` with `2·exp(−kε²/12) ≤ n⁻³`: `ceil(12·(3 ln n + ln 2)/ε²)`.
pub fn required_k(n: u64, epsilon: f64) -> Result<u64> {
    if n < 2 {
        return invalid(format!("n={n} must be at least 2"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return invalid(format!("epsilon={epsilon} must lie in (0, 1)"));
    }
    let ln_n = (n as f64).ln();
    Ok((12.0 * (3.0 * ln_n + std::f64::consts::LN_2) / (epsilon * epsilon)).ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn required_k_examples() {
        assert_eq!(required_k(2, 0.5).unwrap(), 134);
        assert_eq!(required_k(2, 1.0 - 1e-9).unwrap(), 34);
        // 12·(3·ln 5000 + ln 2)/0.04 = 7873.42…
        assert_eq!(required_k(5000, 0.2).unwrap(), 7874);
    }

    #[test]
    fn required_k_satisfies_its_inequality() {
        for n in [2u64, 10, 5000, 1_000_000] {
            for eps in [0.05, 0.2, 0.5, 0.9] {
                let k = required_k(n, eps).unwrap() as f64;
                let target = (n as f64).powi(-3);
                assert!(2.0 * (-k * eps * eps / 12.0).exp() <= target * (1.0 + 1e-12));
                assert!(2.0 * (-(k - 1.0) * eps * eps / 12.0).exp() > target);
            }
        }
    }

    #[test]
    fn required_k_monotone() {
        let mut last = 0;
        for n in 2..2000u64 {
            let k = required_k(n, 0.3).unwrap();
            assert!(k >= last);
            last = k;
        }
        let mut last = u64::MAX;
        for i in 1..100 {
            let k = required_k(1000, i as f64 / 100.0).unwrap();
            assert!(k <= last);
            last = k;
        }
    }

    #[test]
    fn required_k_errors() {
        assert!(required_k(1, 0.5).is_err());
        assert!(required_k(10, 0.0).is_err());
        assert!(required_k(10, 1.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        assert!(ExperimentConfig::paper_scale().validate().is_ok());
        let bad = [
            ExperimentConfig {
                s: 51,
                ..Default::default()
            },
            ExperimentConfig {
                t: 1001,
                ..Default::default()
            },
            ExperimentConfig {
                trials: 0,
                ..Default::default()
            },
            ExperimentConfig {
                probes: vec![1.0],
                ..Default::default()
            },
            ExperimentConfig {
                constructions: vec![],
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!("Ach".parse::<Construction>().unwrap(), Construction::Ach);
        assert_eq!(
            "graph".parse::<Construction>().unwrap(),
            Construction::Sparse
        );
        assert!("fjlt".parse::<Construction>().is_err());
        assert_eq!("sphere".parse::<InputFamily>().unwrap(), InputFamily::Dense);
    }
}
