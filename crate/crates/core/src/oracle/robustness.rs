use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::instances::Instance;
use crate::policies::{
    deterministic_policy, greedy_policy, randomized_adaptive_expectation, universal_expectation,
    universal_policy_sequences, CapacityOracle, PolicyConfig,
};
use crate::scalar::{format_significant, Scalar};
use crate::submodular::ItemSet;

use super::opt::OptOracle;

/// `(1 − 1/e)/2`, the randomized adaptive floor.
pub fn randomized_adaptive_floor() -> f64 {
    (1.0 - (-1.0f64).exp()) / 2.0
}

/// `(1 − e^{−1/3})/3`, the deterministic floor with an exact subroutine.
pub fn deterministic_floor() -> f64 {
    (1.0 - (-1.0f64 / 3.0).exp()) / 3.0
}

/// `(1 − e^{−1/4})/2`, the randomized universal floor.
pub fn universal_floor() -> f64 {
    (1.0 - (-0.25f64).exp()) / 2.0
}

/// Policies whose robustness can be profiled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyId {
    /// Density greedy from the empty set.
    Alg1,
    /// Randomized adaptive policy (coin enumerated).
    Alg2,
    /// Deterministic adaptive policy.
    Alg3(PolicyConfig),
    /// Randomized universal policy (coin enumerated, with cancellation).
    Alg4,
}

impl PolicyId {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyId::Alg1 => "alg1",
            PolicyId::Alg2 => "alg2",
            PolicyId::Alg3(_) => "alg3",
            PolicyId::Alg4 => "alg4",
        }
    }

    /// Proven lower bound on the robustness ratio, if any.
    pub fn floor(&self) -> Option<f64> {
        match self {
            PolicyId::Alg1 => None,
            PolicyId::Alg2 => Some(randomized_adaptive_floor()),
            PolicyId::Alg3(_) => Some(deterministic_floor()),
            PolicyId::Alg4 => Some(universal_floor()),
        }
    }
}

impl fmt::Display for PolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "alg1" => Ok(PolicyId::Alg1),
            "alg2" => Ok(PolicyId::Alg2),
            "alg3" => Ok(PolicyId::Alg3(PolicyConfig::default())),
            "alg4" => Ok(PolicyId::Alg4),
            other => Err(Error::InvalidParameter(format!(
                "unknown policy `{other}` (expected alg1, alg2, alg3 or alg4)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow<S> {
    pub capacity: u64,
    /// Policy value, or its exact expectation for randomized policies.
    pub value: S,
    pub opt: S,
    pub ratio: S,
}

/// Per-capacity ratios of a policy against `OPT_C`.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport<S> {
    pub policy: String,
    pub instance: String,
    pub exact: bool,
    pub rows: Vec<RatioRow<S>>,
    pub floor: Option<f64>,
}

impl<S: Scalar> RatioReport<S> {
    /// Row with the smallest ratio (the first one among ties).
    pub fn worst(&self) -> Option<&RatioRow<S>> {
        let mut worst: Option<&RatioRow<S>> = None;
        for r in &self.rows {
            if worst.is_none_or(|w| r.ratio < w.ratio) {
                worst = Some(r);
            }
        }
        worst
    }

    pub fn worst_ratio(&self) -> S {
        self.worst().map_or_else(S::one, |r| r.ratio.clone())
    }

    /// Whether the worst ratio clears the theorem floor (vacuously true
    /// without one).
    pub fn meets_floor(&self) -> bool {
        self.floor
            .is_none_or(|f| self.worst_ratio().to_f64_lossy() + 1e-9 >= f)
    }

    fn number(&self, x: &S) -> String {
        if self.exact {
            x.render()
        } else {
            format_significant(x.to_f64_lossy(), 12)
        }
    }

    /// `capacity,value,opt,ratio` rows followed by the worst-case and floor
    /// summary rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("capacity,value,opt,ratio\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.capacity,
                self.number(&r.value),
                self.number(&r.opt),
                self.number(&r.ratio)
            ));
        }
        let worst = self.worst_ratio();
        out.push_str(&format!("worst_case,,,{}\n", self.number(&worst)));
        if let Some(f) = self.floor {
            out.push_str(&format!("theorem_floor,,,{}\n", format_significant(f, 12)));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<_> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "capacity": r.capacity,
                    "value": self.number(&r.value),
                    "opt": self.number(&r.opt),
                    "ratio": self.number(&r.ratio),
                })
            })
            .collect();
        json!({
            "policy": self.policy,
            "instance": self.instance,
            "arithmetic": if self.exact { "exact" } else { "float" },
            "rows": rows,
            "worst_ratio": self.number(&self.worst_ratio()),
            "worst_capacity": self.worst().map(|r| r.capacity),
            "theorem_floor": self.floor,
            "meets_floor": self.meets_floor(),
        })
    }
}

/// `value / opt`, with ratio 1 when `opt = 0`.
pub fn ratio_against<S: Scalar>(value: S, opt: &S) -> S {
    if opt.is_zero() {
        S::one()
    } else {
        value / opt.clone()
    }
}

/// Value (or exact expectation) of a policy at one capacity.
pub fn policy_value<S: Scalar>(policy: &PolicyId, inst: &Instance<S>, capacity: u64) -> Result<S> {
    Ok(match policy {
        PolicyId::Alg1 => greedy_policy(inst, ItemSet::EMPTY, &mut CapacityOracle::new(capacity))?.value,
        PolicyId::Alg2 => randomized_adaptive_expectation(inst, capacity)?.expectation,
        PolicyId::Alg3(cfg) => deterministic_policy(inst, &mut CapacityOracle::new(capacity), cfg)?.value,
        PolicyId::Alg4 => {
            let pair = universal_policy_sequences(inst, 0)?;
            universal_expectation(inst, &pair, capacity, true)
        }
    })
}

/// Ratios of `policy` against `OPT_C` at every capacity, in the given order.
pub fn robustness_profile<S: Scalar>(
    policy: PolicyId,
    inst: &Instance<S>,
    capacities: &[u64],
    instance_id: &str,
) -> Result<RatioReport<S>> {
    let opt = OptOracle::new(inst)?;
    let pair = match policy {
        PolicyId::Alg4 => Some(universal_policy_sequences(inst, 0)?),
        _ => None,
    };
    let rows = capacities
        .par_iter()
        .map(|&c| {
            let value = match &pair {
                Some(pair) => universal_expectation(inst, pair, c, true),
                None => policy_value(&policy, inst, c)?,
            };
            let opt = opt.opt_value(c);
            Ok(RatioRow {
                capacity: c,
                ratio: ratio_against(value.clone(), &opt),
                value,
                opt,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioReport {
        policy: policy.name().into(),
        instance: instance_id.into(),
        exact: S::EXACT,
        rows,
        floor: policy.floor(),
    })
}

/// All integer capacities `0..=s(I)`.
pub fn default_capacities<S: Scalar>(inst: &Instance<S>) -> Vec<u64> {
    (0..=inst.total_size()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{make_fixture, FixtureId};
    use crate::submodular::SubmodularFunction;
    use crate::Rational;

    #[test]
    fn alg2_kpuc_worst_three_quarters() {
        let inst = make_fixture::<Rational>(FixtureId::KpucEightNinths).unwrap();
        let caps: Vec<u64> = (1..=9).collect();
        let r = robustness_profile(PolicyId::Alg2, &inst, &caps, "kpuc89").unwrap();
        assert_eq!(r.worst_ratio(), Rational::from_ratio(3, 4));
        assert_eq!(r.worst().unwrap().capacity, 4);
        assert!(r.meets_floor());
        let csv = r.to_csv();
        assert!(csv.starts_with("capacity,value,opt,ratio\n1,0,0,1\n"));
        assert!(csv.contains("worst_case,,,3/4\n"));
    }

    #[test]
    fn alg4_single_item() {
        let f = SubmodularFunction::modular(vec![2.0]).unwrap();
        let inst = Instance::new(vec![3], f).unwrap();
        let r = robustness_profile(PolicyId::Alg4, &inst, &[0, 1, 2, 3, 4], "single").unwrap();
        assert!(r.rows.iter().all(|row| row.ratio == 1.0));
    }

    #[test]
    fn policy_ids_parse() {
        assert_eq!("ALG1".parse::<PolicyId>().unwrap(), PolicyId::Alg1);
        assert!("alg5".parse::<PolicyId>().is_err());
        assert!((randomized_adaptive_floor() - 0.316060).abs() < 1e-6);
        assert!((deterministic_floor() - 0.094489).abs() < 1e-6);
        assert!((universal_floor() - 0.110600).abs() < 1e-6);
    }
}
