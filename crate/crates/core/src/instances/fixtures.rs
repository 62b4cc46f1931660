use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::submodular::SubmodularFunction;

use super::model::{CapacityDistribution, Instance, Normalization};

/// √5 to 60 significant digits.
pub const SQRT5: &str = "2.23606797749978969640917366873127623544061835961152572427090";

/// The named hardness and gap instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixtureId {
    /// Modular items of sizes 2, 3, 4 (weight = size); `C ∈ {4, 5}` with
    /// probabilities 4/9 and 5/9.
    KpucEightNinths,
    /// Three unit-size items with a symmetric table built from √5.
    UnitSqrt5,
    /// Modular items `1..=n` with size and weight `M^i`.
    Geometric { m: u64, n: u32 },
    /// Items of sizes `(T, T, 1)`, unit weights, capacity `T` almost surely.
    IntegralityGap { t: u64 },
}

impl fmt::Display for FixtureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FixtureId::KpucEightNinths => write!(f, "kpuc_eight_ninths"),
            FixtureId::UnitSqrt5 => write!(f, "unit_sqrt5"),
            FixtureId::Geometric { m, n } => write!(f, "geometric({m},{n})"),
            FixtureId::IntegralityGap { t } => write!(f, "integrality_gap({t})"),
        }
    }
}

fn parse_args(s: &str, name: &str) -> Option<Vec<u64>> {
    let rest = s.strip_prefix(name)?;
    let inner = rest
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .or_else(|| rest.strip_prefix(':'))?;
    inner
        .split([',', ':'])
        .map(|p| p.trim().parse().ok())
        .collect()
}

impl FromStr for FixtureId {
    type Err = Error;

    /// Accepts `kpuc89`, `kpuc_eight_ninths`, `unit_sqrt5`,
    /// `geometric(M,n)` / `geometric:M:n` and `integrality_gap(T)` /
    /// `integrality_gap:T`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("unknown fixture `{s}`"));
        match s {
            "kpuc89" | "kpuc_eight_ninths" => return Ok(FixtureId::KpucEightNinths),
            "unit_sqrt5" => return Ok(FixtureId::UnitSqrt5),
            "geometric" => return Ok(FixtureId::Geometric { m: 4, n: 4 }),
            _ => {}
        }
        if let Some(args) = parse_args(s, "geometric") {
            return match args[..] {
                [m, n] => Ok(FixtureId::Geometric {
                    m,
                    n: u32::try_from(n).map_err(|_| bad())?,
                }),
                _ => Err(bad()),
            };
        }
        if let Some(args) = parse_args(s, "integrality_gap") {
            return match args[..] {
                [t] => Ok(FixtureId::IntegralityGap { t }),
                _ => Err(bad()),
            };
        }
        Err(bad())
    }
}

fn sqrt5<S: Scalar>() -> S {
    S::parse_scalar(SQRT5).expect("constant parses")
}

/// Builds a fixture instance, with its distribution where it has one.
pub fn make_fixture<S: Scalar>(id: FixtureId) -> Result<Instance<S>> {
    match id {
        FixtureId::KpucEightNinths => {
            let f = SubmodularFunction::modular(vec![S::from_int(2), S::from_int(3), S::from_int(4)])?;
            let dist = CapacityDistribution::from_points(
                9,
                &[(4, S::from_ratio(4, 9)), (5, S::from_ratio(5, 9))],
                Normalization::Reject,
            )?;
            Instance::new(vec![2, 3, 4], f)?.with_distribution(dist)
        }
        FixtureId::UnitSqrt5 => {
            let r5 = sqrt5::<S>();
            let one_r5 = S::one() + r5.clone();
            let three_r5 = S::from_int(3) + r5.clone();
            let two_two_r5 = S::from_int(2) + S::from_int(2) * r5;
            // bit 0 = a, bit 1 = b, bit 2 = c
            let values = vec![
                S::zero(),
                S::from_int(4),
                one_r5.clone(),
                three_r5.clone(),
                one_r5,
                three_r5,
                two_two_r5.clone(),
                two_two_r5,
            ];
            Instance::new(vec![1, 1, 1], SubmodularFunction::table(values)?)
        }
        FixtureId::Geometric { m, n } => {
            if m < 2 || n == 0 {
                return Err(Error::InvalidParameter(
                    "geometric fixture needs M ≥ 2 and n ≥ 1".into(),
                ));
            }
            let sizes: Vec<u64> = (1..=n)
                .map(|i| m.checked_pow(i))
                .collect::<Option<_>>()
                .ok_or_else(|| {
                    Error::capability("geometric fixture exponent (64-bit sizes)", n as usize, 63)
                })?;
            if sizes.iter().try_fold(0u64, |a, &s| a.checked_add(s)).is_none() {
                return Err(Error::capability(
                    "geometric fixture exponent (64-bit sizes)",
                    n as usize,
                    63,
                ));
            }
            let f = SubmodularFunction::modular(sizes.iter().map(|&s| S::from_u64_exact(s)).collect())?;
            Instance::new(sizes, f)
        }
        FixtureId::IntegralityGap { t } => {
            if t < 2 {
                return Err(Error::InvalidParameter(
                    "integrality gap fixture needs T ≥ 2".into(),
                ));
            }
            let f = SubmodularFunction::modular(vec![S::one(); 3])?;
            let inst = Instance::new(vec![t, t, 1], f)?;
            let dist = CapacityDistribution::point_mass(inst.total_size(), t)?;
            inst.with_distribution(dist)
        }
    }
}
