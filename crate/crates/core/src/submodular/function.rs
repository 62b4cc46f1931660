use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::set::{ItemSet, MAX_ITEMS};

/// Largest ground set accepted by [`SubmodularFunction::table`].
pub const TABLE_LIMIT: usize = 16;

/// Largest ground set for which [`ValueTable`] materializes every subset.
pub const VALUE_TABLE_LIMIT: usize = 22;

/// A set function evaluable on bitmask subsets of `0..ground_size()`.
///
/// Implementors must return `f(∅) = 0` and be deterministic. Callers pass
/// subsets of the ground set only; out-of-range bits are a logic error.
pub trait SetFunction<S: Scalar>: Sync {
    fn ground_size(&self) -> usize;

    fn value(&self, set: ItemSet) -> S;

    fn marginal_gain(&self, set: ItemSet, item: usize) -> S {
        self.value(set.with(item)) - self.value(set)
    }
}

/// Nondecreasing concave map `g` with `g(0) = 0`, applied to a modular sum.
#[derive(Clone, Debug, PartialEq)]
pub enum ConcaveMap<S> {
    Sqrt,
    /// Slope `slopes[0]` on `[0, knots[0]]`, `slopes[k]` on `[knots[k-1], knots[k]]`,
    /// and the last slope beyond the last knot. Slopes are nonincreasing and nonnegative.
    PiecewiseLinear { knots: Vec<S>, slopes: Vec<S> },
}

impl<S: Scalar> ConcaveMap<S> {
    fn validate(&self) -> Result<()> {
        match self {
            ConcaveMap::Sqrt => Ok(()),
            ConcaveMap::PiecewiseLinear { knots, slopes } => {
                if slopes.len() != knots.len() + 1 {
                    return Err(Error::InvalidParameter(
                        "piecewise-linear map needs exactly one more slope than knots".into(),
                    ));
                }
                if knots.iter().any(|k| *k <= S::zero()) || knots.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidParameter(
                        "knots must be positive and strictly increasing".into(),
                    ));
                }
                if slopes.iter().any(|s| *s < S::zero()) || slopes.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::InvalidParameter(
                        "slopes must be nonnegative and nonincreasing".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn apply(&self, u: &S) -> S {
        match self {
            ConcaveMap::Sqrt => u.sqrt_lossy(),
            ConcaveMap::PiecewiseLinear { knots, slopes } => {
                let mut total = S::zero();
                let mut left = S::zero();
                for (k, slope) in knots.iter().zip(slopes) {
                    if *u <= *k {
                        return total + slope.clone() * (u.clone() - left);
                    }
                    total = total + slope.clone() * (k.clone() - left);
                    left = k.clone();
                }
                total + slopes.last().expect("validated").clone() * (u.clone() - left)
            }
        }
    }

    /// True when evaluation stays exact for exact scalar types.
    pub fn is_exact(&self) -> bool {
        matches!(self, ConcaveMap::PiecewiseLinear { .. })
    }
}

/// Monotone nonnegative submodular function in one of the supported families.
#[derive(Clone, Debug, PartialEq)]
pub enum SubmodularFunction<S> {
    /// `f(X) = Σ_{i∈X} w_i`.
    Modular { weights: Vec<S> },
    /// Weighted coverage: `f(X)` is the weight of the union of `covers[i]`, `i ∈ X`.
    Coverage {
        element_weights: Vec<S>,
        covers: Vec<Vec<usize>>,
    },
    /// `f(X) = g(Σ_{i∈X} w_i)` for a concave map `g`.
    ConcaveOfModular { weights: Vec<S>, map: ConcaveMap<S> },
    /// Explicit values indexed by subset bitmask.
    Table { n: usize, values: Vec<S> },
}

fn check_nonnegative<S: Scalar>(values: &[S], what: &str) -> Result<()> {
    match values.iter().position(|v| *v < S::zero()) {
        Some(i) => Err(Error::InvalidParameter(format!("{what}[{i}] is negative"))),
        None => Ok(()),
    }
}

fn check_ground(n: usize) -> Result<()> {
    if n > MAX_ITEMS {
        return Err(Error::capability("ground set", n, MAX_ITEMS));
    }
    Ok(())
}

impl<S: Scalar> SubmodularFunction<S> {
    pub fn modular(weights: Vec<S>) -> Result<Self> {
        check_ground(weights.len())?;
        check_nonnegative(&weights, "weights")?;
        Ok(SubmodularFunction::Modular { weights })
    }

    pub fn coverage(element_weights: Vec<S>, covers: Vec<Vec<usize>>) -> Result<Self> {
        check_ground(covers.len())?;
        check_nonnegative(&element_weights, "element_weights")?;
        for (i, cover) in covers.iter().enumerate() {
            if let Some(&e) = cover.iter().find(|&&e| e >= element_weights.len()) {
                return Err(Error::InvalidParameter(format!(
                    "covers[{i}] references element {e} outside a universe of {}",
                    element_weights.len()
                )));
            }
        }
        Ok(SubmodularFunction::Coverage {
            element_weights,
            covers,
        })
    }

    pub fn concave_of_modular(weights: Vec<S>, map: ConcaveMap<S>) -> Result<Self> {
        check_ground(weights.len())?;
        check_nonnegative(&weights, "weights")?;
        map.validate()?;
        Ok(SubmodularFunction::ConcaveOfModular { weights, map })
    }

    /// Explicit table, verified exhaustively (nonnegative, `f(∅)=0`,
    /// monotone, submodular) before it is accepted.
    pub fn table(values: Vec<S>) -> Result<Self> {
        let f = Self::table_unverified(values)?;
        let report = super::verify::verify_structure(&f)?;
        if !report.all_pass() {
            return Err(Error::InvalidParameter(format!(
                "table is not a monotone nonnegative submodular function: {}",
                report.summary()
            )));
        }
        Ok(f)
    }

    /// Explicit table with only shape checks; used to load candidate tables
    /// that are then audited by `verify_structure`.
    pub fn table_unverified(values: Vec<S>) -> Result<Self> {
        let len = values.len();
        if !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "table length {len} is not a power of two"
            )));
        }
        let n = len.trailing_zeros() as usize;
        if n > TABLE_LIMIT {
            return Err(Error::capability("explicit table", n, TABLE_LIMIT));
        }
        Ok(SubmodularFunction::Table { n, values })
    }

    pub fn ground_size(&self) -> usize {
        match self {
            SubmodularFunction::Modular { weights } => weights.len(),
            SubmodularFunction::Coverage { covers, .. } => covers.len(),
            SubmodularFunction::ConcaveOfModular { weights, .. } => weights.len(),
            SubmodularFunction::Table { n, .. } => *n,
        }
    }

    /// True when values are computed without rounding for exact scalars.
    pub fn is_exact_family(&self) -> bool {
        match self {
            SubmodularFunction::ConcaveOfModular { map, .. } => map.is_exact(),
            _ => true,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            SubmodularFunction::Modular { .. } => "modular",
            SubmodularFunction::Coverage { .. } => "coverage",
            SubmodularFunction::ConcaveOfModular { .. } => "concave_modular",
            SubmodularFunction::Table { .. } => "table",
        }
    }

    /// Validated evaluation on an index list.
    pub fn eval(&self, items: &[usize]) -> Result<S> {
        let n = self.ground_size();
        let mut set = ItemSet::EMPTY;
        for &i in items {
            if i >= n {
                return Err(Error::InvalidSubset { index: i, n });
            }
            set.insert(i);
        }
        Ok(self.value_of(set))
    }

    /// `f(X ∪ {i}) − f(X)`; `i` must not already be in `X`.
    pub fn marginal(&self, items: &[usize], i: usize) -> Result<S> {
        let n = self.ground_size();
        if i >= n {
            return Err(Error::InvalidSubset { index: i, n });
        }
        if items.contains(&i) {
            return Err(Error::Precondition(format!(
                "item {i} is already in the set"
            )));
        }
        let base = self.eval(items)?;
        let mut extended = items.to_vec();
        extended.push(i);
        Ok(self.eval(&extended)? - base)
    }

    fn value_of(&self, set: ItemSet) -> S {
        match self {
            SubmodularFunction::Modular { weights } => set
                .iter()
                .fold(S::zero(), |acc, i| acc + weights[i].clone()),
            SubmodularFunction::Coverage {
                element_weights,
                covers,
            } => {
                let mut covered = vec![false; element_weights.len()];
                let mut total = S::zero();
                for i in set.iter() {
                    for &e in &covers[i] {
                        if !covered[e] {
                            covered[e] = true;
                            total = total + element_weights[e].clone();
                        }
                    }
                }
                total
            }
            SubmodularFunction::ConcaveOfModular { weights, map } => {
                let sum = set
                    .iter()
                    .fold(S::zero(), |acc, i| acc + weights[i].clone());
                map.apply(&sum)
            }
            SubmodularFunction::Table { values, .. } => values[set.bits() as usize].clone(),
        }
    }

    /// Converts parameters to another scalar type (through `f64` where needed).
    pub fn convert<T: Scalar>(&self) -> SubmodularFunction<T> {
        let conv = |v: &S| T::parse_scalar(&v.render()).unwrap_or_else(|| T::from_f64_lossy(v.to_f64_lossy()));
        let conv_all = |vs: &[S]| vs.iter().map(conv).collect::<Vec<T>>();
        match self {
            SubmodularFunction::Modular { weights } => SubmodularFunction::Modular {
                weights: conv_all(weights),
            },
            SubmodularFunction::Coverage {
                element_weights,
                covers,
            } => SubmodularFunction::Coverage {
                element_weights: conv_all(element_weights),
                covers: covers.clone(),
            },
            SubmodularFunction::ConcaveOfModular { weights, map } => {
                SubmodularFunction::ConcaveOfModular {
                    weights: conv_all(weights),
                    map: match map {
                        ConcaveMap::Sqrt => ConcaveMap::Sqrt,
                        ConcaveMap::PiecewiseLinear { knots, slopes } => {
                            ConcaveMap::PiecewiseLinear {
                                knots: conv_all(knots),
                                slopes: conv_all(slopes),
                            }
                        }
                    },
                }
            }
            SubmodularFunction::Table { n, values } => SubmodularFunction::Table {
                n: *n,
                values: conv_all(values),
            },
        }
    }
}

impl<S: Scalar> SetFunction<S> for SubmodularFunction<S> {
    fn ground_size(&self) -> usize {
        SubmodularFunction::ground_size(self)
    }

    fn value(&self, set: ItemSet) -> S {
        self.value_of(set)
    }
}

/// Every subset value of a set function, materialized once.
#[derive(Clone, Debug)]
pub struct ValueTable<S> {
    n: usize,
    values: Vec<S>,
}

impl<S: Scalar> ValueTable<S> {
    pub fn build<F: SetFunction<S> + ?Sized>(f: &F) -> Result<Self> {
        let n = f.ground_size();
        if n > VALUE_TABLE_LIMIT {
            return Err(Error::capability("subset value table", n, VALUE_TABLE_LIMIT));
        }
        let values = (0..1u64 << n).map(|m| f.value(ItemSet(m))).collect();
        Ok(ValueTable { n, values })
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn get(&self, set: ItemSet) -> &S {
        &self.values[set.bits() as usize]
    }
}

impl<S: Scalar> SetFunction<S> for ValueTable<S> {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, set: ItemSet) -> S {
        self.values[set.bits() as usize].clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cov() -> SubmodularFunction<f64> {
        // universe {u, v, w}; item 0 covers {u, v}, item 1 covers {v, w}
        SubmodularFunction::coverage(vec![1.0; 3], vec![vec![0, 1], vec![1, 2]]).unwrap()
    }

    #[test]
    fn modular_eval() {
        let f = SubmodularFunction::modular(vec![2.0, 3.0, 4.0]).unwrap();
        assert_eq!(f.eval(&[0, 1]).unwrap(), 5.0);
        assert_eq!(f.eval(&[]).unwrap(), 0.0);
        assert_eq!(f.marginal(&[0], 2).unwrap(), 4.0);
        assert_eq!(f.marginal(&[], 1).unwrap(), 3.0);
    }

    #[test]
    fn coverage_eval() {
        let f = cov();
        assert_eq!(f.eval(&[0, 1]).unwrap(), 3.0);
        assert_eq!(f.marginal(&[0], 1).unwrap(), 1.0);
        assert_eq!(f.eval(&[]).unwrap(), 0.0);
    }

    #[test]
    fn eval_errors() {
        let f = cov();
        assert!(matches!(
            f.eval(&[0, 7]),
            Err(Error::InvalidSubset { index: 7, n: 2 })
        ));
        assert!(matches!(f.marginal(&[0], 0), Err(Error::Precondition(_))));
    }

    #[test]
    fn piecewise_linear_map() {
        let map = ConcaveMap::PiecewiseLinear {
            knots: vec![2.0, 5.0],
            slopes: vec![3.0, 1.0, 0.0],
        };
        let f = SubmodularFunction::concave_of_modular(vec![1.0, 2.0, 4.0], map).unwrap();
        assert_eq!(f.eval(&[0]).unwrap(), 3.0);
        assert_eq!(f.eval(&[1]).unwrap(), 6.0);
        assert_eq!(f.eval(&[0, 1]).unwrap(), 7.0);
        assert_eq!(f.eval(&[0, 1, 2]).unwrap(), 9.0);
    }

    #[test]
    fn bad_maps_rejected() {
        let convex = ConcaveMap::PiecewiseLinear {
            knots: vec![1.0],
            slopes: vec![1.0, 2.0],
        };
        assert!(SubmodularFunction::concave_of_modular(vec![1.0], convex).is_err());
        assert!(SubmodularFunction::modular(vec![-1.0]).is_err());
    }

    #[test]
    fn superadditive_table_rejected() {
        // f({0}) = f({1}) = 1, f({0,1}) = 3
        let err = SubmodularFunction::table(vec![0.0, 1.0, 1.0, 3.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
        assert!(SubmodularFunction::table_unverified(vec![0.0, 1.0, 1.0, 3.0]).is_ok());
        assert!(SubmodularFunction::table_unverified(vec![0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn value_table_matches() {
        let f = cov();
        let t = ValueTable::build(&f).unwrap();
        for m in 0..4u64 {
            assert_eq!(t.value(ItemSet(m)), f.value(ItemSet(m)));
        }
    }
}
