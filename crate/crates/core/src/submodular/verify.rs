use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::function::SetFunction;
use super::set::ItemSet;

/// Largest ground set checked exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Nonnegative,
    EmptyIsZero,
    Monotone,
    Submodular,
}

/// A pair of sets exhibiting a violation. For nonnegativity and `f(∅)=0`
/// both sets are the offending set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub x: ItemSet,
    pub y: ItemSet,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomResult {
    pub axiom: Axiom,
    pub pass: bool,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    pub n: usize,
    /// False when only random triples were checked.
    pub exhaustive: bool,
    /// Number of `(X, i, j)` diminishing-returns checks performed.
    pub checks: u64,
    pub axioms: Vec<AxiomResult>,
}

impl StructureReport {
    pub fn all_pass(&self) -> bool {
        self.axioms.iter().all(|a| a.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomResult> {
        self.axioms.iter().filter(|a| !a.pass)
    }

    pub fn summary(&self) -> String {
        let failed: Vec<String> = self
            .failures()
            .map(|a| match &a.witness {
                Some(w) => format!("{:?} fails ({})", a.axiom, w.detail),
                None => format!("{:?} fails", a.axiom),
            })
            .collect();
        if failed.is_empty() {
            "all axioms pass".into()
        } else {
            failed.join("; ")
        }
    }
}

struct Checker<S: Scalar> {
    slack: S,
    results: [Option<Witness>; 4],
    checks: u64,
}

impl<S: Scalar> Checker<S> {
    fn new(scale: S) -> Self {
        let scale = S::max_of(S::one(), scale);
        Checker {
            slack: S::tolerance() * scale,
            results: [None, None, None, None],
            checks: 0,
        }
    }

    fn record(&mut self, axiom: Axiom, w: impl FnOnce() -> Witness) {
        let slot = &mut self.results[axiom as usize];
        if slot.is_none() {
            *slot = Some(w());
        }
    }

    fn single(&mut self, set: ItemSet, v: &S) {
        if *v < -self.slack.clone() {
            self.record(Axiom::Nonnegative, || Witness {
                x: set,
                y: set,
                detail: format!("f({:?}) = {}", set, v.render()),
            });
        }
    }

    fn empty(&mut self, v: &S) {
        if v.abs() > self.slack {
            self.record(Axiom::EmptyIsZero, || Witness {
                x: ItemSet::EMPTY,
                y: ItemSet::EMPTY,
                detail: format!("f(∅) = {}", v.render()),
            });
        }
    }

    fn monotone(&mut self, x: ItemSet, i: usize, fx: &S, fxi: &S) {
        if fxi.clone() + self.slack.clone() < *fx {
            let y = x.with(i);
            self.record(Axiom::Monotone, || Witness {
                x,
                y,
                detail: format!(
                    "f({:?}) = {} > f({:?}) = {}",
                    x,
                    fx.render(),
                    y,
                    fxi.render()
                ),
            });
        }
    }

    /// Diminishing returns: `f(X+i) − f(X) ≥ f(X+i+j) − f(X+j)`.
    fn submodular(&mut self, x: ItemSet, i: usize, j: usize, v: [&S; 4]) {
        self.checks += 1;
        let [fx, fxi, fxj, fxij] = v;
        let lhs = fxi.clone() + fxj.clone();
        let rhs = fxij.clone() + fx.clone();
        if lhs + self.slack.clone() < rhs {
            let (a, b) = (x.with(i), x.with(j));
            self.record(Axiom::Submodular, || Witness {
                x: a,
                y: b,
                detail: format!(
                    "f({:?}) + f({:?}) = {} < f(union) + f(intersection) = {}",
                    a,
                    b,
                    (fxi.clone() + fxj.clone()).render(),
                    (fxij.clone() + fx.clone()).render()
                ),
            });
        }
    }

    fn finish(self, n: usize, exhaustive: bool) -> StructureReport {
        let order = [
            Axiom::Nonnegative,
            Axiom::EmptyIsZero,
            Axiom::Monotone,
            Axiom::Submodular,
        ];
        let checks = self.checks;
        let axioms = order
            .into_iter()
            .zip(self.results)
            .map(|(axiom, witness)| AxiomResult {
                axiom,
                pass: witness.is_none(),
                witness,
            })
            .collect();
        StructureReport {
            n,
            exhaustive,
            checks,
            axioms,
        }
    }
}

fn largest_abs<S: Scalar>(values: &[S]) -> S {
    values
        .iter()
        .fold(S::zero(), |m, v| S::max_of(m, v.abs()))
}

/// Exhaustive check of nonnegativity, `f(∅)=0`, monotonicity and
/// submodularity (through the equivalent marginal-gain condition over every
/// `(X, i, j)`). Float types compare with a tolerance scaled by `max |f|`.
pub fn verify_structure<S: Scalar, F: SetFunction<S> + ?Sized>(f: &F) -> Result<StructureReport> {
    let n = f.ground_size();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::capability(
            "exhaustive structure verification",
            n,
            EXHAUSTIVE_LIMIT,
        ));
    }
    let values: Vec<S> = (0..1u64 << n).map(|m| f.value(ItemSet(m))).collect();
    let mut c = Checker::new(largest_abs(&values));
    c.empty(&values[0]);
    for (m, v) in values.iter().enumerate() {
        let x = ItemSet(m as u64);
        c.single(x, v);
        for i in 0..n {
            if x.contains(i) {
                continue;
            }
            let xi = x.with(i);
            c.monotone(x, i, v, &values[xi.bits() as usize]);
            for j in i + 1..n {
                if x.contains(j) {
                    continue;
                }
                let xj = x.with(j).bits() as usize;
                let xij = xi.with(j).bits() as usize;
                c.submodular(
                    x,
                    i,
                    j,
                    [v, &values[xi.bits() as usize], &values[xj], &values[xij]],
                );
            }
        }
    }
    Ok(c.finish(n, true))
}

/// Random-triple variant for ground sets beyond the exhaustive bound.
/// The report is flagged `exhaustive: false`.
pub fn verify_structure_sampled<S: Scalar, F: SetFunction<S> + ?Sized>(
    f: &F,
    samples: u64,
    seed: u64,
) -> Result<StructureReport> {
    let n = f.ground_size();
    if n < 2 {
        return verify_structure(f);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mask = ItemSet::full(n).bits();
    let empty = f.value(ItemSet::EMPTY);
    let mut c = Checker::new(f.value(ItemSet::full(n)).abs());
    c.empty(&empty);
    for _ in 0..samples {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let x = ItemSet(rng.random::<u64>() & mask).without(i).without(j);
        let (fx, fxi, fxj, fxij) = (
            f.value(x),
            f.value(x.with(i)),
            f.value(x.with(j)),
            f.value(x.with(i).with(j)),
        );
        c.single(x, &fx);
        c.monotone(x, i, &fx, &fxi);
        c.submodular(x, i, j, [&fx, &fxi, &fxj, &fxij]);
    }
    Ok(c.finish(n, false))
}
