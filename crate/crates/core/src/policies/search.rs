use crate::error::{Error, Result};
use crate::instances::Instance;
use crate::oracle::OptOracle;
use crate::scalar::Scalar;
use crate::submodular::ItemSet;

use super::execute::DecisionTree;

/// Largest item count for exhaustive decision-tree enumeration.
pub const POLICY_SEARCH_LIMIT: usize = 4;

/// How a deterministic policy is scored over the capacity set.
#[derive(Clone, Debug, PartialEq)]
pub enum SearchObjective<S> {
    /// `Σ_C w_C · f(P(C)) / f(OPT_C)`, one weight per capacity.
    Expected(Vec<S>),
    /// `min_C f(P(C)) / f(OPT_C)`.
    WorstCase,
}

/// A deterministic policy together with its ratio at each capacity.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyOutcome<S> {
    pub tree: DecisionTree,
    pub packed: Vec<ItemSet>,
    pub ratios: Vec<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicySearchResult<S> {
    pub best: PolicyOutcome<S>,
    pub score: S,
    /// Number of non-dominated outcome vectors that were compared.
    pub frontier_size: usize,
}

struct Search<'a, S> {
    inst: &'a Instance<S>,
    capacities: &'a [u64],
    cancellation: bool,
}

type Partial = (Vec<ItemSet>, DecisionTree);

impl<S: Scalar> Search<'_, S> {
    fn values(&self, packed: &[ItemSet], group: &[usize]) -> Vec<S> {
        group.iter().map(|&c| self.inst.value(packed[c])).collect()
    }

    /// Keeps outcomes whose value vectors over `group` are not dominated.
    fn prune(&self, outcomes: Vec<Partial>, group: &[usize]) -> Vec<Partial> {
        let vals: Vec<Vec<S>> = outcomes.iter().map(|(p, _)| self.values(p, group)).collect();
        let dominated = |a: usize, b: usize| {
            // b dominates a (ties resolved toward the earlier entry)
            let ge = vals[b].iter().zip(&vals[a]).all(|(x, y)| x >= y);
            let gt = vals[b].iter().zip(&vals[a]).any(|(x, y)| x > y);
            ge && (gt || b < a)
        };
        let keep: Vec<bool> = (0..outcomes.len())
            .map(|a| !(0..outcomes.len()).any(|b| b != a && dominated(a, b)))
            .collect();
        outcomes
            .into_iter()
            .zip(keep)
            .filter_map(|(o, k)| k.then_some(o))
            .collect()
    }

    fn stop(&self, x: ItemSet, group: &[usize]) -> Partial {
        let mut packed = vec![ItemSet::EMPTY; self.capacities.len()];
        for &c in group {
            packed[c] = x;
        }
        (packed, DecisionTree::Stop)
    }

    fn explore(&self, x: ItemSet, used: u64, tried: ItemSet, group: &[usize]) -> Vec<Partial> {
        if group.is_empty() {
            return vec![self.stop(x, group)];
        }
        let mut out = vec![self.stop(x, group)];
        for i in self.inst.all_items().difference(tried).iter() {
            let s = self.inst.size(i);
            let (fit, misfit): (Vec<usize>, Vec<usize>) = group
                .iter()
                .partition(|&&c| used + s <= self.capacities[c]);
            let fit_out = self.explore(x.with(i), used + s, tried.with(i), &fit);
            let misfit_out = if self.cancellation {
                self.explore(x, used, tried.with(i), &misfit)
            } else {
                vec![self.stop(x, &misfit)]
            };
            for (fp, ft) in &fit_out {
                for (mp, mt) in &misfit_out {
                    let mut packed = vec![ItemSet::EMPTY; self.capacities.len()];
                    for &c in &fit {
                        packed[c] = fp[c];
                    }
                    for &c in &misfit {
                        packed[c] = mp[c];
                    }
                    let tree = DecisionTree::node(
                        i,
                        if fit.is_empty() { DecisionTree::Stop } else { ft.clone() },
                        if misfit.is_empty() { DecisionTree::Stop } else { mt.clone() },
                    );
                    out.push((packed, tree));
                }
            }
        }
        self.prune(out, group)
    }
}

fn ratio<S: Scalar>(value: S, opt: &S) -> S {
    if opt.is_zero() {
        S::one()
    } else {
        value / opt.clone()
    }
}

/// Every non-dominated deterministic adaptive policy over `capacities`,
/// with per-capacity ratios against `OPT_C`.
pub fn policy_frontier<S: Scalar>(
    inst: &Instance<S>,
    capacities: &[u64],
    cancellation: bool,
) -> Result<Vec<PolicyOutcome<S>>> {
    if inst.n() > POLICY_SEARCH_LIMIT {
        return Err(Error::capability("exhaustive policy search", inst.n(), POLICY_SEARCH_LIMIT));
    }
    if capacities.is_empty() {
        return Err(Error::InvalidParameter("capacity set is empty".into()));
    }
    let opt = OptOracle::new(inst)?;
    let opts: Vec<S> = capacities.iter().map(|&c| opt.opt_value(c)).collect();
    let search = Search {
        inst,
        capacities,
        cancellation,
    };
    let group: Vec<usize> = (0..capacities.len()).collect();
    Ok(search
        .explore(ItemSet::EMPTY, 0, ItemSet::EMPTY, &group)
        .into_iter()
        .map(|(packed, tree)| {
            let ratios = packed
                .iter()
                .zip(&opts)
                .map(|(p, o)| ratio(inst.value(*p), o))
                .collect();
            PolicyOutcome { tree, packed, ratios }
        })
        .collect())
}

pub fn score<S: Scalar>(ratios: &[S], objective: &SearchObjective<S>) -> S {
    match objective {
        SearchObjective::Expected(w) => ratios
            .iter()
            .zip(w)
            .fold(S::zero(), |acc, (r, w)| acc + r.clone() * w.clone()),
        SearchObjective::WorstCase => ratios
            .iter()
            .cloned()
            .reduce(S::min_of)
            .unwrap_or_else(S::one),
    }
}

/// Best deterministic adaptive policy for the objective (first found among
/// equal scores).
pub fn exhaustive_policy_search<S: Scalar>(
    inst: &Instance<S>,
    capacities: &[u64],
    objective: &SearchObjective<S>,
    cancellation: bool,
) -> Result<PolicySearchResult<S>> {
    if let SearchObjective::Expected(w) = objective {
        if w.len() != capacities.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weights for {} capacities",
                w.len(),
                capacities.len()
            )));
        }
    }
    let frontier = policy_frontier(inst, capacities, cancellation)?;
    let frontier_size = frontier.len();
    let mut best: Option<(PolicyOutcome<S>, S)> = None;
    for o in frontier {
        let s = score(&o.ratios, objective);
        if best.as_ref().is_none_or(|(_, b)| s > *b) {
            best = Some((o, s));
        }
    }
    let (best, score) = best.expect("frontier contains at least the empty policy");
    Ok(PolicySearchResult {
        best,
        score,
        frontier_size,
    })
}

/// Best policy for each possible first item (`None` for the empty policy).
pub fn best_by_first_item<S: Scalar>(
    frontier: &[PolicyOutcome<S>],
    objective: &SearchObjective<S>,
) -> Vec<(Option<usize>, PolicyOutcome<S>, S)> {
    let mut best: Vec<(Option<usize>, PolicyOutcome<S>, S)> = Vec::new();
    for o in frontier {
        let root = o.tree.root_item();
        let s = score(&o.ratios, objective);
        match best.iter_mut().find(|(r, _, _)| *r == root) {
            Some(entry) if s > entry.2 => *entry = (root, o.clone(), s),
            Some(_) => {}
            None => best.push((root, o.clone(), s)),
        }
    }
    best.sort_by_key(|(r, _, _)| r.map_or(0, |i| i + 1));
    best
}

/// Worst-case ratio of playing `a` with probability `p` and `b` otherwise.
pub fn mixture_worst_case<S: Scalar>(a: &[S], b: &[S], p: &S) -> S {
    a.iter()
        .zip(b)
        .map(|(x, y)| p.clone() * x.clone() + (S::one() - p.clone()) * y.clone())
        .reduce(S::min_of)
        .unwrap_or_else(S::one)
}
