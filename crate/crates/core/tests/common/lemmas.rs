//! Instrumented checks of the greedy and single-valuable inequalities,
//! evaluated against an exhaustive subset table.

use submod_knapsack::instances::Instance;
use submod_knapsack::oracle::{OptOracle, SubsetTable};
use submod_knapsack::policies::{deterministic_policy, greedy_policy, CapacityOracle, PolicyConfig};
use submod_knapsack::ItemSet;

const TOL: f64 = 1e-9;

#[derive(Clone, Debug, Default)]
pub struct Tally {
    pub checked: u64,
    pub skipped: u64,
    pub violations: u64,
    /// The first few violations, described.
    pub examples: Vec<String>,
}

impl Tally {
    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.examples.len() < 10 {
                self.examples.push(what());
            }
        }
    }

    pub fn clean(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Clone, Debug, Default)]
pub struct LemmaCounts {
    /// Greedy prefix bound, for every prefix.
    pub greedy_prefix: Tally,
    /// Before the first spilled optimal item the prefix holds only packed items.
    pub greedy_prefix_packed: Tally,
    /// Density step bound.
    pub density_step: Tally,
    /// `f({i}) ≤ max{f(U), 2 f(OPT_{s(i)/2})}`.
    pub single_item: Tally,
    /// `f(OPT_{2x}) ≤ 3 f(OPT_x)` for `x ∈ [s*, C/2]`.
    pub doubling: Tally,
    /// `f(OPT_C) ≤ 7 f(OPT_{s*})` when `s* ≥ C/3`.
    pub claim_large: Tally,
    /// `f(OPT_{s*}) ≤ (3/2) f({i*})` when `s* ≥ C/3`.
    pub claim_anchor: Tally,
    /// The packed anchor is the most valuable fitting single-valuable item.
    pub anchor_choice: Tally,
}

impl LemmaCounts {
    pub fn tallies(&self) -> [(&'static str, &Tally); 8] {
        [
            ("greedy prefix bound", &self.greedy_prefix),
            ("greedy prefix before first spill", &self.greedy_prefix_packed),
            ("density step bound", &self.density_step),
            ("single item bound", &self.single_item),
            ("optimum doubling bound", &self.doubling),
            ("large-anchor optimum bound", &self.claim_large),
            ("anchor value bound", &self.claim_anchor),
            ("anchor is the best fitting single-valuable item", &self.anchor_choice),
        ]
    }

    pub fn clean(&self) -> bool {
        self.tallies().iter().all(|(_, t)| t.clean())
    }
}

fn prefix(order: &[usize], j: usize) -> ItemSet {
    order[..j].iter().copied().collect()
}

/// Greedy-run checks for one `(C, U)` against every `C′ ∈ 1..=T`.
fn greedy_checks(inst: &Instance<f64>, table: &SubsetTable<f64>, opt: &OptOracle<f64>, c: u64, u: ItemSet, out: &mut LemmaCounts) {
    let mut oracle = CapacityOracle::with_packed(c, inst.set_size(u));
    let trace = greedy_policy(inst, u, &mut oracle).unwrap();
    let order = &trace.greedy_order;
    let packed = trace.packed;
    for c2 in 1..=inst.total_size() {
        let o = opt.opt(c2);
        let q = order
            .iter()
            .position(|&i| o.set.contains(i) && !packed.contains(i))
            .unwrap_or(order.len());
        for j in 0..=order.len() {
            let pre = prefix(order, j);
            let z = packed.union(o.set).intersection(pre);
            let lhs = *table.value(z.union(u));
            let rhs = (1.0 - (-(inst.set_size(z) as f64) / c2 as f64).exp()) * o.value;
            out.greedy_prefix.record(lhs + TOL >= rhs, || {
                format!("C={c} U={u:?} C'={c2} j={j}: {lhs} < {rhs}")
            });
            if j < q {
                out.greedy_prefix_packed
                    .record(z == packed.intersection(pre), || format!("C={c} U={u:?} C'={c2} j={j}"));
            }
            if j == order.len() {
                continue;
            }
            // step j+1: X is the packed set, Y everything tried so far
            let i = order[j];
            let x = u.union(packed.intersection(pre));
            let y = u.union(pre);
            if !o.set.difference(x).intersection(y).is_empty() {
                out.density_step.skipped += 1;
                continue;
            }
            let fx = *table.value(x);
            let gain = *table.value(x.with(i)) - fx;
            let rhs = inst.size(i) as f64 / c2 as f64 * (o.value - fx);
            out.density_step.record(gain + TOL >= rhs, || {
                format!("C={c} U={u:?} C'={c2} step {}: {gain} < {rhs}", j + 1)
            });
        }
    }
}

/// Deterministic-policy checks at capacity `C`.
fn deterministic_checks(inst: &Instance<f64>, opt: &OptOracle<f64>, c: u64, out: &mut LemmaCounts) {
    let trace = deterministic_policy(inst, &mut CapacityOracle::new(c), &PolicyConfig::default()).unwrap();
    let d = trace.deterministic.expect("deterministic details");
    let fu = inst.value(d.u);
    for i in 0..inst.n() {
        if inst.size(i) > c {
            continue;
        }
        let fi = inst.singleton_value(i);
        let bound = fu.max(2.0 * opt.opt_value(inst.size(i) / 2));
        out.single_item
            .record(fi <= bound + TOL, || format!("C={c} i={i}: {fi} > {bound}"));
    }
    let mut best: Option<usize> = None;
    for i in d.single_valuable.iter().filter(|&i| inst.size(i) <= c) {
        if best.is_none_or(|b| inst.singleton_value(i) > inst.singleton_value(b)) {
            best = Some(i);
        }
    }
    let same_value = match (d.i_star, best) {
        (Some(a), Some(b)) => inst.singleton_value(a) == inst.singleton_value(b),
        (a, b) => a == b,
    };
    out.anchor_choice
        .record(same_value, || format!("C={c}: anchor {:?}, best {best:?}", d.i_star));
    let s_star = d.s_star;
    if 2 * s_star <= c {
        // x = k/2 for every half-integer in [s*, C/2]
        for k in (2 * s_star).max(1)..=c {
            let big = opt.opt_value(k);
            let small = opt.opt_value(k / 2);
            out.doubling
                .record(big <= 3.0 * small + TOL, || format!("C={c} x={}/2: {big} > 3·{small}", k));
        }
    } else {
        out.doubling.skipped += 1;
    }
    match d.i_star {
        Some(i_star) if 3 * s_star >= c => {
            let at_c = opt.opt_value(c);
            let at_s = opt.opt_value(s_star);
            out.claim_large
                .record(at_c <= 7.0 * at_s + TOL, || format!("C={c}: {at_c} > 7·{at_s}"));
            let fi = inst.singleton_value(i_star);
            out.claim_anchor
                .record(at_s <= 1.5 * fi + TOL, || format!("C={c}: {at_s} > 1.5·{fi}"));
        }
        _ => {
            out.claim_large.skipped += 1;
            out.claim_anchor.skipped += 1;
        }
    }
}

/// Runs every check on one instance over all capacities `1..=T`. The greedy
/// is started from `U = ∅` and from one fitting singleton per capacity.
pub fn check_instance(inst: &Instance<f64>, out: &mut LemmaCounts) {
    let table = SubsetTable::build(inst).unwrap();
    let opt = OptOracle::from_table(inst, &table);
    let n = inst.n();
    for c in 1..=inst.total_size() {
        greedy_checks(inst, &table, &opt, c, ItemSet::EMPTY, out);
        let fitting: Vec<usize> = (0..n).filter(|&i| inst.size(i) <= c).collect();
        if !fitting.is_empty() {
            let u = fitting[c as usize % fitting.len()];
            greedy_checks(inst, &table, &opt, c, ItemSet::singleton(u), out);
        }
        deterministic_checks(inst, &opt, c, out);
    }
}
