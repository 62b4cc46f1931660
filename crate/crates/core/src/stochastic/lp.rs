use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `{v ≥ 0 : A·v ≤ b}` with a dense constraint matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearPolytope<S> {
    dim: usize,
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
}

impl<S: Scalar> LinearPolytope<S> {
    pub fn new(dim: usize) -> Self {
        LinearPolytope {
            dim,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    /// Adds `Σ coeff·v_j ≤ bound` from sparse `(j, coeff)` terms; repeated
    /// indices accumulate.
    pub fn add_constraint(&mut self, terms: &[(usize, S)], bound: S) -> Result<()> {
        let mut row = vec![S::zero(); self.dim];
        for (j, a) in terms {
            if *j >= self.dim {
                return Err(Error::InvalidParameter(format!(
                    "variable {j} out of range for dimension {}",
                    self.dim
                )));
            }
            row[*j] = row[*j].clone() + a.clone();
        }
        self.rows.push(row);
        self.rhs.push(bound);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    pub fn rhs(&self) -> &[S] {
        &self.rhs
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().flatten().filter(|a| !a.is_zero()).count()
    }

    /// All coefficients nonnegative and the origin feasible.
    pub fn is_downward_closed(&self) -> bool {
        self.rows.iter().flatten().all(|a| *a >= S::zero()) && self.rhs.iter().all(|b| *b >= S::zero())
    }

    /// `b − A·v` per constraint.
    pub fn slacks(&self, v: &[S]) -> Vec<S> {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| {
                row.iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .fold(b.clone(), |acc, (a, x)| acc - a.clone() * x.clone())
            })
            .collect()
    }

    /// Largest violation of `A·v ≤ b` or `v ≥ 0` (zero when feasible).
    pub fn max_violation(&self, v: &[S]) -> S {
        let worst_row = self.slacks(v).into_iter().map(|s| -s).fold(S::zero(), S::max_of);
        let worst_sign = v.iter().map(|x| -x.clone()).fold(S::zero(), S::max_of);
        S::max_of(worst_row, worst_sign)
    }

    /// Feasibility with slack `tol` on every inequality.
    pub fn contains(&self, v: &[S], tol: &S) -> bool {
        v.len() == self.dim && self.max_violation(v) <= *tol
    }
}

/// Optimal vertex of an LP.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpSolution<S> {
    pub x: Vec<S>,
    pub value: S,
    pub pivots: usize,
}

/// Maximizes `c·v` over the polytope with the dense primal simplex and
/// Bland's rule, starting from the slack basis. Requires `b ≥ 0`.
pub fn lp_maximize<S: Scalar>(poly: &LinearPolytope<S>, c: &[S]) -> Result<LpSolution<S>> {
    let d = poly.dim;
    let m = poly.rows.len();
    if c.len() != d {
        return Err(Error::InvalidParameter(format!(
            "objective has {} weights for dimension {d}",
            c.len()
        )));
    }
    if let Some(j) = c.iter().position(|w| !w.to_f64_lossy().is_finite()) {
        return Err(Error::InvalidParameter(format!("objective weight {j} is not finite")));
    }
    if let Some(i) = poly.rhs.iter().position(|b| *b < S::zero()) {
        return Err(Error::Solver(format!(
            "origin infeasible: constraint {i} has negative bound {}",
            poly.rhs[i].render()
        )));
    }
    let tol = S::tolerance();
    let width = d + m + 1;
    // rows 0..m constraints, row m the reduced-cost row (−c, 0, value)
    let mut tab: Vec<Vec<S>> = Vec::with_capacity(m + 1);
    for (i, row) in poly.rows.iter().enumerate() {
        let mut r = row.clone();
        r.resize(width, S::zero());
        r[d + i] = S::one();
        r[width - 1] = poly.rhs[i].clone();
        tab.push(r);
    }
    let mut obj: Vec<S> = c.iter().map(|w| -w.clone()).collect();
    obj.resize(width, S::zero());
    tab.push(obj);
    let mut basis: Vec<usize> = (d..d + m).collect();
    let limit = 50 * (d + m) + 1000;
    let mut pivots = 0;
    while let Some(enter) = (0..d + m).find(|&j| tab[m][j] < -tol.clone()) {
        let mut leave: Option<(usize, S)> = None;
        for i in 0..m {
            let a = &tab[i][enter];
            if *a > tol {
                let ratio = tab[i][width - 1].clone() / a.clone();
                let better = match &leave {
                    None => true,
                    Some((l, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, _)) = leave else {
            return Err(Error::Solver(format!(
                "objective unbounded along variable {enter} after {pivots} pivots"
            )));
        };
        pivot(&mut tab, row, enter);
        basis[row] = enter;
        pivots += 1;
        if pivots > limit {
            return Err(Error::Solver(format!(
                "no convergence after {pivots} pivots ({m} constraints, {d} variables)"
            )));
        }
    }
    let mut x = vec![S::zero(); d];
    for (i, &b) in basis.iter().enumerate() {
        if b < d {
            let v = tab[i][width - 1].clone();
            x[b] = if v < S::zero() { S::zero() } else { v };
        }
    }
    let value = x
        .iter()
        .zip(c)
        .fold(S::zero(), |acc, (v, w)| acc + v.clone() * w.clone());
    Ok(LpSolution { x, value, pivots })
}

fn pivot<S: Scalar>(tab: &mut [Vec<S>], row: usize, col: usize) {
    let p = tab[row][col].clone();
    for a in tab[row].iter_mut() {
        if !a.is_zero() {
            *a = a.clone() / p.clone();
        }
    }
    let pivot_row = tab[row].clone();
    for (i, r) in tab.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let factor = r[col].clone();
        for (a, pa) in r.iter_mut().zip(&pivot_row) {
            if !pa.is_zero() {
                *a = a.clone() - factor.clone() * pa.clone();
            }
        }
    }
}
