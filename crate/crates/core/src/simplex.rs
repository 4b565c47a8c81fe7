//! Dense exact-rational primal simplex for `max c·v  s.t.  A v ≤ b, v ≥ 0`
//! with `b ≥ 0`, so the origin is always a feasible starting basis.
//!
//! Pivoting follows Bland's rule: the entering column is the lowest-index
//! column with positive reduced cost, and ratio-test ties leave on the
//! lowest-index basic variable. This terminates on degenerate problems and
//! makes the returned vertex a pure function of the input.

use num_traits::{Signed, Zero};

use crate::rational::Q;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimplexError {
    NegativeRhs(usize),
    Unbounded,
    Shape(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    pub rows: Vec<Vec<Q>>,
    pub rhs: Vec<Q>,
}

impl LinearProgram {
    pub fn num_vars(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplexSolution {
    pub values: Vec<Q>,
    /// One entry per objective, in priority order.
    pub objectives: Vec<Q>,
    pub pivots: usize,
}

struct Tableau {
    /// `m` rows of `n + m + 1` entries; the last column is the right-hand side.
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn pivot(&mut self, r: usize, c: usize, costs: &mut [Vec<Q>]) {
        let piv = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v /= &piv;
            }
        }
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut Vec<Q>| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        for cost in costs.iter_mut() {
            eliminate(cost);
        }
        self.basis[r] = c;
    }
}

/// Maximizes `objectives[0]`, then `objectives[1]` over the optimal face of
/// the first, and so on.
pub fn maximize_lex(lp: &LinearProgram, objectives: &[Vec<Q>]) -> Result<SimplexSolution, SimplexError> {
    let m = lp.rows.len();
    let n = lp.num_vars();
    if lp.rhs.len() != m || lp.rows.iter().any(|r| r.len() != n) {
        return Err(SimplexError::Shape("ragged constraint matrix".into()));
    }
    if objectives.is_empty() || objectives.iter().any(|c| c.len() != n) {
        return Err(SimplexError::Shape("objective length mismatch".into()));
    }
    if let Some(i) = lp.rhs.iter().position(Signed::is_negative) {
        return Err(SimplexError::NegativeRhs(i));
    }

    let width = n + m + 1;
    let mut rows = Vec::with_capacity(m);
    for (i, (a, b)) in lp.rows.iter().zip(&lp.rhs).enumerate() {
        let mut row = vec![Q::zero(); width];
        row[..n].clone_from_slice(a);
        row[n + i] = Q::from_integer(1.into());
        row[width - 1] = b.clone();
        rows.push(row);
    }
    let mut t = Tableau { rows, basis: (n..n + m).collect(), width };

    // Reduced-cost rows; the last entry holds −(objective value).
    let mut costs: Vec<Vec<Q>> = objectives
        .iter()
        .map(|c| {
            let mut row = vec![Q::zero(); width];
            row[..n].clone_from_slice(c);
            row
        })
        .collect();

    let mut frozen = vec![false; width - 1];
    let mut pivots = 0;
    for level in 0..costs.len() {
        loop {
            let entering = (0..width - 1).find(|&j| !frozen[j] && costs[level][j].is_positive());
            let Some(c) = entering else { break };
            let rhs = t.rhs_col();
            let mut best: Option<(usize, Q)> = None;
            for i in 0..m {
                let a = &t.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &t.rows[i][rhs] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && t.basis[i] < t.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else { return Err(SimplexError::Unbounded) };
            t.pivot(r, c, &mut costs);
            pivots += 1;
        }
        // Columns with strictly negative reduced cost stay at zero on the optimal face.
        for (j, f) in frozen.iter_mut().enumerate() {
            if costs[level][j].is_negative() {
                *f = true;
            }
        }
    }

    let mut values = vec![Q::zero(); n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            values[b] = t.rows[i][width - 1].clone();
        }
    }
    let objectives = objectives.iter().map(|c| c.iter().zip(&values).map(|(a, v)| a * v).sum()).collect();
    Ok(SimplexSolution { values, objectives, pivots })
}

pub fn maximize(lp: &LinearProgram, objective: &[Q]) -> Result<SimplexSolution, SimplexError> {
    maximize_lex(lp, &[objective.to_vec()])
}
