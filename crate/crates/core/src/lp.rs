//! Dense two-phase simplex over exact rationals.
//!
//! Solves `maximize c·x subject to A x = b, x >= 0`. Bland's rule is used
//! for both entering and leaving variables, so the method terminates on
//! degenerate problems. Sizes here are tiny (tens of variables), so the
//! tableau is recomputed naively.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { value: Rational, x: Vec<Rational> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v /= &p;
        }
        self.rhs[row] /= &p;
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let factor = self.rows[r][col].clone();
            for (v, pv) in self.rows[r].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
            self.rhs[r] -= &factor * &pivot_rhs;
        }
        self.basis[row] = col;
    }

    /// Runs simplex iterations for `cost` over the columns allowed by `usable`.
    /// Returns false if the objective is unbounded.
    fn optimize(&mut self, cost: &[Rational], usable: &dyn Fn(usize) -> bool) -> bool {
        let ncols = cost.len();
        loop {
            let mut entering = None;
            for j in 0..ncols {
                if !usable(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut reduced = cost[j].clone();
                for (r, &b) in self.basis.iter().enumerate() {
                    if !self.rows[r][j].is_zero() {
                        reduced -= &cost[b] * &self.rows[r][j];
                    }
                }
                if reduced.is_positive() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else { return true };

            let mut leaving: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &leaving {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leaving = Some((r, ratio));
                }
            }
            let Some((row, _)) = leaving else {
                return false;
            };
            self.pivot(row, col);
        }
    }
}

pub(crate) fn maximize(cost: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> LpOutcome {
    let n = cost.len();
    let m = a.len();
    debug_assert!(a.iter().all(|row| row.len() == n));

    // Columns 0..n are structural, n..n+m artificial.
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (i, (row, bi)) in a.iter().zip(b).enumerate() {
        let flip = bi.is_negative();
        let mut full: Vec<Rational> = row
            .iter()
            .map(|v| if flip { -v } else { v.clone() })
            .collect();
        full.extend((0..m).map(|k| {
            if k == i {
                Rational::one()
            } else {
                Rational::zero()
            }
        }));
        rows.push(full);
        rhs.push(if flip { -bi } else { bi.clone() });
    }
    let mut t = Tableau {
        rows,
        rhs,
        basis: (n..n + m).collect(),
    };

    let phase_one: Vec<Rational> = (0..n + m)
        .map(|j| {
            if j >= n {
                -Rational::one()
            } else {
                Rational::zero()
            }
        })
        .collect();
    t.optimize(&phase_one, &|_| true);
    let infeasibility: Rational = t
        .basis
        .iter()
        .zip(&t.rhs)
        .filter(|(&b, _)| b >= n)
        .map(|(_, v)| v.clone())
        .sum();
    if infeasibility.is_positive() {
        return LpOutcome::Infeasible;
    }

    // Drive zero-valued artificials out of the basis; drop redundant rows.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n {
            match (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                Some(col) => t.pivot(r, col),
                None => {
                    t.rows.remove(r);
                    t.rhs.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    let phase_two: Vec<Rational> = (0..n + m)
        .map(|j| {
            if j < n {
                cost[j].clone()
            } else {
                Rational::zero()
            }
        })
        .collect();
    if !t.optimize(&phase_two, &|j| j < n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (&b, v) in t.basis.iter().zip(&t.rhs) {
        if b < n {
            x[b] = v.clone();
        }
    }
    let value = cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpOutcome::Optimal { value, x }
}

/// True iff `target` is a convex combination of `points`.
pub(crate) fn in_convex_hull(points: &[Vec<Rational>], target: &[Rational]) -> bool {
    if points.is_empty() {
        return false;
    }
    let d = target.len();
    let mut a: Vec<Vec<Rational>> = (0..d)
        .map(|i| points.iter().map(|p| p[i].clone()).collect())
        .collect();
    a.push(vec![Rational::one(); points.len()]);
    let mut b = target.to_vec();
    b.push(Rational::one());
    let cost = vec![Rational::zero(); points.len()];
    matches!(maximize(&cost, &a, &b), LpOutcome::Optimal { .. })
}

/// Largest `t` such that some convex combination `y` of `points` satisfies
/// `y[i] >= target[i] + t` for every `i` in `coords`.
pub(crate) fn max_uniform_improvement(
    points: &[Vec<Rational>],
    coords: &[usize],
    target: &[Rational],
) -> Rational {
    // variables: lambda (|points|), t+ , t-, surplus (|coords|)
    let np = points.len();
    let k = coords.len();
    let nvars = np + 2 + k;
    let mut a = Vec::with_capacity(k + 1);
    let mut b = Vec::with_capacity(k + 1);
    for (row, &c) in coords.iter().enumerate() {
        let mut r = vec![Rational::zero(); nvars];
        for (j, p) in points.iter().enumerate() {
            r[j] = p[c].clone();
        }
        r[np] = -Rational::one();
        r[np + 1] = Rational::one();
        r[np + 2 + row] = -Rational::one();
        a.push(r);
        b.push(target[c].clone());
    }
    let mut convex = vec![Rational::zero(); nvars];
    for v in convex.iter_mut().take(np) {
        *v = Rational::one();
    }
    a.push(convex);
    b.push(Rational::one());
    let mut cost = vec![Rational::zero(); nvars];
    cost[np] = Rational::one();
    cost[np + 1] = -Rational::one();
    match maximize(&cost, &a, &b) {
        LpOutcome::Optimal { value, .. } => value,
        other => unreachable!("improvement LP is feasible and bounded: {other:?}"),
    }
}

/// Value of the zero-sum matrix game where the row player maximises.
///
/// Returns `(value, row_strategy, column_strategy)`.
pub(crate) fn matrix_game(payoff: &[Vec<Rational>]) -> (Rational, Vec<Rational>, Vec<Rational>) {
    let rows = payoff.len();
    let cols = payoff[0].len();

    // Row player: maximise v s.t. sum_a x_a A[a][b] - v - s_b = 0, sum x = 1.
    // variables: x (rows), v+, v-, s (cols)
    let nvars = rows + 2 + cols;
    let mut a = Vec::with_capacity(cols + 1);
    let mut b = Vec::with_capacity(cols + 1);
    for c in 0..cols {
        let mut r = vec![Rational::zero(); nvars];
        for (i, row) in payoff.iter().enumerate() {
            r[i] = row[c].clone();
        }
        r[rows] = -Rational::one();
        r[rows + 1] = Rational::one();
        r[rows + 2 + c] = -Rational::one();
        a.push(r);
        b.push(Rational::zero());
    }
    let mut simplex_row = vec![Rational::zero(); nvars];
    for v in simplex_row.iter_mut().take(rows) {
        *v = Rational::one();
    }
    a.push(simplex_row);
    b.push(Rational::one());
    let mut cost = vec![Rational::zero(); nvars];
    cost[rows] = Rational::one();
    cost[rows + 1] = -Rational::one();
    let LpOutcome::Optimal { value, x } = maximize(&cost, &a, &b) else {
        unreachable!("finite matrix games always have a value")
    };
    let row_strategy = x[..rows].to_vec();

    // Column player: maximise -w s.t. sum_b y_b A[a][b] - w + s_a = 0, sum y = 1.
    let nvars = cols + 2 + rows;
    let mut a = Vec::with_capacity(rows + 1);
    let mut b = Vec::with_capacity(rows + 1);
    for (i, prow) in payoff.iter().enumerate() {
        let mut r = vec![Rational::zero(); nvars];
        r[..cols].clone_from_slice(prow);
        r[cols] = -Rational::one();
        r[cols + 1] = Rational::one();
        r[cols + 2 + i] = Rational::one();
        a.push(r);
        b.push(Rational::zero());
    }
    let mut simplex_row = vec![Rational::zero(); nvars];
    for v in simplex_row.iter_mut().take(cols) {
        *v = Rational::one();
    }
    a.push(simplex_row);
    b.push(Rational::one());
    let mut cost = vec![Rational::zero(); nvars];
    cost[cols] = -Rational::one();
    cost[cols + 1] = Rational::one();
    let LpOutcome::Optimal { value: neg, x: y } = maximize(&cost, &a, &b) else {
        unreachable!("finite matrix games always have a value")
    };
    debug_assert_eq!(-neg, value);
    (value, row_strategy, y[..cols].to_vec())
}
