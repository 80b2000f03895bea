//! Dense two-phase simplex for `min c'x  s.t.  A x <= b` with free `x`.
//!
//! Free variables are split as `x = u - v`; every row gets a slack and rows
//! with a negative right-hand side get an artificial. Bland's rule keeps the
//! method finite on degenerate problems, which the vertex-heavy fixtures
//! produce constantly.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::FEAS_TOL;

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        value: f64,
    },
    Infeasible,
    /// The objective decreases without bound along `direction` (with
    /// `A direction <= 0`).
    Unbounded {
        direction: Vec<f64>,
    },
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut z = cost.to_vec();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (zj, v) in z.iter_mut().zip(row) {
                    *zj -= cb * v;
                }
            }
        }
        z
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        (0..self.rows.len()).map(|i| cost[self.basis[i]] * self.rhs(i)).sum()
    }

    /// Runs simplex iterations; returns the unbounded entering column if any.
    fn optimize(&mut self, cost: &[f64], allowed: usize, budget: &mut usize) -> Result<Option<usize>> {
        loop {
            if *budget == 0 {
                return Err(Error::SolverFailure { iterations: 0, best: Vec::new() });
            }
            *budget -= 1;
            let z = self.reduced_costs(cost);
            let Some(enter) = (0..allowed).find(|&j| z[j] < -COST_TOL) else {
                return Ok(None);
            };
            let mut leave: Option<usize> = None;
            let mut best = f64::INFINITY;
            for i in 0..self.rows.len() {
                let a = self.rows[i][enter];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    let better = match leave {
                        None => true,
                        Some(l) => ratio < best - 1e-14 || (ratio <= best + 1e-14 && self.basis[i] < self.basis[l]),
                    };
                    if better {
                        best = ratio;
                        leave = Some(i);
                    }
                }
            }
            match leave {
                Some(r) => self.pivot(r, enter),
                None => return Ok(Some(enter)),
            }
        }
    }
}

/// Solves `min c'x s.t. A x <= b`. `a_rows[i]` is the i-th constraint row.
pub fn solve_lp(c: &[f64], a_rows: &[Vec<f64>], b: &[f64]) -> Result<LpOutcome> {
    let n = c.len();
    let m = a_rows.len();
    Error::check_dim(m, b.len())?;
    for row in a_rows {
        Error::check_dim(n, row.len())?;
    }

    let negative: Vec<usize> = (0..m).filter(|&i| b[i] < 0.0).collect();
    let n_art = negative.len();
    // columns: u (n), v (n), slack (m), artificial (n_art)
    let cols = 2 * n + m + n_art;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art = 0;
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; cols + 1];
        for j in 0..n {
            row[j] = sign * a_rows[i][j];
            row[n + j] = -sign * a_rows[i][j];
        }
        row[2 * n + i] = sign;
        row[cols] = sign * b[i];
        if b[i] < 0.0 {
            row[2 * n + m + art] = 1.0;
            basis.push(2 * n + m + art);
            art += 1;
        } else {
            basis.push(2 * n + i);
        }
        rows.push(row);
    }
    let mut t = Tableau { rows, basis, cols };
    let mut budget = 200 * (m + cols + 1);
    let scale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));

    if n_art > 0 {
        let mut phase1 = vec![0.0; cols];
        for j in 2 * n + m..cols {
            phase1[j] = 1.0;
        }
        t.optimize(&phase1, cols, &mut budget)?;
        if t.objective(&phase1) > FEAS_TOL * scale {
            return Ok(LpOutcome::Infeasible);
        }
        // push remaining (zero-valued) artificials out of the basis
        for i in 0..m {
            if t.basis[i] >= 2 * n + m {
                if let Some(j) = (0..2 * n + m).find(|&j| t.rows[i][j].abs() > 1e-9) {
                    t.pivot(i, j);
                }
            }
        }
    }

    let mut cost = vec![0.0; cols];
    for j in 0..n {
        cost[j] = c[j];
        cost[n + j] = -c[j];
    }
    let allowed = 2 * n + m;
    if let Some(enter) = t.optimize(&cost, allowed, &mut budget)? {
        let mut z = vec![0.0; cols];
        z[enter] = 1.0;
        for i in 0..m {
            z[t.basis[i]] -= t.rows[i][enter];
        }
        let direction = (0..n).map(|j| z[j] - z[n + j]).collect();
        return Ok(LpOutcome::Unbounded { direction });
    }

    let mut z = vec![0.0; cols];
    for i in 0..m {
        z[t.basis[i]] = t.rhs(i);
    }
    let x: Vec<f64> = (0..n).map(|j| z[j] - z[n + j]).collect();
    let value = crate::linalg::dot(c, &x);
    Ok(LpOutcome::Optimal { x, value })
}

/// Any point of `{x : A x <= b}`, or `None` if the system is infeasible.
pub fn feasible_point(dim: usize, a_rows: &[Vec<f64>], b: &[f64]) -> Result<Option<Vec<f64>>> {
    match solve_lp(&vec![0.0; dim], a_rows, b)? {
        LpOutcome::Optimal { x, .. } => Ok(Some(x)),
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded { .. } => unreachable!("zero objective is bounded"),
    }
}
