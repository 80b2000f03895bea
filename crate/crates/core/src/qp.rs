//! Convex quadratic programs `min 1/2 x'Qx + c'x  s.t.  A x <= b`.
//!
//! Strictly convex problems go through a primal active-set method started
//! from a phase-one feasible point. Merely semidefinite `Q` falls back to
//! enumerating working sets with a nonsingular KKT matrix, which is fine at
//! the sizes this crate handles.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{dot, for_each_combination, rank, solve_square};
use crate::lp::{feasible_point, solve_lp, LpOutcome};
use crate::FEAS_TOL;

#[derive(Debug, Clone, PartialEq)]
pub enum QpOutcome {
    Optimal {
        x: Vec<f64>,
        /// One multiplier per constraint row, zero for rows outside the
        /// final working set.
        multipliers: Vec<f64>,
        value: f64,
    },
    Infeasible,
    Unbounded,
}

pub fn objective(q: &DMatrix<f64>, c: &[f64], x: &[f64]) -> f64 {
    let xv = DVector::from_column_slice(x);
    0.5 * xv.dot(&(q * &xv)) + dot(c, x)
}

pub fn solve_qp(q: &DMatrix<f64>, c: &[f64], a_rows: &[Vec<f64>], b: &[f64]) -> Result<QpOutcome> {
    let n = c.len();
    Error::check_dim(n, q.nrows())?;
    Error::check_dim(n, q.ncols())?;
    Error::check_dim(a_rows.len(), b.len())?;
    for r in a_rows {
        Error::check_dim(n, r.len())?;
    }
    let Some(x0) = feasible_point(n, a_rows, b)? else {
        return Ok(QpOutcome::Infeasible);
    };
    let sym = (q + q.transpose()) * 0.5;
    if sym.clone().cholesky().is_some() {
        active_set(&sym, c, a_rows, b, x0)
    } else {
        enumerate_working_sets(&sym, c, a_rows, b)
    }
}

fn kkt_solve(
    q: &DMatrix<f64>,
    rhs_top: &DVector<f64>,
    a_rows: &[Vec<f64>],
    working: &[usize],
    rhs_bottom: &[f64],
) -> Option<(DVector<f64>, DVector<f64>)> {
    let n = q.nrows();
    let k = working.len();
    let mut kkt = DMatrix::<f64>::zeros(n + k, n + k);
    kkt.view_mut((0, 0), (n, n)).copy_from(q);
    for (r, &i) in working.iter().enumerate() {
        for j in 0..n {
            kkt[(n + r, j)] = a_rows[i][j];
            kkt[(j, n + r)] = a_rows[i][j];
        }
    }
    let mut rhs = DVector::<f64>::zeros(n + k);
    rhs.rows_mut(0, n).copy_from(rhs_top);
    for r in 0..k {
        rhs[n + r] = rhs_bottom[r];
    }
    let sol = solve_square(&kkt, &rhs)?;
    Some((sol.rows(0, n).into_owned(), sol.rows(n, k).into_owned()))
}

fn active_set(q: &DMatrix<f64>, c: &[f64], a_rows: &[Vec<f64>], b: &[f64], x0: Vec<f64>) -> Result<QpOutcome> {
    let n = c.len();
    let m = a_rows.len();
    let cv = DVector::from_column_slice(c);
    let mut x = DVector::from_vec(x0);
    let mut working: Vec<usize> = Vec::new();
    let max_iter = 50 * (n + m) + 100;
    let zeros = vec![0.0; m];

    for _ in 0..max_iter {
        let g = q * &x + &cv;
        let Some((p, lambda)) = kkt_solve(q, &(-&g), a_rows, &working, &zeros[..working.len()]) else {
            return Err(Error::SolverFailure { iterations: 0, best: x.iter().copied().collect() });
        };
        let step_scale = 1.0 + x.amax();
        if p.amax() <= 1e-13 * step_scale {
            let scale = 1.0 + g.amax();
            let most_negative = (0..working.len())
                .filter(|&r| lambda[r] < -1e-12 * scale)
                .min_by(|&r, &s| lambda[r].total_cmp(&lambda[s]));
            match most_negative {
                Some(r) => {
                    working.remove(r);
                }
                None => {
                    let mut multipliers = vec![0.0; m];
                    for (r, &i) in working.iter().enumerate() {
                        multipliers[i] = lambda[r].max(0.0);
                    }
                    let xs: Vec<f64> = x.iter().copied().collect();
                    let value = objective(q, c, &xs);
                    return Ok(QpOutcome::Optimal { x: xs, multipliers, value });
                }
            }
            continue;
        }

        let mut alpha = 1.0;
        let mut blocking = None;
        for i in 0..m {
            if working.contains(&i) {
                continue;
            }
            let ap = dot(&a_rows[i], p.as_slice());
            if ap > 1e-14 * (1.0 + p.amax()) {
                let slack = (b[i] - dot(&a_rows[i], x.as_slice())).max(0.0);
                let t = slack / ap;
                if t < alpha {
                    alpha = t;
                    blocking = Some(i);
                }
            }
        }
        x += &p * alpha;
        if let Some(i) = blocking {
            working.push(i);
        }
    }
    Err(Error::SolverFailure { iterations: max_iter, best: x.iter().copied().collect() })
}

fn enumerate_working_sets(q: &DMatrix<f64>, c: &[f64], a_rows: &[Vec<f64>], b: &[f64]) -> Result<QpOutcome> {
    let n = c.len();
    let m = a_rows.len();
    let neg_c = -DVector::from_column_slice(c);
    let scale = 1.0 + b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;

    for k in 0..=m.min(n) {
        for_each_combination(m, k, |w| {
            if k > 0 {
                let sub = DMatrix::from_fn(k, n, |r, j| a_rows[w[r]][j]);
                if rank(&sub) < k {
                    return;
                }
            }
            let rhs: Vec<f64> = w.iter().map(|&i| b[i]).collect();
            let Some((x, lambda)) = kkt_solve(q, &neg_c, a_rows, w, &rhs) else { return };
            if lambda.iter().any(|&l| l < -1e-10 * (1.0 + lambda.amax())) {
                return;
            }
            let xs: Vec<f64> = x.iter().copied().collect();
            if a_rows.iter().zip(b).any(|(r, bi)| dot(r, &xs) > bi + FEAS_TOL * scale) {
                return;
            }
            let value = objective(q, c, &xs);
            if best.as_ref().is_none_or(|(v, _, _)| value < *v - 1e-14) {
                let mut multipliers = vec![0.0; m];
                for (r, &i) in w.iter().enumerate() {
                    multipliers[i] = lambda[r].max(0.0);
                }
                best = Some((value, xs, multipliers));
            }
        });
    }
    if let Some((value, x, multipliers)) = best {
        return Ok(QpOutcome::Optimal { x, multipliers, value });
    }

    // No KKT point with a nonsingular working set: either unbounded below
    // or degenerate beyond what enumeration resolves.
    let mut rows: Vec<Vec<f64>> = a_rows.to_vec();
    let mut rhs = vec![0.0; m];
    for i in 0..n {
        let qi: Vec<f64> = (0..n).map(|j| q[(i, j)]).collect();
        rows.push(qi.clone());
        rows.push(qi.iter().map(|v| -v).collect());
        rhs.push(0.0);
        rhs.push(0.0);
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        rows.push(e.clone());
        rows.push(e.iter().map(|v| -v).collect());
        rhs.push(1.0);
        rhs.push(1.0);
    }
    if let LpOutcome::Optimal { value, .. } = solve_lp(c, &rows, &rhs)? {
        if value < -1e-9 {
            return Ok(QpOutcome::Unbounded);
        }
    }
    Err(Error::SolverFailure { iterations: 0, best: Vec::new() })
}
