use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{FinitePointSet, Interval, IntervalUnion, Polyhedron, SetRepr};
use crate::linalg::{dot, solve_square};

/// Largest LCP handled by complementary-set enumeration.
pub const MAX_LCP_DIM: usize = 12;

/// All solutions of `x >= 0, Mx + q >= 0, x'(Mx + q) = 0`.
///
/// Enumerates the `2^n` complementary index sets `B` (`x_i` free and
/// `(Mx + q)_i = 0` on `B`, `x_i = 0` off `B`) and keeps the sign-feasible
/// solutions. A singular subsystem with a feasible solution set of positive
/// dimension contributes that whole polyhedral piece: an interval when
/// `n = 1`, a [`SetRepr::Union`] part otherwise.
pub fn solve_lcp_enumerate(m: &[Vec<f64>], q: &[f64]) -> Result<SetRepr> {
    let n = q.len();
    if n > MAX_LCP_DIM {
        return Err(Error::UnsupportedSize { size: n, max: MAX_LCP_DIM });
    }
    Error::check_dim(n, m.len())?;
    for row in m {
        Error::check_dim(n, row.len())?;
    }
    let scale = 1.0 + q.iter().chain(m.iter().flatten()).fold(0.0f64, |a, v| a.max(v.abs()));
    let tol = 1e-9 * scale;

    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut pieces: Vec<Polyhedron> = Vec::new();

    for mask in 0u32..(1u32 << n) {
        let basic: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let k = basic.len();
        let mbb = DMatrix::from_fn(k, k, |r, s| m[basic[r]][basic[s]]);
        let rhs = DVector::from_fn(k, |r, _| -q[basic[r]]);
        match solve_square(&mbb, &rhs) {
            Some(xb) => {
                let mut x = vec![0.0; n];
                for (r, &i) in basic.iter().enumerate() {
                    x[i] = xb[r];
                }
                if x.iter().all(|&v| v >= -tol) && (0..n).all(|i| dot(&m[i], &x) + q[i] >= -tol) {
                    for v in x.iter_mut() {
                        *v = v.max(0.0);
                    }
                    points.push(x);
                }
            }
            None => {
                let piece = complementary_piece(m, q, &basic);
                if piece.is_empty()? {
                    continue;
                }
                if piece.is_bounded()? {
                    if let Some((lo, hi)) = SetRepr::Polyhedron(piece.clone()).bounding_box()? {
                        let width = lo.iter().zip(&hi).fold(0.0f64, |a, (l, h)| a.max(h - l));
                        if width <= crate::DEDUP_TOL {
                            points.push(lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect());
                            continue;
                        }
                    }
                }
                pieces.push(piece);
            }
        }
    }

    if pieces.is_empty() {
        return Ok(SetRepr::FinitePointSet(FinitePointSet::new(n, points)?));
    }
    if n == 1 {
        let mut ivs: Vec<Interval> = points.iter().map(|p| Interval::point(p[0])).collect();
        for piece in &pieces {
            if let Some(iv) = piece.to_interval()? {
                ivs.push(iv);
            }
        }
        return Ok(SetRepr::intervals(IntervalUnion::new(ivs)?));
    }
    let mut parts = vec![SetRepr::FinitePointSet(FinitePointSet::new(n, points)?)];
    parts.extend(pieces.into_iter().map(SetRepr::Polyhedron));
    Ok(SetRepr::Union { dim: n, parts })
}

fn complementary_piece(m: &[Vec<f64>], q: &[f64], basic: &[usize]) -> Polyhedron {
    let n = q.len();
    let mut p = Polyhedron::whole_space(n);
    for i in 0..n {
        let mut e = vec![0.0; n];
        if basic.contains(&i) {
            p.push_equality(m[i].clone(), -q[i]);
            e[i] = -1.0;
            p.push_row(e, 0.0);
        } else {
            e[i] = 1.0;
            p.push_equality(e, 0.0);
            p.push_row(m[i].iter().map(|v| -v).collect(), q[i]);
        }
    }
    p
}
