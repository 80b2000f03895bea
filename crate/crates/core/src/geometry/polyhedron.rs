use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use super::{FinitePointSet, Interval, NormKind};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::linalg::{dot, for_each_combination, solve_square};
use crate::lp::{feasible_point, solve_lp, LpOutcome};
use crate::qp::{solve_qp, QpOutcome};
use crate::{DEDUP_TOL, FEAS_TOL};

/// Largest ambient dimension handled by exact vertex enumeration.
pub const MAX_VERTEX_DIM: usize = 4;

/// `{x in R^dim : A x <= b}`. No rows means the whole space.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Polyhedron {
    pub dim: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

/// Result of a Euclidean projection. `point` is `None` for an empty polyhedron.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub point: Option<Vec<f64>>,
    pub distance: ExtendedReal,
}

impl Polyhedron {
    pub fn new(dim: usize, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        Error::check_dim(a.len(), b.len())?;
        for row in &a {
            Error::check_dim(dim, row.len())?;
        }
        if a.iter().flatten().chain(&b).any(|v| v.is_nan()) {
            return Err(Error::InvalidArgument("polyhedron data contains NaN".into()));
        }
        Ok(Polyhedron { dim, a, b })
    }

    pub fn whole_space(dim: usize) -> Self {
        Polyhedron { dim, a: Vec::new(), b: Vec::new() }
    }

    /// The box `lo <= x <= hi`.
    pub fn from_box(lo: &[f64], hi: &[f64]) -> Self {
        let dim = lo.len();
        let mut p = Polyhedron::whole_space(dim);
        for i in 0..dim {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            p.push_row(e.clone(), hi[i]);
            e[i] = -1.0;
            p.push_row(e, -lo[i]);
        }
        p
    }

    pub fn push_row(&mut self, row: Vec<f64>, rhs: f64) {
        debug_assert_eq!(row.len(), self.dim);
        self.a.push(row);
        self.b.push(rhs);
    }

    /// Adds `row . x = rhs` as two opposite inequalities.
    pub fn push_equality(&mut self, row: Vec<f64>, rhs: f64) {
        let neg = row.iter().map(|v| -v).collect();
        self.push_row(row, rhs);
        self.push_row(neg, -rhs);
    }

    pub fn intersect(&self, other: &Polyhedron) -> Result<Polyhedron> {
        Error::check_dim(self.dim, other.dim)?;
        let mut p = self.clone();
        p.a.extend(other.a.iter().cloned());
        p.b.extend(other.b.iter().copied());
        Ok(p)
    }

    pub fn rows(&self) -> usize {
        self.a.len()
    }

    fn scale(&self) -> f64 {
        1.0 + self.b.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim && self.a.iter().zip(&self.b).all(|(r, bi)| dot(r, x) <= bi + tol * (1.0 + bi.abs()))
    }

    pub fn feasible_point(&self) -> Result<Option<Vec<f64>>> {
        if self.a.is_empty() {
            return Ok(Some(vec![0.0; self.dim]));
        }
        feasible_point(self.dim, &self.a, &self.b)
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.feasible_point()?.is_none())
    }

    /// Bounded iff the recession cone `{d : A d <= 0}` is `{0}`; checked with
    /// one LP per signed coordinate over the cone cut by the unit box.
    pub fn is_bounded(&self) -> Result<bool> {
        if self.is_empty()? {
            return Ok(true);
        }
        let n = self.dim;
        let mut rows = self.a.clone();
        let mut rhs = vec![0.0; rows.len()];
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            rows.push(e.clone());
            rhs.push(1.0);
            e[i] = -1.0;
            rows.push(e);
            rhs.push(1.0);
        }
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut c = vec![0.0; n];
                c[i] = -sign;
                if let LpOutcome::Optimal { value, .. } = solve_lp(&c, &rows, &rhs)? {
                    if -value > 1e-9 {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// One-dimensional polyhedra are intervals. `None` when empty.
    pub fn to_interval(&self) -> Result<Option<Interval>> {
        Error::check_dim(1, self.dim)?;
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (r, &bi) in self.a.iter().zip(&self.b) {
            let a = r[0];
            if a.abs() <= 1e-14 {
                if bi < -FEAS_TOL * (1.0 + bi.abs()) {
                    return Ok(None);
                }
            } else if a > 0.0 {
                hi = hi.min(bi / a);
            } else {
                lo = lo.max(bi / a);
            }
        }
        if lo > hi {
            if lo - hi <= FEAS_TOL * (1.0 + lo.abs()) {
                let mid = 0.5 * (lo + hi);
                return Ok(Some(Interval::closed(mid, mid)));
            }
            return Ok(None);
        }
        Ok(Some(Interval::new(lo, hi, lo.is_finite(), hi.is_finite())))
    }

    /// Maximizes `direction . x`; `None` if empty, `+inf` value if unbounded.
    pub fn support_point(&self, direction: &[f64]) -> Result<Option<(Vec<f64>, f64)>> {
        let c: Vec<f64> = direction.iter().map(|v| -v).collect();
        match solve_lp(&c, &self.a, &self.b)? {
            LpOutcome::Optimal { x, value } => Ok(Some((x, -value))),
            LpOutcome::Infeasible => Ok(None),
            LpOutcome::Unbounded { direction } => Ok(Some((direction, f64::INFINITY))),
        }
    }
}

/// Euclidean projection of `point` onto `p`.
///
/// Solved as the QP `min 1/2 |x - point|^2  s.t.  A x <= b` with the
/// active-set method; the returned point is feasible to [`FEAS_TOL`].
pub fn project_onto_polyhedron(point: &[f64], p: &Polyhedron) -> Result<Projection> {
    Error::check_dim(p.dim, point.len())?;
    if p.contains(point, 0.0) {
        return Ok(Projection { point: Some(point.to_vec()), distance: ExtendedReal::ZERO });
    }
    if p.dim == 1 {
        return Ok(match p.to_interval()? {
            None => Projection { point: None, distance: ExtendedReal::INFINITY },
            Some(iv) => {
                let x = point[0].clamp(iv.lo, iv.hi);
                Projection { point: Some(vec![x]), distance: ExtendedReal::new((x - point[0]).abs()) }
            }
        });
    }
    let q = DMatrix::<f64>::identity(p.dim, p.dim);
    let c: Vec<f64> = point.iter().map(|v| -v).collect();
    match solve_qp(&q, &c, &p.a, &p.b)? {
        QpOutcome::Optimal { x, .. } => {
            let d = NormKind::Euclidean.dist(&x, point);
            Ok(Projection { point: Some(x), distance: ExtendedReal::new(d) })
        }
        QpOutcome::Infeasible => Ok(Projection { point: None, distance: ExtendedReal::INFINITY }),
        QpOutcome::Unbounded => unreachable!("projection objective is coercive"),
    }
}

/// Max-norm distance from `point` to `p`, via the LP
/// `min t  s.t.  |x_i - point_i| <= t,  A x <= b`.
pub fn chebyshev_distance(point: &[f64], p: &Polyhedron) -> Result<ExtendedReal> {
    Error::check_dim(p.dim, point.len())?;
    if p.contains(point, 0.0) {
        return Ok(ExtendedReal::ZERO);
    }
    let n = p.dim;
    let mut rows = Vec::with_capacity(p.rows() + 2 * n);
    let mut rhs = Vec::with_capacity(p.rows() + 2 * n);
    for (r, &bi) in p.a.iter().zip(&p.b) {
        let mut row = r.clone();
        row.push(0.0);
        rows.push(row);
        rhs.push(bi);
    }
    for i in 0..n {
        let mut row = vec![0.0; n + 1];
        row[i] = 1.0;
        row[n] = -1.0;
        rows.push(row.clone());
        rhs.push(point[i]);
        row[i] = -1.0;
        rows.push(row);
        rhs.push(-point[i]);
    }
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    match solve_lp(&c, &rows, &rhs)? {
        LpOutcome::Optimal { value, .. } => Ok(ExtendedReal::new(value)),
        LpOutcome::Infeasible => Ok(ExtendedReal::INFINITY),
        LpOutcome::Unbounded { .. } => unreachable!("t >= 0 is implied"),
    }
}

/// All vertices of a bounded polyhedron in dimension at most
/// [`MAX_VERTEX_DIM`], by exhaustive enumeration of `dim`-row bases.
pub fn enumerate_vertices(p: &Polyhedron) -> Result<FinitePointSet> {
    let n = p.dim;
    if n > MAX_VERTEX_DIM {
        return Err(Error::UnsupportedDimension { dim: n, max: MAX_VERTEX_DIM });
    }
    if p.is_empty()? {
        return Ok(FinitePointSet::empty(n));
    }
    if n == 0 {
        return FinitePointSet::new(0, vec![Vec::new()]);
    }
    if !p.is_bounded()? {
        return Err(Error::UnboundedPolyhedron);
    }
    if n == 1 {
        let iv = p.to_interval()?.expect("nonempty");
        return FinitePointSet::new(1, vec![vec![iv.lo], vec![iv.hi]]);
    }
    let scale = p.scale();
    let mut points = Vec::new();
    for_each_combination(p.rows(), n, |basis| {
        let a = DMatrix::from_fn(n, n, |i, j| p.a[basis[i]][j]);
        let b = DVector::from_fn(n, |i, _| p.b[basis[i]]);
        if let Some(x) = solve_square(&a, &b) {
            let x: Vec<f64> = x.iter().copied().collect();
            if p.a.iter().zip(&p.b).all(|(r, bi)| dot(r, &x) <= bi + FEAS_TOL * scale) {
                points.push(x);
            }
        }
    });
    FinitePointSet::new(n, points)
}

/// Dedup helper shared with [`FinitePointSet`].
pub(crate) fn same_point(a: &[f64], b: &[f64]) -> bool {
    NormKind::Chebyshev.dist(a, b) <= DEDUP_TOL
}
