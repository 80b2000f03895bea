//! Parametric set-valued mappings and their evaluators.
//!
//! A [`MappingFamily`] turns a flat parameter vector into the image set
//! `M(y)` as a [`SetRepr`]. Each [`FamilyKind`] documents its packing order.
//! The estimators only need the [`SetValuedMapping`] trait, so ad hoc
//! mappings (identity, constants, test doubles) plug in the same way.

mod lcp;
mod sip;
mod sublevel;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;

pub use lcp::{solve_lcp_enumerate, MAX_LCP_DIM};
pub use sip::SipSpec;
pub use sublevel::{level_crossings, sublevel_set, ScalarFunction, TANGENCY_TOL, ZERO_TOL};

use crate::error::{Error, Result};
use crate::geometry::{Interval, IntervalUnion, NormKind, NormSpec, Polyhedron, SetRepr};
use crate::linalg::{dot, matrix_from_rows};
use crate::lp::{solve_lp, LpOutcome};
use crate::qp::{solve_qp, QpOutcome};
use crate::rng;

/// Default grid for sub-level root isolation.
pub const DEFAULT_SUBLEVEL_GRID: usize = 4001;

/// Relative slack added to the optimal value when cutting out an optimal face.
const FACE_SLACK: f64 = 1e-12;

/// Activity tolerance for inequality rows of a KKT image.
const KKT_ACTIVE_TOL: f64 = 1e-9;

/// What the estimators need from a parametric mapping.
pub trait SetValuedMapping {
    fn parameter_dim(&self) -> usize;
    fn image_dim(&self) -> usize;
    fn norms(&self) -> NormSpec;
    fn evaluate(&self, param: &[f64]) -> Result<SetRepr>;

    /// `d(y, ybar)` on the parameter space.
    fn parameter_distance(&self, y: &[f64], ybar: &[f64]) -> f64 {
        self.norms().parameter.dist(y, ybar)
    }

    /// Directions always included by [`sample_parameters`], before any
    /// random ones. Their length is irrelevant.
    fn probe_directions(&self) -> Vec<Vec<f64>> {
        Vec::new()
    }
}

impl<T: SetValuedMapping + ?Sized> SetValuedMapping for &T {
    fn parameter_dim(&self) -> usize {
        (**self).parameter_dim()
    }
    fn image_dim(&self) -> usize {
        (**self).image_dim()
    }
    fn norms(&self) -> NormSpec {
        (**self).norms()
    }
    fn evaluate(&self, param: &[f64]) -> Result<SetRepr> {
        (**self).evaluate(param)
    }
    fn parameter_distance(&self, y: &[f64], ybar: &[f64]) -> f64 {
        (**self).parameter_distance(y, ybar)
    }
    fn probe_directions(&self) -> Vec<Vec<f64>> {
        (**self).probe_directions()
    }
}

#[cfg(feature = "serde")]
fn default_sublevel_grid() -> usize {
    DEFAULT_SUBLEVEL_GRID
}

/// The mapping kinds. Matrices are packed row-major, matrices before
/// vectors, in the order listed on each variant.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum FamilyKind {
    /// `{x : A x <= b} ∩ fixed`. Parameter: `A (rows x dim)`, `b`.
    LpFeasible {
        dim: usize,
        rows: usize,
        #[cfg_attr(feature = "serde", serde(default))]
        fixed: Option<Polyhedron>,
    },
    /// Optimal face of `min c'x` over `{x : A x <= b} ∩ fixed`; empty when the
    /// LP is infeasible or unbounded. Parameter: `A`, `b`, `c`.
    LpOptimalFull {
        dim: usize,
        rows: usize,
        #[cfg_attr(feature = "serde", serde(default))]
        fixed: Option<Polyhedron>,
    },
    /// Optimal set of `min 1/2 x'Qx + c'x  s.t.  A x <= b` with `Q`, `A`
    /// fixed. Parameter: `c`, `b`.
    QpOptimalCanonical { q: Vec<Vec<f64>>, a: Vec<Vec<f64>> },
    /// KKT pairs `(x, lambda)` of a strictly convex QP with every datum
    /// perturbed. Parameter: `A (rows x dim)`, `Q (dim x dim)`, `b`, `c`.
    QpKktFull { dim: usize, rows: usize },
    /// Solutions of `LCP(M, q)`. Parameter: `M (dim x dim)`, `q`.
    Lcp { dim: usize },
    /// Discretized semi-infinite feasible set; see [`SipSpec`] for packing.
    SipGrid(SipSpec),
    /// `{x in domain : f(x) <= alpha}`. Parameter: `alpha`.
    #[cfg_attr(feature = "serde", serde(rename = "sublevel_1d"))]
    Sublevel1d {
        function: ScalarFunction,
        domain: [f64; 2],
        #[cfg_attr(feature = "serde", serde(default = "default_sublevel_grid"))]
        grid_points: usize,
    },
    /// `(-1, 0)` for `y <= 0`, `(-1, 0) ∪ (0, sqrt y)` for `y > 0`.
    CounterexampleSqrt,
    /// `{0}` at `y = 0`, `{0, 1}` elsewhere.
    CounterexampleJump,
    /// `{0}` at `y = 0`, `{0, 1/y}` elsewhere.
    CounterexampleEscape,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::LpFeasible { .. } => "lp_feasible",
            FamilyKind::LpOptimalFull { .. } => "lp_optimal_full",
            FamilyKind::QpOptimalCanonical { .. } => "qp_optimal_canonical",
            FamilyKind::QpKktFull { .. } => "qp_kkt_full",
            FamilyKind::Lcp { .. } => "lcp",
            FamilyKind::SipGrid(_) => "sip_grid",
            FamilyKind::Sublevel1d { .. } => "sublevel_1d",
            FamilyKind::CounterexampleSqrt => "counterexample_sqrt",
            FamilyKind::CounterexampleJump => "counterexample_jump",
            FamilyKind::CounterexampleEscape => "counterexample_escape",
        }
    }

    pub const ALL_NAMES: [&'static str; 10] = [
        "lp_feasible",
        "lp_optimal_full",
        "qp_optimal_canonical",
        "qp_kkt_full",
        "lcp",
        "sip_grid",
        "sublevel_1d",
        "counterexample_sqrt",
        "counterexample_jump",
        "counterexample_escape",
    ];
}

/// A named parametric mapping.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MappingFamily {
    #[cfg_attr(feature = "serde", serde(default))]
    pub name: String,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub kind: FamilyKind,
    #[cfg_attr(feature = "serde", serde(default))]
    pub norms: NormSpec,
    /// Extra probe directions, tried before random samples.
    #[cfg_attr(feature = "serde", serde(default))]
    pub probes: Vec<Vec<f64>>,
}

impl MappingFamily {
    pub fn new(name: impl Into<String>, kind: FamilyKind) -> Result<Self> {
        let f = MappingFamily { name: name.into(), kind, norms: NormSpec::default(), probes: Vec::new() };
        f.validate()?;
        Ok(f)
    }

    pub fn with_norms(mut self, norms: NormSpec) -> Self {
        self.norms = norms;
        self
    }

    pub fn with_probe(mut self, direction: Vec<f64>) -> Self {
        self.probes.push(direction);
        self
    }

    /// Shape checks on structural data and registered probes.
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            FamilyKind::LpFeasible { dim, fixed, .. } | FamilyKind::LpOptimalFull { dim, fixed, .. } => {
                if let Some(p) = fixed {
                    Error::check_dim(*dim, p.dim)?;
                }
            }
            FamilyKind::QpOptimalCanonical { q, a } => {
                let n = q.len();
                for row in q {
                    Error::check_dim(n, row.len())?;
                }
                for row in a {
                    Error::check_dim(n, row.len())?;
                }
                for i in 0..n {
                    for j in 0..i {
                        if (q[i][j] - q[j][i]).abs() > 1e-12 * (1.0 + q[i][j].abs()) {
                            return Err(Error::InvalidArgument("q must be symmetric".into()));
                        }
                    }
                }
            }
            FamilyKind::Lcp { dim } => {
                if *dim > MAX_LCP_DIM {
                    return Err(Error::UnsupportedSize { size: *dim, max: MAX_LCP_DIM });
                }
            }
            FamilyKind::SipGrid(s) => s.validate()?,
            FamilyKind::Sublevel1d { domain, grid_points, .. } => {
                if !(domain[0] < domain[1]) || !domain.iter().all(|v| v.is_finite()) {
                    return Err(Error::InvalidArgument("domain must be a finite interval lo < hi".into()));
                }
                if *grid_points < 2 {
                    return Err(Error::InvalidArgument("grid_points must be at least 2".into()));
                }
            }
            _ => {}
        }
        for p in &self.probes {
            Error::check_dim(self.parameter_dim(), p.len())?;
        }
        Ok(())
    }
}

fn take<'a>(param: &'a [f64], at: &mut usize, len: usize) -> &'a [f64] {
    let s = &param[*at..*at + len];
    *at += len;
    s
}

fn take_rows(param: &[f64], at: &mut usize, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| take(param, at, cols).to_vec()).collect()
}

fn with_fixed(dim: usize, a: Vec<Vec<f64>>, b: Vec<f64>, fixed: &Option<Polyhedron>) -> Result<Polyhedron> {
    let p = Polyhedron::new(dim, a, b)?;
    match fixed {
        Some(f) => p.intersect(f),
        None => Ok(p),
    }
}

impl SetValuedMapping for MappingFamily {
    fn parameter_dim(&self) -> usize {
        match &self.kind {
            FamilyKind::LpFeasible { dim, rows, .. } => rows * dim + rows,
            FamilyKind::LpOptimalFull { dim, rows, .. } => rows * dim + rows + dim,
            FamilyKind::QpOptimalCanonical { q, a } => q.len() + a.len(),
            FamilyKind::QpKktFull { dim, rows } => rows * dim + dim * dim + rows + dim,
            FamilyKind::Lcp { dim } => dim * dim + dim,
            FamilyKind::SipGrid(s) => s.parameter_dim(),
            FamilyKind::Sublevel1d { .. }
            | FamilyKind::CounterexampleSqrt
            | FamilyKind::CounterexampleJump
            | FamilyKind::CounterexampleEscape => 1,
        }
    }

    fn image_dim(&self) -> usize {
        match &self.kind {
            FamilyKind::LpFeasible { dim, .. } | FamilyKind::LpOptimalFull { dim, .. } => *dim,
            FamilyKind::QpOptimalCanonical { q, .. } => q.len(),
            FamilyKind::QpKktFull { dim, rows } => dim + rows,
            FamilyKind::Lcp { dim } => *dim,
            FamilyKind::SipGrid(s) => s.dim,
            _ => 1,
        }
    }

    fn norms(&self) -> NormSpec {
        self.norms
    }

    fn parameter_distance(&self, y: &[f64], ybar: &[f64]) -> f64 {
        match &self.kind {
            FamilyKind::SipGrid(s) => s.distance(y, ybar, self.norms.parameter),
            _ => self.norms.parameter.dist(y, ybar),
        }
    }

    fn probe_directions(&self) -> Vec<Vec<f64>> {
        let mut out = self.probes.clone();
        if let FamilyKind::SipGrid(s) = &self.kind {
            out.extend(s.probe_directions());
        }
        out
    }

    fn evaluate(&self, param: &[f64]) -> Result<SetRepr> {
        Error::check_dim(self.parameter_dim(), param.len())?;
        if param.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("parameter must be finite".into()));
        }
        let mut at = 0;
        match &self.kind {
            FamilyKind::LpFeasible { dim, rows, fixed } => {
                let a = take_rows(param, &mut at, *rows, *dim);
                let b = take(param, &mut at, *rows).to_vec();
                Ok(SetRepr::Polyhedron(with_fixed(*dim, a, b, fixed)?))
            }
            FamilyKind::LpOptimalFull { dim, rows, fixed } => {
                let a = take_rows(param, &mut at, *rows, *dim);
                let b = take(param, &mut at, *rows).to_vec();
                let c = take(param, &mut at, *dim).to_vec();
                let p = with_fixed(*dim, a, b, fixed)?;
                match solve_lp(&c, &p.a, &p.b) {
                    Ok(LpOutcome::Optimal { value, .. }) => {
                        let mut face = p;
                        face.push_row(c, value + FACE_SLACK * (1.0 + value.abs()));
                        Ok(SetRepr::Polyhedron(face))
                    }
                    Ok(_) => Ok(SetRepr::empty(*dim)),
                    Err(e) => Err(Error::Evaluation(alloc::format!("lp solve: {e}"))),
                }
            }
            FamilyKind::QpOptimalCanonical { q, a } => {
                let n = q.len();
                let c = take(param, &mut at, n).to_vec();
                let b = take(param, &mut at, a.len()).to_vec();
                qp_optimal_set(&matrix_from_rows(q, n), &c, a, &b)
            }
            FamilyKind::QpKktFull { dim, rows } => {
                let a = take_rows(param, &mut at, *rows, *dim);
                let q = take_rows(param, &mut at, *dim, *dim);
                let b = take(param, &mut at, *rows).to_vec();
                let c = take(param, &mut at, *dim).to_vec();
                qp_kkt_set(&matrix_from_rows(&q, *dim), &c, &a, &b)
            }
            FamilyKind::Lcp { dim } => {
                let m = take_rows(param, &mut at, *dim, *dim);
                let q = take(param, &mut at, *dim);
                solve_lcp_enumerate(&m, q)
            }
            FamilyKind::SipGrid(s) => Ok(SetRepr::Polyhedron(s.polyhedron(param)?)),
            FamilyKind::Sublevel1d { function, domain, grid_points } => {
                Ok(SetRepr::intervals(sublevel_set(function, param[0], (domain[0], domain[1]), *grid_points)?))
            }
            FamilyKind::CounterexampleSqrt => {
                let y = param[0];
                let mut pieces = vec![Interval::open(-1.0, 0.0)];
                if y > 0.0 {
                    pieces.push(Interval::open(0.0, libm::sqrt(y)));
                }
                Ok(SetRepr::intervals(IntervalUnion::new(pieces)?))
            }
            FamilyKind::CounterexampleJump => {
                let y = param[0];
                let pts = if y == 0.0 { vec![vec![0.0]] } else { vec![vec![0.0], vec![1.0]] };
                SetRepr::points(1, pts)
            }
            FamilyKind::CounterexampleEscape => {
                let y = param[0];
                let pts = if y == 0.0 { vec![vec![0.0]] } else { vec![vec![0.0], vec![1.0 / y]] };
                SetRepr::points(1, pts)
            }
        }
    }
}

/// Optimal set of a convex QP: a point when `Q` is positive definite, the
/// face `{A x <= b, Q x = Q x*, c'x <= c'x*}` otherwise.
fn qp_optimal_set(q: &DMatrix<f64>, c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<SetRepr> {
    let n = c.len();
    let outcome = solve_qp(q, c, a, b).map_err(|e| Error::Evaluation(alloc::format!("qp solve: {e}")))?;
    let QpOutcome::Optimal { x, .. } = outcome else {
        return Ok(SetRepr::empty(n));
    };
    let sym = (q + q.transpose()) * 0.5;
    if sym.clone().cholesky().is_some() {
        return SetRepr::points(n, vec![x]);
    }
    let mut face = Polyhedron::new(n, a.to_vec(), b.to_vec())?;
    for i in 0..n {
        let row: Vec<f64> = (0..n).map(|j| sym[(i, j)]).collect();
        let rhs = dot(&row, &x);
        face.push_equality(row, rhs);
    }
    let cx = dot(c, &x);
    face.push_row(c.to_vec(), cx + FACE_SLACK * (1.0 + cx.abs()));
    Ok(SetRepr::Polyhedron(face))
}

/// `{(x*, lambda) : lambda >= 0, lambda_i = 0 off the active set,
/// A' lambda = -(Q x* + c)}` as a polyhedron in `R^(n+m)`.
fn qp_kkt_set(q: &DMatrix<f64>, c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<SetRepr> {
    let n = c.len();
    let m = b.len();
    let sym = (q + q.transpose()) * 0.5;
    if sym.clone().cholesky().is_none() {
        return Err(Error::Evaluation("qp_kkt_full needs a positive definite Q".into()));
    }
    let outcome = solve_qp(&sym, c, a, b).map_err(|e| Error::Evaluation(alloc::format!("qp solve: {e}")))?;
    let QpOutcome::Optimal { x, .. } = outcome else {
        return Ok(SetRepr::empty(n + m));
    };
    let mut p = Polyhedron::whole_space(n + m);
    for i in 0..n {
        let mut e = vec![0.0; n + m];
        e[i] = 1.0;
        p.push_equality(e, x[i]);
    }
    for i in 0..m {
        let mut e = vec![0.0; n + m];
        e[n + i] = -1.0;
        p.push_row(e.clone(), 0.0);
        if dot(&a[i], &x) < b[i] - KKT_ACTIVE_TOL * (1.0 + b[i].abs()) {
            e[n + i] = 1.0;
            p.push_row(e, 0.0);
        }
    }
    let grad = &sym * nalgebra::DVector::from_column_slice(&x);
    for j in 0..n {
        let mut row = vec![0.0; n + m];
        for i in 0..m {
            row[n + i] = a[i][j];
        }
        p.push_equality(row, -(grad[j] + c[j]));
    }
    Ok(SetRepr::Polyhedron(p))
}

/// Direction of sample `index` among `random_slots` random ones: cube
/// vertices in binary order while they fit, then alternately a random
/// vertex and a uniform cube point for the Chebyshev norm, normalized
/// Gaussians for the Euclidean norm.
fn random_direction(
    norm: NormKind,
    dim: usize,
    index: usize,
    random_slots: usize,
    rng: &mut impl rand_core::RngCore,
) -> Vec<f64> {
    match norm {
        NormKind::Euclidean => (0..dim).map(|_| rng::gaussian(rng)).collect(),
        NormKind::Chebyshev => {
            let vertices = if dim < usize::BITS as usize - 1 { 1usize << dim } else { usize::MAX };
            if vertices <= random_slots && index < vertices {
                return (0..dim).map(|j| if index >> j & 1 == 1 { -1.0 } else { 1.0 }).collect();
            }
            if index.is_multiple_of(2) {
                (0..dim).map(|_| if rng.next_u32() & 1 == 1 { -1.0 } else { 1.0 }).collect()
            } else {
                (0..dim).map(|_| 2.0 * rng::uniform(rng) - 1.0).collect()
            }
        }
    }
}

/// Moves from `center` along `dir` to parameter distance at most `target`
/// and as close to it as rounding allows.
fn place<M: SetValuedMapping + ?Sized>(family: &M, center: &[f64], dir: &[f64], target: f64) -> Option<Vec<f64>> {
    let probe: Vec<f64> = center.iter().zip(dir).map(|(c, d)| c + d).collect();
    let unit = family.parameter_distance(&probe, center);
    if !(unit > 0.0) || !unit.is_finite() {
        return None;
    }
    let mut scale = target / unit;
    let mut shrink = 4.0 * f64::EPSILON;
    // rounding of `c + d * scale` is relative to |c|, not to the step
    for _ in 0..40 {
        let y: Vec<f64> = center.iter().zip(dir).map(|(c, d)| c + d * scale).collect();
        let d = family.parameter_distance(&y, center);
        if d <= target {
            return Some(y);
        }
        scale *= (target / d) * (1.0 - shrink);
        shrink *= 4.0;
    }
    None
}

/// Parameters at distance in `(radius/2, radius]` from `center`.
///
/// Registered probe directions come first, placed at exactly `radius`,
/// followed by `count` random samples, each drawn from its own stream
/// `(seed, index)`. The random part does not depend on the probes, so adding
/// a probe only ever adds parameters.
pub fn sample_parameters<M: SetValuedMapping + ?Sized>(
    family: &M,
    center: &[f64],
    radius: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let dim = family.parameter_dim();
    Error::check_dim(dim, center.len())?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument("radius must be positive and finite".into()));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let probes = family.probe_directions();
    let mut out = Vec::with_capacity(count + probes.len());
    for p in &probes {
        Error::check_dim(dim, p.len())?;
        let y = place(family, center, p, radius)
            .ok_or_else(|| Error::InvalidArgument("probe direction has zero length".into()))?;
        out.push(y);
    }
    let random_slots = count;
    let norm = family.norms().parameter;
    for i in 0..random_slots {
        let mut r = rng::stream(seed, i as u64);
        let target = radius * (1.0 - 0.5 * rng::uniform(&mut r));
        loop {
            let dir = random_direction(norm, dim, i, random_slots, &mut r);
            if let Some(y) = place(family, center, &dir, target) {
                out.push(y);
                break;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn example4() -> MappingFamily {
        let fixed = Polyhedron::new(1, vec![vec![-1.0]], vec![0.0]).unwrap();
        MappingFamily::new("lp", FamilyKind::LpOptimalFull { dim: 1, rows: 1, fixed: Some(fixed) }).unwrap()
    }

    fn interval_of(s: &SetRepr) -> Vec<Interval> {
        s.to_intervals().unwrap().unwrap().intervals().to_vec()
    }

    #[test]
    fn lp_optimal_nominal_singleton() {
        let s = example4().evaluate(&[1.0, 1.0, -1.0]).unwrap();
        let ivs = interval_of(&s);
        assert_eq!(ivs.len(), 1);
        assert!((ivs[0].lo - 1.0).abs() < 1e-9 && (ivs[0].hi - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lp_optimal_unbounded_is_empty() {
        let s = example4().evaluate(&[1.0, 1.0, 1.0]).unwrap();
        assert!(!s.is_empty().unwrap());
        let s = example4().evaluate(&[-1.0, 1.0, -1.0]).unwrap();
        assert!(s.is_empty().unwrap());
    }

    #[test]
    fn lcp_family() {
        let f = MappingFamily::new("lcp", FamilyKind::Lcp { dim: 1 }).unwrap();
        assert_eq!(f.evaluate(&[-1.0, 1.0]).unwrap(), SetRepr::points(1, vec![vec![0.0], vec![1.0]]).unwrap());
    }

    #[test]
    fn sine_family() {
        let f = MappingFamily::new(
            "sin",
            FamilyKind::Sublevel1d { function: ScalarFunction::Sin, domain: [-2.0 * PI, 2.0 * PI], grid_points: 4001 },
        )
        .unwrap();
        assert_eq!(interval_of(&f.evaluate(&[0.0]).unwrap()).len(), 3);
    }

    #[test]
    fn counterexample_case_formulas() {
        let jump = MappingFamily::new("j", FamilyKind::CounterexampleJump).unwrap();
        assert_eq!(jump.evaluate(&[0.0]).unwrap(), SetRepr::points(1, vec![vec![0.0]]).unwrap());
        assert_eq!(jump.evaluate(&[0.3]).unwrap(), SetRepr::points(1, vec![vec![0.0], vec![1.0]]).unwrap());
        let esc = MappingFamily::new("e", FamilyKind::CounterexampleEscape).unwrap();
        assert_eq!(esc.evaluate(&[0.1]).unwrap(), SetRepr::points(1, vec![vec![0.0], vec![10.0]]).unwrap());
        assert_eq!(esc.evaluate(&[-0.5]).unwrap(), SetRepr::points(1, vec![vec![-2.0], vec![0.0]]).unwrap());
        let sq = MappingFamily::new("s", FamilyKind::CounterexampleSqrt).unwrap();
        let s0 = sq.evaluate(&[0.0]).unwrap();
        assert!(!s0.is_closed());
        assert_eq!(interval_of(&s0), vec![Interval::open(-1.0, 0.0)]);
        assert_eq!(
            interval_of(&sq.evaluate(&[0.25]).unwrap()),
            vec![Interval::open(-1.0, 0.0), Interval::open(0.0, 0.5)]
        );
    }

    #[test]
    fn kkt_image_contains_the_multiplier() {
        // min 1/2 x^2 - 2x  s.t. x <= 1: x = 1, lambda = 1
        let f = MappingFamily::new("kkt", FamilyKind::QpKktFull { dim: 1, rows: 1 }).unwrap();
        let s = f.evaluate(&[1.0, 1.0, 1.0, -2.0]).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(s.contains(&[1.0, 1.0], 1e-9).unwrap());
        assert!(!s.contains(&[1.0, 0.5], 1e-6).unwrap());
    }

    #[test]
    fn canonical_qp_semidefinite_face() {
        // Q = 0, c = 0: every feasible point is optimal
        let f = MappingFamily::new(
            "qp",
            FamilyKind::QpOptimalCanonical { q: vec![vec![0.0]], a: vec![vec![1.0], vec![-1.0]] },
        )
        .unwrap();
        let s = f.evaluate(&[0.0, 1.0, 0.0]).unwrap();
        let ivs = interval_of(&s);
        assert!((ivs[0].lo).abs() < 1e-9 && (ivs[0].hi - 1.0).abs() < 1e-9);
    }

    #[test]
    fn probes_come_first_at_full_radius() {
        let f = example4().with_probe(vec![-1.0, 1.0, 0.0]);
        let eps = 1e-3;
        let ys = sample_parameters(&f, &[1.0, 1.0, -1.0], eps, 64, 7).unwrap();
        assert_eq!(ys.len(), 65);
        let plain = sample_parameters(&example4(), &[1.0, 1.0, -1.0], eps, 64, 7).unwrap();
        assert_eq!(&ys[1..], &plain[..]);
        assert!((ys[0][0] - (1.0 - eps)).abs() < 1e-12 && (ys[0][1] - (1.0 + eps)).abs() < 1e-12);
        assert_eq!(ys[0][2], -1.0);
    }

    #[test]
    fn sip_shrinking_probe_is_sampled() {
        let f = MappingFamily::new("sip", FamilyKind::SipGrid(SipSpec::new(vec![vec![0.0, 1.0]], vec![1.0]))).unwrap();
        let eps = 1e-2;
        let ys = sample_parameters(&f, &[0.0; 5], eps, 16, 1).unwrap();
        let y = &ys[0];
        assert!(y[0] == 0.0 && y[1] == 0.0 && (y[2] - eps).abs() < 1e-12 && (y[3] + eps).abs() < 1e-12);
    }

    #[test]
    fn wrong_parameter_length() {
        assert!(matches!(example4().evaluate(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    fn lcp_residual(m: &[Vec<f64>], q: &[f64], x: &[f64]) -> f64 {
        (0..q.len()).map(|i| (dot(&m[i], x) + q[i]).min(x[i]).abs()).fold(0.0, f64::max)
    }

    /// Compass search over axis and diagonal moves, step halving to 1e-12.
    fn pattern_search(f: impl Fn(&[f64]) -> f64, mut x: Vec<f64>) -> Vec<f64> {
        let n = x.len();
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for code in 1..3usize.pow(n as u32) {
            dirs.push((0..n).map(|j| (code / 3usize.pow(j as u32) % 3) as f64 - 1.0).collect());
        }
        let mut h = 0.01;
        let mut fx = f(&x);
        while h > 1e-12 {
            let mut moved = false;
            for d in &dirs {
                let y: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + h * b).collect();
                let fy = f(&y);
                if fy < fx {
                    x = y;
                    fx = fy;
                    moved = true;
                    break;
                }
            }
            if !moved {
                h *= 0.5;
            }
        }
        x
    }

    /// Connected clusters of grid points on `[0, 4]^n` whose natural
    /// residual `max_i |min(x_i, (Mx + q)_i)|` is within one grid step's
    /// worth of variation. Every solution in the box lies in some cluster.
    fn lcp_grid_clusters(m: &[Vec<f64>], q: &[f64]) -> Vec<Vec<Vec<f64>>> {
        let n = q.len();
        let step = 0.01;
        let k = 400usize;
        let lip = 1.0 + m.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let side = k + 1;
        let total = side.pow(n as u32);
        let point =
            |id: usize| -> Vec<f64> { (0..n).map(|j| (id / side.pow(j as u32) % side) as f64 * step).collect() };
        let hit: Vec<bool> = (0..total)
            .map(|id| {
                let x = point(id);
                let res = (0..n).map(|i| (dot(&m[i], &x) + q[i]).min(x[i]).abs()).fold(0.0, f64::max);
                res <= step * lip
            })
            .collect();
        let mut seen = vec![false; total];
        let mut clusters = Vec::new();
        for start in 0..total {
            if !hit[start] || seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut members = Vec::new();
            while let Some(id) = stack.pop() {
                members.push(point(id));
                for j in 0..n {
                    let stride = side.pow(j as u32);
                    let c = id / stride % side;
                    let mut nb = Vec::new();
                    if c > 0 {
                        nb.push(id - stride);
                    }
                    if c + 1 < side {
                        nb.push(id + stride);
                    }
                    for o in nb {
                        if hit[o] && !seen[o] {
                            seen[o] = true;
                            stack.push(o);
                        }
                    }
                }
            }
            clusters.push(members);
        }
        clusters
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn lcp_matches_grid_filter(
            n in 1usize..=2,
            vals in proptest::collection::vec(-2.0f64..2.0, 6),
        ) {
            let m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| vals[i * n + j]).collect()).collect();
            let q: Vec<f64> = (0..n).map(|i| vals[4 + i]).collect();
            // keep away from degenerate pieces, which the grid cannot resolve
            let mm = matrix_from_rows(&m, n);
            prop_assume!(mm.determinant().abs() > 0.1);
            prop_assume!((0..n).all(|i| m[i][i].abs() > 0.1 && q[i].abs() > 0.1));
            let sol = solve_lcp_enumerate(&m, &q).unwrap();
            let SetRepr::FinitePointSet(pts) = &sol else { panic!("nondegenerate LCP gave pieces") };
            for p in pts.points() {
                // every solution satisfies the conditions exactly
                for i in 0..n {
                    let w = dot(&m[i], p) + q[i];
                    prop_assert!(p[i] >= -1e-9 && w >= -1e-9 && (p[i] * w).abs() < 1e-8);
                }
            }
            let clusters = lcp_grid_clusters(&m, &q);
            // a cluster whose residual valley really reaches zero holds an
            // enumerated solution
            for cl in &clusters {
                let best = cl
                    .iter()
                    .min_by(|a, b| lcp_residual(&m, &q, a).total_cmp(&lcp_residual(&m, &q, b)))
                    .unwrap();
                let x = pattern_search(|x| lcp_residual(&m, &q, x), best.clone());
                if lcp_residual(&m, &q, &x) < 1e-9 {
                    let near = pts.points().iter().any(|p| NormKind::Chebyshev.dist(p, &x) < 1e-6);
                    prop_assert!(near, "residual root {:?} missing from {:?}", x, pts.points());
                }
            }
            // every solution inside the box is covered by a cluster
            for p in pts.points() {
                if p.iter().all(|&v| v <= 3.99) {
                    prop_assert!(clusters.iter().flatten().any(|g| NormKind::Chebyshev.dist(p, g) <= 0.01 + 1e-12));
                }
            }
        }

        #[test]
        fn optimal_face_within_feasible_set(
            a in proptest::collection::vec(-1.0f64..1.0, 6),
            b in proptest::collection::vec(0.1f64..2.0, 3),
            c in proptest::collection::vec(-1.0f64..1.0, 2),
        ) {
            let bx = Polyhedron::from_box(&[-3.0, -3.0], &[3.0, 3.0]);
            let feas = MappingFamily::new("f", FamilyKind::LpFeasible { dim: 2, rows: 3, fixed: Some(bx.clone()) }).unwrap();
            let opt = MappingFamily::new("o", FamilyKind::LpOptimalFull { dim: 2, rows: 3, fixed: Some(bx) }).unwrap();
            let mut pf = a.clone();
            pf.extend(&b);
            let mut po = pf.clone();
            po.extend(&c);
            let fs = feas.evaluate(&pf).unwrap();
            let os = opt.evaluate(&po).unwrap();
            for v in os.extreme_points().unwrap() {
                prop_assert!(fs.contains(&v, 1e-7).unwrap());
                // graph membership: the defining rows hold at every image vertex
                for i in 0..3 {
                    prop_assert!(a[2 * i] * v[0] + a[2 * i + 1] * v[1] <= b[i] + 1e-7);
                }
            }
        }

        #[test]
        fn sublevel_monotone(a1 in -1.5f64..1.5, gap in 0.0f64..1.0) {
            let f = MappingFamily::new(
                "cos",
                FamilyKind::Sublevel1d { function: ScalarFunction::Cos, domain: [-3.0, 4.0], grid_points: 701 },
            ).unwrap();
            let a2 = a1 + gap;
            let (Ok(s1), Ok(s2)) = (f.evaluate(&[a1]), f.evaluate(&[a2])) else { return Ok(()) };
            let u1 = s1.to_intervals().unwrap().unwrap();
            let u2 = s2.to_intervals().unwrap().unwrap();
            prop_assert!(u1.is_subset_of(&u2, 1e-9));
        }

        #[test]
        fn samples_in_annulus(seed in any::<u64>(), r in 1e-6f64..1.0, count in 1usize..40) {
            let f = example4();
            let c = [1.0, 1.0, -1.0];
            let ys = sample_parameters(&f, &c, r, count, seed).unwrap();
            prop_assert_eq!(ys.len(), count);
            for y in &ys {
                let d = f.parameter_distance(y, &c);
                prop_assert!(d > r / 2.0 && d <= r);
            }
            prop_assert_eq!(ys, sample_parameters(&f, &c, r, count, seed).unwrap());
        }
    }
}
