//! Point-to-set distances, projections and set suprema.
//!
//! Every image set produced by a mapping family is a [`SetRepr`]. Distances
//! are exact for polyhedra (projection), finite point sets and interval
//! unions; sampled clouds only give upper bounds on distances and lower
//! bounds on suprema.

mod distance;
mod interval;
mod polyhedron;

use alloc::vec;
use alloc::vec::Vec;

pub use distance::{distance_to_set, sup_distance_over_set, SupDistance, SupExactness};
pub use interval::{Interval, IntervalUnion};
pub use polyhedron::{
    chebyshev_distance, enumerate_vertices, project_onto_polyhedron, Polyhedron, Projection, MAX_VERTEX_DIM,
};

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum NormKind {
    Chebyshev,
    Euclidean,
}

impl NormKind {
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            NormKind::Chebyshev => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            NormKind::Euclidean => libm::sqrt(v.iter().map(|x| x * x).sum()),
        }
    }

    pub fn dist(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            NormKind::Chebyshev => a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs())),
            NormKind::Euclidean => libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()),
        }
    }
}

/// Norms used on the parameter space and on the image space. The same pair
/// is used in every quotient of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormSpec {
    pub parameter: NormKind,
    pub image: NormKind,
}

impl Default for NormSpec {
    fn default() -> Self {
        NormSpec { parameter: NormKind::Chebyshev, image: NormKind::Euclidean }
    }
}

/// A finite list of points without duplicates (up to [`crate::DEDUP_TOL`]).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FinitePointSet {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl FinitePointSet {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        let mut unique: Vec<Vec<f64>> = Vec::with_capacity(points.len());
        for p in points {
            Error::check_dim(dim, p.len())?;
            if p.iter().any(|v| v.is_nan()) {
                return Err(Error::InvalidArgument("point contains NaN".into()));
            }
            if !unique.iter().any(|q| polyhedron::same_point(q, &p)) {
                unique.push(p);
            }
        }
        unique.sort_by(|a, b| {
            a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(core::cmp::Ordering::Equal)
        });
        Ok(FinitePointSet { dim, points: unique })
    }

    pub fn empty(dim: usize) -> Self {
        FinitePointSet { dim, points: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A computable representation of one image set `M(y)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "snake_case"))]
pub enum SetRepr {
    Polyhedron(Polyhedron),
    FinitePointSet(FinitePointSet),
    /// One-dimensional sets only.
    IntervalUnion {
        intervals: IntervalUnion,
    },
    /// A finite inner approximation of some underlying set.
    SampledCloud(FinitePointSet),
    /// Finite union of the other variants, e.g. degenerate LCP pieces.
    Union {
        dim: usize,
        parts: Vec<SetRepr>,
    },
}

impl SetRepr {
    pub fn intervals(u: IntervalUnion) -> Self {
        SetRepr::IntervalUnion { intervals: u }
    }

    pub fn points(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        Ok(SetRepr::FinitePointSet(FinitePointSet::new(dim, points)?))
    }

    pub fn empty(dim: usize) -> Self {
        SetRepr::FinitePointSet(FinitePointSet::empty(dim))
    }

    pub fn dim(&self) -> usize {
        match self {
            SetRepr::Polyhedron(p) => p.dim,
            SetRepr::FinitePointSet(s) | SetRepr::SampledCloud(s) => s.dim,
            SetRepr::IntervalUnion { .. } => 1,
            SetRepr::Union { dim, .. } => *dim,
        }
    }

    pub fn is_empty(&self) -> Result<bool> {
        match self {
            SetRepr::Polyhedron(p) => p.is_empty(),
            SetRepr::FinitePointSet(s) | SetRepr::SampledCloud(s) => Ok(s.is_empty()),
            SetRepr::IntervalUnion { intervals } => Ok(intervals.is_empty()),
            SetRepr::Union { parts, .. } => {
                for p in parts {
                    if !p.is_empty()? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    /// Membership with tolerance `tol`; open interval endpoints stay excluded.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        Error::check_dim(self.dim(), x.len())?;
        Ok(match self {
            SetRepr::Polyhedron(p) => p.contains(x, tol),
            SetRepr::FinitePointSet(s) | SetRepr::SampledCloud(s) => {
                s.points.iter().any(|p| NormKind::Chebyshev.dist(p, x) <= tol)
            }
            SetRepr::IntervalUnion { intervals } => intervals.intervals().iter().any(|iv| {
                let lo_ok = if iv.lo_closed { x[0] >= iv.lo - tol } else { x[0] > iv.lo };
                let hi_ok = if iv.hi_closed { x[0] <= iv.hi + tol } else { x[0] < iv.hi };
                lo_ok && hi_ok
            }),
            SetRepr::Union { parts, .. } => {
                for p in parts {
                    if p.contains(x, tol)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    /// Topologically closed. Only interval unions can be open here.
    pub fn is_closed(&self) -> bool {
        match self {
            SetRepr::IntervalUnion { intervals } => intervals.is_closed(),
            SetRepr::Union { parts, .. } => parts.iter().all(SetRepr::is_closed),
            _ => true,
        }
    }

    /// Finite endpoints that belong to the closure but not to the set.
    pub fn open_boundary_points(&self) -> Vec<Vec<f64>> {
        match self {
            SetRepr::IntervalUnion { intervals } => intervals.open_endpoints().into_iter().map(|x| vec![x]).collect(),
            SetRepr::Union { parts, .. } => parts.iter().flat_map(SetRepr::open_boundary_points).collect(),
            _ => Vec::new(),
        }
    }

    /// Whether the set is known to be convex from its representation.
    pub fn is_convex(&self) -> bool {
        match self {
            SetRepr::Polyhedron(_) => true,
            SetRepr::FinitePointSet(s) | SetRepr::SampledCloud(s) => s.len() <= 1,
            SetRepr::IntervalUnion { intervals } => intervals.intervals().len() <= 1,
            SetRepr::Union { parts, .. } => parts.len() == 1 && parts[0].is_convex(),
        }
    }

    /// The one-dimensional set as an interval union (closures of point sets
    /// are themselves). `None` for dimensions other than one.
    pub fn to_intervals(&self) -> Result<Option<IntervalUnion>> {
        if self.dim() != 1 {
            return Ok(None);
        }
        Ok(Some(match self {
            SetRepr::Polyhedron(p) => match p.to_interval()? {
                Some(iv) => IntervalUnion::new(vec![iv])?,
                None => IntervalUnion::empty(),
            },
            SetRepr::FinitePointSet(s) | SetRepr::SampledCloud(s) => {
                IntervalUnion::from_points(s.points.iter().map(|p| p[0]))?
            }
            SetRepr::IntervalUnion { intervals } => intervals.clone(),
            SetRepr::Union { parts, .. } => {
                let mut acc = IntervalUnion::empty();
                for p in parts {
                    if let Some(u) = p.to_intervals()? {
                        acc = acc.union(&u);
                    }
                }
                acc
            }
        }))
    }

    /// Intersection with the box `|x_i - center_i| <= half_width`.
    pub fn restrict_to_box(&self, center: &[f64], half_width: f64) -> Result<SetRepr> {
        Error::check_dim(self.dim(), center.len())?;
        let inside = |p: &Vec<f64>| NormKind::Chebyshev.dist(p, center) <= half_width;
        Ok(match self {
            SetRepr::Polyhedron(p) => {
                let lo: Vec<f64> = center.iter().map(|c| c - half_width).collect();
                let hi: Vec<f64> = center.iter().map(|c| c + half_width).collect();
                SetRepr::Polyhedron(p.intersect(&Polyhedron::from_box(&lo, &hi))?)
            }
            SetRepr::FinitePointSet(s) => SetRepr::FinitePointSet(FinitePointSet {
                dim: s.dim,
                points: s.points.iter().filter(|p| inside(p)).cloned().collect(),
            }),
            SetRepr::SampledCloud(s) => SetRepr::SampledCloud(FinitePointSet {
                dim: s.dim,
                points: s.points.iter().filter(|p| inside(p)).cloned().collect(),
            }),
            SetRepr::IntervalUnion { intervals } => {
                SetRepr::IntervalUnion { intervals: intervals.clip(center[0] - half_width, center[0] + half_width) }
            }
            SetRepr::Union { dim, parts } => SetRepr::Union {
                dim: *dim,
                parts: parts.iter().map(|p| p.restrict_to_box(center, half_width)).collect::<Result<_>>()?,
            },
        })
    }

    /// Extreme points of the set: vertices, finite closed endpoints, or the
    /// points themselves. Polyhedra above [`MAX_VERTEX_DIM`] are refused.
    pub fn extreme_points(&self) -> Result<Vec<Vec<f64>>> {
        Ok(match self {
            SetRepr::Polyhedron(p) if p.dim == 1 => match p.to_interval()? {
                Some(iv) => {
                    let u = IntervalUnion::new(vec![iv])?;
                    return SetRepr::intervals(u).extreme_points();
                }
                None => Vec::new(),
            },
            SetRepr::Polyhedron(p) => enumerate_vertices(p)?.points,
            SetRepr::FinitePointSet(s) | SetRepr::SampledCloud(s) => s.points.clone(),
            SetRepr::IntervalUnion { intervals } => {
                let mut out = Vec::new();
                for iv in intervals.intervals() {
                    if iv.lo_closed {
                        out.push(vec![iv.lo]);
                    }
                    if iv.hi_closed && iv.hi != iv.lo {
                        out.push(vec![iv.hi]);
                    }
                }
                out
            }
            SetRepr::Union { parts, .. } => {
                let mut out = Vec::new();
                for p in parts {
                    out.extend(p.extreme_points()?);
                }
                out
            }
        })
    }

    /// Supremum of `|x|` over the set with a point attaining it; `None` for
    /// the empty set. Unbounded sets give `+inf` and no witness.
    pub fn max_norm(&self, norm: NormKind) -> Result<Option<(ExtendedReal, Option<Vec<f64>>)>> {
        if self.dim() == 1 {
            let u = self.to_intervals()?.expect("dim 1");
            if u.is_empty() {
                return Ok(None);
            }
            if !u.is_bounded() {
                return Ok(Some((ExtendedReal::INFINITY, None)));
            }
            let ivs = u.intervals();
            let lo = ivs[0].lo;
            let hi = ivs[ivs.len() - 1].hi;
            let x = if lo.abs() >= hi.abs() { lo } else { hi };
            return Ok(Some((ExtendedReal::new(x.abs()), Some(vec![x]))));
        }
        let best = |pts: &[Vec<f64>]| {
            pts.iter()
                .map(|p| (norm.norm(p), p))
                .max_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(v, p)| (ExtendedReal::new(v), Some(p.clone())))
        };
        match self {
            SetRepr::Polyhedron(p) => {
                if p.is_empty()? {
                    return Ok(None);
                }
                if !p.is_bounded()? {
                    return Ok(Some((ExtendedReal::INFINITY, None)));
                }
                if p.dim <= MAX_VERTEX_DIM {
                    return Ok(best(enumerate_vertices(p)?.points()));
                }
                // max of a norm over a polytope is attained at a support
                // point of some coordinate or diagonal direction; exact for
                // the max norm, a lower bound for the Euclidean one
                let mut pts = Vec::new();
                for i in 0..p.dim {
                    for s in [1.0, -1.0] {
                        let mut d = vec![0.0; p.dim];
                        d[i] = s;
                        if let Some((x, _)) = p.support_point(&d)? {
                            pts.push(x);
                        }
                    }
                }
                Ok(best(&pts))
            }
            SetRepr::FinitePointSet(s) | SetRepr::SampledCloud(s) => Ok(best(&s.points)),
            SetRepr::IntervalUnion { .. } => unreachable!("dim 1 handled above"),
            SetRepr::Union { parts, .. } => {
                let mut out: Option<(ExtendedReal, Option<Vec<f64>>)> = None;
                for part in parts {
                    if let Some(r) = part.max_norm(norm)? {
                        if out.as_ref().is_none_or(|o| r.0 > o.0) {
                            out = Some(r);
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`; entries are infinite along
    /// unbounded directions. `None` for the empty set.
    pub fn bounding_box(&self) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
        let n = self.dim();
        if self.is_empty()? {
            return Ok(None);
        }
        if n == 1 {
            let u = self.to_intervals()?.expect("dim 1");
            let ivs = u.intervals();
            return Ok(Some((vec![ivs[0].lo], vec![ivs[ivs.len() - 1].hi])));
        }
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        match self {
            SetRepr::Polyhedron(p) => {
                for i in 0..n {
                    let mut d = vec![0.0; n];
                    d[i] = 1.0;
                    hi[i] = p.support_point(&d)?.map_or(f64::NEG_INFINITY, |s| s.1);
                    d[i] = -1.0;
                    lo[i] = p.support_point(&d)?.map_or(f64::INFINITY, |s| -s.1);
                }
            }
            SetRepr::FinitePointSet(s) | SetRepr::SampledCloud(s) => {
                for p in &s.points {
                    for i in 0..n {
                        lo[i] = lo[i].min(p[i]);
                        hi[i] = hi[i].max(p[i]);
                    }
                }
            }
            SetRepr::IntervalUnion { .. } => unreachable!("dim 1 handled above"),
            SetRepr::Union { parts, .. } => {
                for part in parts {
                    if let Some((l, h)) = part.bounding_box()? {
                        for i in 0..n {
                            lo[i] = lo[i].min(l[i]);
                            hi[i] = hi[i].max(h[i]);
                        }
                    }
                }
            }
        }
        Ok(Some((lo, hi)))
    }
}

impl From<Polyhedron> for SetRepr {
    fn from(p: Polyhedron) -> Self {
        SetRepr::Polyhedron(p)
    }
}

impl From<IntervalUnion> for SetRepr {
    fn from(u: IntervalUnion) -> Self {
        SetRepr::intervals(u)
    }
}

impl From<FinitePointSet> for SetRepr {
    fn from(s: FinitePointSet) -> Self {
        SetRepr::FinitePointSet(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedup_on_construction() {
        let s = FinitePointSet::new(1, vec![vec![1.0], vec![1.0 + 1e-9], vec![0.0]]).unwrap();
        assert_eq!(s.points(), &[vec![0.0], vec![1.0]]);
    }

    #[test]
    fn empty_set_in_every_variant() {
        assert!(SetRepr::empty(2).is_empty().unwrap());
        assert!(SetRepr::intervals(IntervalUnion::empty()).is_empty().unwrap());
        let p = Polyhedron::new(1, vec![vec![1.0], vec![-1.0]], vec![-1.0, -1.0]).unwrap();
        assert!(SetRepr::Polyhedron(p).is_empty().unwrap());
        assert!(SetRepr::SampledCloud(FinitePointSet::empty(3)).is_empty().unwrap());
    }

    #[test]
    fn restriction_to_box() {
        let s = SetRepr::points(1, vec![vec![0.0], vec![1.0]]).unwrap();
        let r = s.restrict_to_box(&[1.0], 0.5).unwrap();
        assert_eq!(r, SetRepr::points(1, vec![vec![1.0]]).unwrap());
        let u = SetRepr::intervals(IntervalUnion::new(vec![Interval::closed(-1.0, 1.0)]).unwrap());
        let r = u.restrict_to_box(&[1.0], 0.25).unwrap();
        assert_eq!(r.to_intervals().unwrap().unwrap().intervals(), &[Interval::closed(0.75, 1.0)]);
    }

    #[test]
    fn max_norm_of_polytope() {
        let p = Polyhedron::from_box(&[-1.0, -2.0], &[1.0, 0.5]);
        let (v, _) = SetRepr::Polyhedron(p).max_norm(NormKind::Chebyshev).unwrap().unwrap();
        assert_eq!(v.value(), 2.0);
    }
}
