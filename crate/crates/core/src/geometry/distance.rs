use alloc::vec;
use alloc::vec::Vec;

use super::polyhedron::{chebyshev_distance, enumerate_vertices, project_onto_polyhedron, MAX_VERTEX_DIM};
use super::{IntervalUnion, NormKind, SetRepr};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::rng;

/// How far a [`SupDistance`] can be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SupExactness {
    Exact,
    /// Computed from finitely many samples of the source.
    LowerBound,
    /// The source is unbounded; the value is `+inf` by convention.
    UnboundedSource,
}

/// `sup_{x in source} d(x, target)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupDistance {
    /// `None` when the source is empty (the supremum is `-inf`).
    pub value: Option<ExtendedReal>,
    /// A source point attaining `value`, when one exists.
    pub witness: Option<Vec<f64>>,
    pub exactness: SupExactness,
}

impl SupDistance {
    /// The value with the empty-source case mapped to zero.
    pub fn value_or_zero(&self) -> ExtendedReal {
        self.value.unwrap_or(ExtendedReal::ZERO)
    }

    fn empty() -> Self {
        SupDistance { value: None, witness: None, exactness: SupExactness::Exact }
    }
}

/// `inf_{z in set} d(point, z)`; `+inf` for the empty set.
///
/// Exact for polyhedra, finite point sets and interval unions. For sampled
/// clouds the result is an upper bound on the distance to the underlying set.
pub fn distance_to_set(point: &[f64], set: &SetRepr, norm: NormKind) -> Result<ExtendedReal> {
    Error::check_dim(set.dim(), point.len())?;
    if set.dim() == 1 {
        let u = set.to_intervals()?.expect("dim 1");
        return Ok(ExtendedReal::new(u.distance(point[0])));
    }
    match set {
        SetRepr::Polyhedron(p) => match norm {
            NormKind::Euclidean => Ok(project_onto_polyhedron(point, p)?.distance),
            NormKind::Chebyshev => chebyshev_distance(point, p),
        },
        SetRepr::FinitePointSet(s) | SetRepr::SampledCloud(s) => Ok(s
            .points()
            .iter()
            .map(|z| ExtendedReal::new(norm.dist(point, z)))
            .min()
            .unwrap_or(ExtendedReal::INFINITY)),
        SetRepr::IntervalUnion { .. } => unreachable!("dim 1 handled above"),
        SetRepr::Union { parts, .. } => {
            let mut best = ExtendedReal::INFINITY;
            for part in parts {
                best = best.min(distance_to_set(point, part, norm)?);
            }
            Ok(best)
        }
    }
}

/// `sup_{x in source} d(x, target)`.
///
/// * one-dimensional sets: exact, by evaluating source endpoints and the
///   midpoints of gaps in the target;
/// * finite point sets: exact;
/// * bounded polyhedra up to [`MAX_VERTEX_DIM`] with a convex target: exact,
///   because a convex function attains its maximum at a vertex;
/// * anything else: `budget` boundary samples, flagged as a lower bound.
///
/// Unbounded polyhedral sources return `+inf` flagged `UnboundedSource`.
pub fn sup_distance_over_set(source: &SetRepr, target: &SetRepr, norm: NormKind, budget: usize) -> Result<SupDistance> {
    Error::check_dim(source.dim(), target.dim())?;
    if source.dim() == 1 {
        let s = source.to_intervals()?.expect("dim 1");
        let t = target.to_intervals()?.expect("dim 1");
        let mut out = sup_distance_1d(&s, &t);
        if matches!(source, SetRepr::SampledCloud(_)) && out.exactness == SupExactness::Exact {
            out.exactness = SupExactness::LowerBound;
        }
        return Ok(out);
    }
    match source {
        SetRepr::FinitePointSet(s) | SetRepr::SampledCloud(s) => {
            let mut out = SupDistance::empty();
            for p in s.points() {
                let d = distance_to_set(p, target, norm)?;
                if out.value.is_none_or(|v| d > v) {
                    out.value = Some(d);
                    out.witness = Some(p.clone());
                }
            }
            if matches!(source, SetRepr::SampledCloud(_)) {
                out.exactness = SupExactness::LowerBound;
            }
            Ok(out)
        }
        SetRepr::Polyhedron(p) => {
            if p.is_empty()? {
                return Ok(SupDistance::empty());
            }
            if !p.is_bounded()? {
                return Ok(SupDistance {
                    value: Some(ExtendedReal::INFINITY),
                    witness: None,
                    exactness: SupExactness::UnboundedSource,
                });
            }
            let mut candidates = Vec::new();
            let mut exact = false;
            if p.dim <= MAX_VERTEX_DIM {
                candidates.extend(enumerate_vertices(p)?.points().iter().cloned());
                exact = target.is_convex();
            }
            if !exact {
                let seed = rng::mix(budget as u64 ^ 0x5eed);
                for k in 0..budget {
                    let mut r = rng::stream(seed, k as u64);
                    let dir: Vec<f64> = (0..p.dim).map(|_| rng::gaussian(&mut r)).collect();
                    if let Some((x, _)) = p.support_point(&dir)? {
                        candidates.push(x);
                    }
                }
            }
            let mut out = SupDistance::empty();
            for x in candidates {
                let d = distance_to_set(&x, target, norm)?;
                if out.value.is_none_or(|v| d > v) {
                    out.value = Some(d);
                    out.witness = Some(x);
                }
            }
            out.exactness = if exact { SupExactness::Exact } else { SupExactness::LowerBound };
            Ok(out)
        }
        SetRepr::IntervalUnion { .. } => unreachable!("dim 1 handled above"),
        SetRepr::Union { parts, .. } => {
            let mut out = SupDistance::empty();
            for part in parts {
                let r = sup_distance_over_set(part, target, norm, budget)?;
                out.exactness = out.exactness.max(r.exactness);
                if let Some(v) = r.value {
                    if out.value.is_none_or(|w| v > w) {
                        out.value = Some(v);
                        out.witness = r.witness;
                    }
                }
            }
            Ok(out)
        }
    }
}

fn sup_distance_1d(source: &IntervalUnion, target: &IntervalUnion) -> SupDistance {
    if source.is_empty() {
        return SupDistance::empty();
    }
    let unbounded =
        || SupDistance { value: Some(ExtendedReal::INFINITY), witness: None, exactness: SupExactness::UnboundedSource };
    let t = target.intervals();
    if t.is_empty() {
        let iv = source.intervals()[0];
        let x = if iv.lo.is_finite() {
            iv.lo
        } else if iv.hi.is_finite() {
            iv.hi
        } else {
            0.0
        };
        return SupDistance {
            value: Some(ExtendedReal::INFINITY),
            witness: Some(vec![x]),
            exactness: SupExactness::Exact,
        };
    }
    let t_lo = t[0].lo;
    let t_hi = t[t.len() - 1].hi;
    // the distance to the target is piecewise linear with kinks at gap midpoints
    let gap_mids: Vec<f64> = t.windows(2).map(|w| 0.5 * (w[0].hi + w[1].lo)).collect();

    let mut best: Option<(f64, f64)> = None;
    let mut consider = |x: f64| {
        let d = target.distance(x);
        if best.is_none_or(|(v, _)| d > v) {
            best = Some((d, x));
        }
    };
    for iv in source.intervals() {
        if (iv.hi == f64::INFINITY && t_hi < f64::INFINITY) || (iv.lo == f64::NEG_INFINITY && t_lo > f64::NEG_INFINITY)
        {
            return unbounded();
        }
        if iv.lo.is_finite() {
            consider(iv.lo);
        }
        if iv.hi.is_finite() {
            consider(iv.hi);
        }
        for &m in &gap_mids {
            if m >= iv.lo && m <= iv.hi {
                consider(m);
            }
        }
        if !iv.lo.is_finite() && !iv.hi.is_finite() && gap_mids.is_empty() {
            consider(t_lo.max(t_hi.min(0.0)));
        }
    }
    let (v, x) = best.expect("nonempty source has a candidate");
    SupDistance { value: Some(ExtendedReal::new(v)), witness: Some(vec![x]), exactness: SupExactness::Exact }
}
