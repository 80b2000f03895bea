use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A nonempty interval of the real line. Infinite endpoints are always open.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Interval { lo, hi, lo_closed: lo_closed && lo.is_finite(), hi_closed: hi_closed && hi.is_finite() }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval::new(lo, hi, true, true)
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Interval::new(lo, hi, false, false)
    }

    pub fn point(x: f64) -> Self {
        Interval::closed(x, x)
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    /// Distance from `x` to the closure.
    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

/// A finite union of pairwise disjoint intervals, sorted left to right.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Vec<Interval>", into = "Vec<Interval>"))]
pub struct IntervalUnion {
    intervals: Vec<Interval>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion { intervals: Vec::new() }
    }

    /// Sorts, drops empty pieces and merges pieces that overlap or share a
    /// closed endpoint.
    pub fn new(mut pieces: Vec<Interval>) -> Result<Self> {
        if pieces.iter().any(|iv| iv.lo.is_nan() || iv.hi.is_nan()) {
            return Err(Error::InvalidArgument("interval endpoint is NaN".into()));
        }
        pieces.retain(|iv| !iv.is_empty());
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
        let mut merged: Vec<Interval> = Vec::with_capacity(pieces.len());
        for iv in pieces {
            if let Some(last) = merged.last_mut() {
                let touches = iv.lo < last.hi || (iv.lo == last.hi && (iv.lo_closed || last.hi_closed));
                if touches {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                        last.hi_closed = iv.hi_closed;
                    } else if iv.hi == last.hi {
                        last.hi_closed |= iv.hi_closed;
                    }
                    continue;
                }
            }
            merged.push(iv);
        }
        Ok(IntervalUnion { intervals: merged })
    }

    pub fn from_points(points: impl IntoIterator<Item = f64>) -> Result<Self> {
        IntervalUnion::new(points.into_iter().map(Interval::point).collect())
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    /// Distance from `x` to the closure (`+inf` when empty).
    pub fn distance(&self, x: f64) -> f64 {
        self.intervals.iter().map(|iv| iv.distance(x)).fold(f64::INFINITY, f64::min)
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals.iter().all(Interval::is_bounded)
    }

    /// Closed iff every finite endpoint is included.
    pub fn is_closed(&self) -> bool {
        self.open_endpoints().is_empty()
    }

    /// Finite endpoints that are excluded from the set.
    pub fn open_endpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for iv in &self.intervals {
            if iv.lo.is_finite() && !iv.lo_closed {
                out.push(iv.lo);
            }
            if iv.hi.is_finite() && !iv.hi_closed {
                out.push(iv.hi);
            }
        }
        out
    }

    /// Intersection with the closed interval `[lo, hi]`.
    pub fn clip(&self, lo: f64, hi: f64) -> IntervalUnion {
        let pieces = self
            .intervals
            .iter()
            .map(|iv| {
                let (l, lc) =
                    if iv.lo > lo || (iv.lo == lo && !iv.lo_closed) { (iv.lo, iv.lo_closed) } else { (lo, true) };
                let (h, hc) =
                    if iv.hi < hi || (iv.hi == hi && !iv.hi_closed) { (iv.hi, iv.hi_closed) } else { (hi, true) };
                Interval::new(l, h, lc, hc)
            })
            .filter(|iv| !iv.is_empty())
            .collect();
        IntervalUnion { intervals: pieces }
    }

    pub fn union(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        IntervalUnion::new(all).expect("inputs are NaN-free")
    }

    /// Whether `self` is contained in `other` up to `tol` at the endpoints.
    pub fn is_subset_of(&self, other: &IntervalUnion, tol: f64) -> bool {
        self.intervals.iter().all(|iv| other.intervals.iter().any(|ov| iv.lo >= ov.lo - tol && iv.hi <= ov.hi + tol))
    }
}

impl TryFrom<Vec<Interval>> for IntervalUnion {
    type Error = Error;
    fn try_from(v: Vec<Interval>) -> Result<Self> {
        IntervalUnion::new(v)
    }
}

impl From<IntervalUnion> for Vec<Interval> {
    fn from(u: IntervalUnion) -> Self {
        u.intervals
    }
}
