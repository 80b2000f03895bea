//! Sampling estimators of the Lipschitz upper semicontinuity modulus
//!
//! ```text
//! Lipusc M(ybar) = limsup_{y -> ybar} sup_{x in M(y)} d(x, M(ybar)) / d(y, ybar)
//! ```
//!
//! and of the calmness modulus at `(ybar, xbar)`, where the inner supremum
//! only runs over `x` near `xbar`. Each limsup is discretized on a
//! [`RadiusSchedule`]: for every radius the worst quotient over the sampled
//! parameters is recorded, and the last levels decide the classification.
//!
//! All estimates are lower bounds of the true moduli, up to the tolerance of
//! the distance computations. Calmness at several points and the semilocal
//! modulus reuse the same parameter samples, so the per-level quotients
//! satisfy the fundamental inequality sample by sample.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::families::{sample_parameters, SetValuedMapping};
use crate::geometry::{distance_to_set, sup_distance_over_set, SetRepr, SupExactness};
use crate::rng;
use crate::topology::{hypothesis_report, HypothesisVerdict};
use crate::{DEDUP_TOL, DIST_TOL};

/// Number of interior samples added to the extreme points of a nominal set.
pub const INTERIOR_PROBES: usize = 16;

/// The shrinking-neighbourhood protocol.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct RadiusSchedule {
    /// Strictly decreasing, positive.
    pub radii: Vec<f64>,
    pub samples_per_radius: usize,
    pub seed: u64,
    /// Calmness looks at image points within this multiple of the radius
    /// (Chebyshev box) around the reference point.
    pub localization_radius_factor: f64,
    /// Growth over the schedule that marks a divergent estimate.
    pub growth_factor: f64,
    /// Relative spread of the last three levels that counts as stable.
    pub stabilization_tol: f64,
    /// Boundary samples for suprema over polyhedra too large to enumerate.
    pub sup_budget: usize,
}

impl Default for RadiusSchedule {
    fn default() -> Self {
        RadiusSchedule {
            radii: geometric_radii(1e-1, 0.5, 12),
            samples_per_radius: 256,
            seed: 0,
            localization_radius_factor: 10.0,
            growth_factor: 4.0,
            stabilization_tol: 0.02,
            sup_budget: 64,
        }
    }
}

fn geometric_radii(r0: f64, rho: f64, levels: usize) -> Vec<f64> {
    let mut r = r0;
    let mut out = Vec::with_capacity(levels);
    for _ in 0..levels {
        out.push(r);
        r *= rho;
    }
    out
}

impl RadiusSchedule {
    /// `r_k = r0 * rho^k` for `k < levels`, other settings default.
    pub fn geometric(r0: f64, rho: f64, levels: usize) -> Result<Self> {
        let s = RadiusSchedule { radii: geometric_radii(r0, rho, levels), ..Default::default() };
        s.validate()?;
        Ok(s)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples_per_radius = samples;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.radii.is_empty() {
            return Err(Error::InvalidArgument("schedule needs at least one radius".into()));
        }
        if self.radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(Error::InvalidArgument("radii must be positive and finite".into()));
        }
        if self.radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument("radii must be strictly decreasing".into()));
        }
        if self.samples_per_radius == 0 {
            return Err(Error::InvalidArgument("samples_per_radius must be at least 1".into()));
        }
        if !(self.localization_radius_factor > 0.0) {
            return Err(Error::InvalidArgument("localization_radius_factor must be positive".into()));
        }
        if !(self.growth_factor > 1.0) || !(self.stabilization_tol >= 0.0) {
            return Err(Error::InvalidArgument(
                "growth_factor must exceed 1 and stabilization_tol be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Classification {
    Finite,
    Infinite,
    Inconclusive,
}

/// Worst quotient at one radius.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RadiusLevel {
    pub radius: f64,
    pub worst_quotient: ExtendedReal,
    pub witness_param: Option<Vec<f64>>,
    pub witness_x: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModulusEstimate {
    pub per_radius: Vec<RadiusLevel>,
    /// `+inf` exactly when `classification` is `Infinite`; otherwise the
    /// larger of the last two levels.
    pub value: ExtendedReal,
    pub classification: Classification,
    /// `(param, x)` realizing the worst quotient of the last level.
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
    /// `Exact` when every inner supremum was computed exactly.
    pub exactness: SupExactness,
}

impl ModulusEstimate {
    fn from_levels(per_radius: Vec<RadiusLevel>, exactness: SupExactness, schedule: &RadiusSchedule) -> Self {
        let (classification, value) = classify(&per_radius, schedule);
        let witness = per_radius.last().and_then(|l| Some((l.witness_param.clone()?, l.witness_x.clone()?)));
        ModulusEstimate { per_radius, value, classification, witness, exactness }
    }
}

/// Finite when the last three levels agree within `stabilization_tol`
/// (or are all zero); infinite when they increase strictly and the last
/// level exceeds the first by `growth_factor`; otherwise inconclusive.
fn classify(levels: &[RadiusLevel], s: &RadiusSchedule) -> (Classification, ExtendedReal) {
    let q: Vec<ExtendedReal> = levels.iter().map(|l| l.worst_quotient).collect();
    let n = q.len();
    let tail_max = q[n.saturating_sub(2)..].iter().copied().fold(ExtendedReal::ZERO, ExtendedReal::max);
    if q[n - 1].is_infinite() {
        return (Classification::Infinite, ExtendedReal::INFINITY);
    }
    if n < 3 {
        return (Classification::Inconclusive, tail_max);
    }
    let last3 = &q[n - 3..];
    if last3.iter().all(|v| v.is_finite()) {
        let hi = last3.iter().map(|v| v.value()).fold(0.0, f64::max);
        let lo = last3.iter().map(|v| v.value()).fold(f64::INFINITY, f64::min);
        if hi <= DIST_TOL || hi - lo <= s.stabilization_tol * hi {
            return (Classification::Finite, tail_max);
        }
        let step = 1.0 + s.stabilization_tol;
        let rising = last3[1].value() > step * last3[0].value() && last3[2].value() > step * last3[1].value();
        if rising && q[n - 1].value() >= s.growth_factor * q[0].value() {
            return (Classification::Infinite, ExtendedReal::INFINITY);
        }
    }
    (Classification::Inconclusive, tail_max)
}

/// `num / den` with `0/0 := 0`: numerators below [`DIST_TOL`] count as zero.
fn quotient(num: ExtendedReal, den: f64) -> ExtendedReal {
    if num.is_infinite() {
        ExtendedReal::INFINITY
    } else if num.value() < DIST_TOL {
        ExtendedReal::ZERO
    } else {
        ExtendedReal::new(num.value() / den)
    }
}

struct Track {
    best: ExtendedReal,
    param: Option<Vec<f64>>,
    x: Option<Vec<f64>>,
}

impl Track {
    fn new() -> Self {
        Track { best: ExtendedReal::ZERO, param: None, x: None }
    }

    fn offer(&mut self, q: ExtendedReal, param: &[f64], x: Option<Vec<f64>>) {
        if self.param.is_none() || q > self.best || (q == self.best && self.x.is_none() && x.is_some()) {
            self.best = q;
            self.param = Some(param.to_vec());
            self.x = x;
        }
    }

    fn level(self, radius: f64) -> RadiusLevel {
        RadiusLevel { radius, worst_quotient: self.best, witness_param: self.param, witness_x: self.x }
    }
}

/// One pass over the schedule. Column 0 is the unlocalized (semilocal)
/// quotient, column `i + 1` the calmness quotient at `centers[i]`.
fn sweep<M: SetValuedMapping + ?Sized>(
    family: &M,
    ybar: &[f64],
    nominal: &SetRepr,
    schedule: &RadiusSchedule,
    centers: &[Vec<f64>],
) -> Result<(Vec<Vec<RadiusLevel>>, SupExactness)> {
    let norm = family.norms().image;
    let mut columns: Vec<Vec<RadiusLevel>> = vec![Vec::with_capacity(schedule.radii.len()); centers.len() + 1];
    let mut exactness = SupExactness::Exact;
    for (k, &r) in schedule.radii.iter().enumerate() {
        let ys = sample_parameters(family, ybar, r, schedule.samples_per_radius, rng::level_seed(schedule.seed, k))?;
        let mut tracks: Vec<Track> = (0..=centers.len()).map(|_| Track::new()).collect();
        let half_width = schedule.localization_radius_factor * r;
        for y in &ys {
            let d = family.parameter_distance(y, ybar);
            if !(d > 0.0) {
                continue;
            }
            let image = family.evaluate(y)?;
            let sup = sup_distance_over_set(&image, nominal, norm, schedule.sup_budget)?;
            exactness = exactness.max(sup.exactness);
            tracks[0].offer(quotient(sup.value_or_zero(), d), y, sup.witness);
            for (i, c) in centers.iter().enumerate() {
                let local = image.restrict_to_box(c, half_width)?;
                let sup = sup_distance_over_set(&local, nominal, norm, schedule.sup_budget)?;
                exactness = exactness.max(sup.exactness);
                tracks[i + 1].offer(quotient(sup.value_or_zero(), d), y, sup.witness);
            }
        }
        for (col, t) in columns.iter_mut().zip(tracks) {
            col.push(t.level(r));
        }
    }
    Ok((columns, exactness))
}

fn nominal_image<M: SetValuedMapping + ?Sized>(family: &M, ybar: &[f64]) -> Result<SetRepr> {
    let nominal = family.evaluate(ybar)?;
    if nominal.is_empty()? {
        return Err(Error::EmptyNominal);
    }
    Ok(nominal)
}

fn check_in_nominal(nominal: &SetRepr, x: &[f64]) -> Result<()> {
    let d = distance_to_set(x, nominal, crate::geometry::NormKind::Chebyshev)?;
    if d.value() > DEDUP_TOL {
        return Err(Error::NotInNominal { distance: d.value() });
    }
    Ok(())
}

/// Sampling estimate of `Lipusc M(ybar)`.
pub fn estimate_lipusc<M: SetValuedMapping + ?Sized>(
    family: &M,
    ybar: &[f64],
    schedule: &RadiusSchedule,
) -> Result<ModulusEstimate> {
    schedule.validate()?;
    let nominal = nominal_image(family, ybar)?;
    let (mut cols, ex) = sweep(family, ybar, &nominal, schedule, &[])?;
    Ok(ModulusEstimate::from_levels(cols.remove(0), ex, schedule))
}

/// Sampling estimate of `clm M(ybar, xbar)`.
pub fn estimate_calmness<M: SetValuedMapping + ?Sized>(
    family: &M,
    ybar: &[f64],
    xbar: &[f64],
    schedule: &RadiusSchedule,
) -> Result<ModulusEstimate> {
    schedule.validate()?;
    let nominal = nominal_image(family, ybar)?;
    check_in_nominal(&nominal, xbar)?;
    let (mut cols, ex) = sweep(family, ybar, &nominal, schedule, &[xbar.to_vec()])?;
    Ok(ModulusEstimate::from_levels(cols.remove(1), ex, schedule))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointCalmness {
    pub point: Vec<f64>,
    pub estimate: ModulusEstimate,
}

/// Supremum of calmness estimates over nominal probe points.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SupCalmness {
    /// Per-level maxima over all points, classified like any estimate.
    pub estimate: ModulusEstimate,
    pub points: Vec<PointCalmness>,
}

fn combine(points: &[Vec<f64>], cols: &[Vec<RadiusLevel>], ex: SupExactness, schedule: &RadiusSchedule) -> SupCalmness {
    let levels = schedule.radii.len();
    let mut combined = Vec::with_capacity(levels);
    for k in 0..levels {
        let mut best = RadiusLevel {
            radius: schedule.radii[k],
            worst_quotient: ExtendedReal::ZERO,
            witness_param: None,
            witness_x: None,
        };
        for col in cols {
            if col[k].worst_quotient > best.worst_quotient
                || (best.witness_x.is_none()
                    && col[k].witness_x.is_some()
                    && col[k].worst_quotient >= best.worst_quotient)
            {
                best = col[k].clone();
            }
        }
        combined.push(best);
    }
    SupCalmness {
        estimate: ModulusEstimate::from_levels(combined, ex, schedule),
        points: points
            .iter()
            .zip(cols)
            .map(|(p, c)| PointCalmness {
                point: p.clone(),
                estimate: ModulusEstimate::from_levels(c.clone(), ex, schedule),
            })
            .collect(),
    }
}

/// `sup_{x in probes} clm M(ybar, x)`. Every probe must lie in `M(ybar)`;
/// see [`nominal_probe_points`] for the standard list.
pub fn sup_calmness_over_nominal<M: SetValuedMapping + ?Sized>(
    family: &M,
    ybar: &[f64],
    probes: &[Vec<f64>],
    schedule: &RadiusSchedule,
) -> Result<SupCalmness> {
    schedule.validate()?;
    if probes.is_empty() {
        return Err(Error::InvalidArgument("at least one nominal probe point is needed".into()));
    }
    let nominal = nominal_image(family, ybar)?;
    for p in probes {
        check_in_nominal(&nominal, p)?;
    }
    let (cols, ex) = sweep(family, ybar, &nominal, schedule, probes)?;
    Ok(combine(probes, &cols[1..], ex, schedule))
}

/// Extreme points of the nominal set (closed endpoints, vertices, points)
/// plus [`INTERIOR_PROBES`] interior samples. Open endpoints are left out:
/// they are not in the set.
pub fn nominal_probe_points(nominal: &SetRepr, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    collect_probes(nominal, seed, &mut out)?;
    let mut unique: Vec<Vec<f64>> = Vec::with_capacity(out.len());
    for p in out {
        if !unique.iter().any(|q| crate::geometry::NormKind::Chebyshev.dist(q, &p) <= DEDUP_TOL) {
            unique.push(p);
        }
    }
    Ok(unique)
}

fn collect_probes(set: &SetRepr, seed: u64, out: &mut Vec<Vec<f64>>) -> Result<()> {
    if set.is_empty()? {
        return Ok(());
    }
    if set.dim() == 1 {
        let u = set.to_intervals()?.expect("dim 1");
        for iv in u.intervals() {
            if iv.lo_closed {
                out.push(vec![iv.lo]);
            }
            if iv.hi_closed {
                out.push(vec![iv.hi]);
            }
        }
        let bounded: Vec<_> = u.intervals().iter().filter(|iv| iv.is_bounded() && iv.hi > iv.lo).collect();
        let total: f64 = bounded.iter().map(|iv| iv.hi - iv.lo).sum();
        if total > 0.0 {
            for iv in &bounded {
                let m = libm::ceil(INTERIOR_PROBES as f64 * (iv.hi - iv.lo) / total) as usize;
                for j in 0..m {
                    out.push(vec![iv.lo + (iv.hi - iv.lo) * (j as f64 + 0.5) / m as f64]);
                }
            }
        }
        for iv in u.intervals().iter().filter(|iv| !iv.is_bounded()) {
            // one interior point per unbounded piece
            let x = if iv.lo.is_finite() {
                iv.lo + 1.0
            } else if iv.hi.is_finite() {
                iv.hi - 1.0
            } else {
                0.0
            };
            out.push(vec![x]);
        }
        return Ok(());
    }
    match set {
        SetRepr::Polyhedron(p) => {
            let bounded = if p.is_bounded()? {
                p.clone()
            } else {
                let x0 = p.feasible_point()?.expect("nonempty");
                let w = 10.0 * (1.0 + x0.iter().fold(0.0f64, |m, v| m.max(v.abs())));
                let lo: Vec<f64> = x0.iter().map(|v| v - w).collect();
                let hi: Vec<f64> = x0.iter().map(|v| v + w).collect();
                p.intersect(&crate::geometry::Polyhedron::from_box(&lo, &hi))?
            };
            let verts = SetRepr::Polyhedron(bounded).extreme_points()?;
            let mut r = rng::stream(seed, u64::MAX);
            for _ in 0..INTERIOR_PROBES {
                let w: Vec<f64> = verts.iter().map(|_| -libm::log(rng::uniform_open_closed(&mut r))).collect();
                let s: f64 = w.iter().sum();
                let x = (0..p.dim).map(|j| verts.iter().zip(&w).map(|(v, wi)| v[j] * wi).sum::<f64>() / s).collect();
                out.push(x);
            }
            out.extend(verts);
        }
        SetRepr::FinitePointSet(s) | SetRepr::SampledCloud(s) => out.extend(s.points().iter().cloned()),
        SetRepr::IntervalUnion { .. } => unreachable!("dim 1 handled above"),
        SetRepr::Union { parts, .. } => {
            for (i, part) in parts.iter().enumerate() {
                collect_probes(part, rng::mix(seed ^ i as u64), out)?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EqualityVerdict {
    Equal,
    NotEqual,
    /// The moduli differ and one of the premises fails.
    ConsistentWithCounterexample,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EqualityReport {
    pub lipusc: ModulusEstimate,
    pub sup_calmness: SupCalmness,
    /// `lipusc >= sup_clm - rel_tol * max(1, sup_clm)`.
    pub inequality_holds: bool,
    pub verdict: EqualityVerdict,
    pub hypotheses: HypothesisVerdict,
    pub rel_tol: f64,
}

/// Estimates both sides of `Lipusc M(ybar) = sup_x clm M(ybar, x)` on one
/// set of samples and checks the premises of the equality.
pub fn verify_equality<M: SetValuedMapping + ?Sized>(
    family: &M,
    ybar: &[f64],
    schedule: &RadiusSchedule,
    rel_tol: f64,
) -> Result<EqualityReport> {
    schedule.validate()?;
    let nominal = nominal_image(family, ybar)?;
    let probes = nominal_probe_points(&nominal, schedule.seed)?;
    let (cols, ex) = sweep(family, ybar, &nominal, schedule, &probes)?;
    let lipusc = ModulusEstimate::from_levels(cols[0].clone(), ex, schedule);
    let sup_calmness = combine(&probes, &cols[1..], ex, schedule);
    let hypotheses = hypothesis_report(family, ybar, schedule)?;

    let l = lipusc.value;
    let s = sup_calmness.estimate.value;
    let inequality_holds = match (l.finite(), s.finite()) {
        (_, None) => l.is_infinite(),
        (None, Some(_)) => true,
        (Some(l), Some(s)) => l >= s - rel_tol * s.max(1.0),
    };
    let equal = match (l.finite(), s.finite()) {
        (None, None) => true,
        (Some(l), Some(s)) => (l - s).abs() <= rel_tol * l.max(s).max(1e-6),
        _ => false,
    };
    let decided = |c: Classification| c != Classification::Inconclusive;
    let verdict = if equal && decided(lipusc.classification) && decided(sup_calmness.estimate.classification) {
        EqualityVerdict::Equal
    } else if !equal && !hypotheses.applicable {
        EqualityVerdict::ConsistentWithCounterexample
    } else if !equal && decided(lipusc.classification) && decided(sup_calmness.estimate.classification) {
        EqualityVerdict::NotEqual
    } else {
        EqualityVerdict::Inconclusive
    };
    Ok(EqualityReport { lipusc, sup_calmness, inequality_holds, verdict, hypotheses, rel_tol })
}
