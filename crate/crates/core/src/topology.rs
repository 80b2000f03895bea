//! Numerical checks of the premises under which the semilocal modulus
//! equals the supremum of local calmness moduli: outer semicontinuity at
//! `ybar` and local boundedness around it.
//!
//! Sampling can refute these properties but never prove them, so `Pass`
//! means "not refuted at the given tolerance".

use alloc::vec::Vec;

use crate::error::Result;
use crate::estimation::RadiusSchedule;
use crate::extended::ExtendedReal;
use crate::families::{sample_parameters, SetValuedMapping};
use crate::geometry::{sup_distance_over_set, NormKind, SetRepr};
use crate::rng;

/// Default distance above which a cluster point counts as outside `M(ybar)`.
pub const OSC_TOL: f64 = 1e-6;

/// Half-width of the osc sampling window as a multiple of the nominal
/// set's circumradius (at least one).
pub const WINDOW_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FailureReason {
    /// The nominal set misses one of its boundary points.
    NonClosedNominal,
    /// Perturbed image points accumulate away from the nominal set.
    ClusterOutsideNominal,
    /// Image norms blow up as the parameter approaches `ybar`.
    NormGrowth,
}

/// An offending graph point: `point in M(param)` with `value` its distance
/// to `M(ybar)` or its norm.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Witness {
    pub param: Vec<f64>,
    pub point: Option<Vec<f64>>,
    pub value: ExtendedReal,
    pub reason: FailureReason,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "outcome", rename_all = "snake_case"))]
pub enum CheckOutcome {
    Pass,
    Fail { witness: Witness },
    Inconclusive,
}

impl CheckOutcome {
    pub fn is_pass(&self) -> bool {
        matches!(self, CheckOutcome::Pass)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            CheckOutcome::Fail { witness } => Some(witness),
            _ => None,
        }
    }
}

/// Premises under which `Lipusc M(ybar) = sup_x clm M(ybar, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Premise {
    ClosedNominal,
    OuterSemicontinuity,
    LocalBoundedness,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HypothesisVerdict {
    pub osc: CheckOutcome,
    pub locally_bounded: CheckOutcome,
    /// Both checks passed.
    pub applicable: bool,
}

impl HypothesisVerdict {
    /// Premises with a failing check, in a fixed order.
    pub fn violated_premises(&self) -> Vec<Premise> {
        let mut out = Vec::new();
        if let Some(w) = self.osc.witness() {
            out.push(match w.reason {
                FailureReason::NonClosedNominal => Premise::ClosedNominal,
                _ => Premise::OuterSemicontinuity,
            });
        }
        if self.locally_bounded.witness().is_some() {
            out.push(Premise::LocalBoundedness);
        }
        out
    }
}

/// Center and half-width of the osc window.
fn window(nominal: &SetRepr) -> Result<(Vec<f64>, f64)> {
    let n = nominal.dim();
    let Some((lo, hi)) = nominal.bounding_box()? else {
        return Ok((alloc::vec![0.0; n], WINDOW_FACTOR));
    };
    let finite = lo.iter().chain(&hi).all(|v| v.is_finite());
    if !finite {
        let c = nominal.extreme_points().ok().and_then(|p| p.into_iter().next());
        let c = c.unwrap_or_else(|| {
            lo.iter()
                .zip(&hi)
                .map(|(l, h)| {
                    if l.is_finite() {
                        *l
                    } else if h.is_finite() {
                        *h
                    } else {
                        0.0
                    }
                })
                .collect()
        });
        return Ok((c, WINDOW_FACTOR));
    }
    let center: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect();
    let radius = NormKind::Euclidean.dist(&lo, &hi) * 0.5;
    Ok((center, WINDOW_FACTOR * radius.max(1.0)))
}

struct LevelMax {
    value: ExtendedReal,
    param: Vec<f64>,
    point: Option<Vec<f64>>,
}

fn per_level<M: SetValuedMapping + ?Sized>(
    family: &M,
    ybar: &[f64],
    schedule: &RadiusSchedule,
    mut score: impl FnMut(&SetRepr) -> Result<(ExtendedReal, Option<Vec<f64>>)>,
) -> Result<Vec<LevelMax>> {
    let mut out = Vec::with_capacity(schedule.radii.len());
    for (k, &r) in schedule.radii.iter().enumerate() {
        let ys = sample_parameters(family, ybar, r, schedule.samples_per_radius, rng::level_seed(schedule.seed, k))?;
        let mut best = LevelMax { value: ExtendedReal::ZERO, param: ys[0].clone(), point: None };
        for y in &ys {
            let image = family.evaluate(y)?;
            let (v, p) = score(&image)?;
            if v > best.value || (best.point.is_none() && p.is_some() && v >= best.value) {
                best = LevelMax { value: v, param: y.clone(), point: p };
            }
        }
        out.push(best);
    }
    Ok(out)
}

/// Refutation test for outer semicontinuity at `ybar`.
///
/// A nominal set missing a boundary point fails at once. Otherwise the
/// perturbed images are clipped to a window around `M(ybar)` and the
/// largest distance `D_k` to `M(ybar)` is tracked per level. The check fails
/// when `D_k` stays above `tol` without decaying and the witnesses of the
/// last three levels cluster; it passes when `D_k` is below `tol` or decays.
pub fn check_outer_semicontinuity<M: SetValuedMapping + ?Sized>(
    family: &M,
    ybar: &[f64],
    schedule: &RadiusSchedule,
    tol: f64,
) -> Result<CheckOutcome> {
    schedule.validate()?;
    let nominal = family.evaluate(ybar)?;
    if let Some(p) = nominal.open_boundary_points().into_iter().next() {
        return Ok(CheckOutcome::Fail {
            witness: Witness {
                param: ybar.to_vec(),
                point: Some(p),
                value: ExtendedReal::ZERO,
                reason: FailureReason::NonClosedNominal,
            },
        });
    }
    let (center, half) = window(&nominal)?;
    let norm = family.norms().image;
    let budget = schedule.sup_budget;
    let levels = per_level(family, ybar, schedule, |image| {
        let clipped = image.restrict_to_box(&center, half)?;
        let sup = sup_distance_over_set(&clipped, &nominal, norm, budget)?;
        Ok((sup.value_or_zero(), sup.witness))
    })?;
    let k = levels.len() - 1;
    let last = &levels[k];
    if last.value.value() <= tol && last.value.is_finite() {
        return Ok(CheckOutcome::Pass);
    }
    if k < 2 {
        return Ok(CheckOutcome::Inconclusive);
    }
    let earlier = levels[k - 2].value;
    let persistent = last.value.value() >= 0.9 * earlier.value();
    let clustered = match (&levels[k - 2].point, &levels[k - 1].point, &last.point) {
        (Some(a), Some(b), Some(c)) => {
            let spread = norm.dist(a, c).max(norm.dist(b, c)).max(norm.dist(a, b));
            spread <= 0.1 * last.value.value().max(tol)
        }
        _ => false,
    };
    if persistent && clustered {
        return Ok(CheckOutcome::Fail {
            witness: Witness {
                param: last.param.clone(),
                point: last.point.clone(),
                value: last.value,
                reason: FailureReason::ClusterOutsideNominal,
            },
        });
    }
    if last.value.value() <= 0.75 * earlier.value() {
        return Ok(CheckOutcome::Pass);
    }
    Ok(CheckOutcome::Inconclusive)
}

/// Tracks the largest image norm per level. Fails when it is infinite or
/// at least doubles over two levels while exceeding the nominal norm by
/// more than one; passes when it stops growing.
pub fn check_local_boundedness<M: SetValuedMapping + ?Sized>(
    family: &M,
    ybar: &[f64],
    schedule: &RadiusSchedule,
) -> Result<CheckOutcome> {
    schedule.validate()?;
    let norm = family.norms().image;
    let nominal = family.evaluate(ybar)?;
    let base = nominal.max_norm(norm)?.map_or(ExtendedReal::ZERO, |m| m.0);
    let levels =
        per_level(family, ybar, schedule, |image| Ok(image.max_norm(norm)?.unwrap_or((ExtendedReal::ZERO, None))))?;
    let k = levels.len() - 1;
    let last = &levels[k];
    let fail = |l: &LevelMax| CheckOutcome::Fail {
        witness: Witness {
            param: l.param.clone(),
            point: l.point.clone(),
            value: l.value,
            reason: FailureReason::NormGrowth,
        },
    };
    if last.value.is_infinite() {
        return Ok(fail(last));
    }
    if base.is_infinite() {
        return Ok(CheckOutcome::Fail {
            witness: Witness { param: ybar.to_vec(), point: None, value: base, reason: FailureReason::NormGrowth },
        });
    }
    if k < 2 {
        return Ok(CheckOutcome::Inconclusive);
    }
    let earlier = levels[k - 2].value.value();
    let v = last.value.value();
    if v >= 2.0 * earlier && v > base.value() + 1.0 {
        return Ok(fail(last));
    }
    if v <= 1.02 * earlier + 1e-12 {
        return Ok(CheckOutcome::Pass);
    }
    Ok(CheckOutcome::Inconclusive)
}

/// Both checks with the default osc tolerance.
pub fn hypothesis_report<M: SetValuedMapping + ?Sized>(
    family: &M,
    ybar: &[f64],
    schedule: &RadiusSchedule,
) -> Result<HypothesisVerdict> {
    let osc = check_outer_semicontinuity(family, ybar, schedule, OSC_TOL)?;
    let locally_bounded = check_local_boundedness(family, ybar, schedule)?;
    let applicable = osc.is_pass() && locally_bounded.is_pass();
    Ok(HypothesisVerdict { osc, locally_bounded, applicable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{FamilyKind, MappingFamily};
    use crate::geometry::Polyhedron;

    fn quick() -> RadiusSchedule {
        RadiusSchedule::default().with_samples(32)
    }

    fn family(kind: FamilyKind) -> MappingFamily {
        MappingFamily::new("t", kind).unwrap()
    }

    #[test]
    fn jump_fails_osc_at_one() {
        let out =
            check_outer_semicontinuity(&family(FamilyKind::CounterexampleJump), &[0.0], &quick(), OSC_TOL).unwrap();
        let w = out.witness().expect("fail");
        assert_eq!(w.reason, FailureReason::ClusterOutsideNominal);
        assert_eq!(w.point, Some(alloc::vec![1.0]));
        assert!((w.value.value() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn escape_is_closed_but_unbounded() {
        let f = family(FamilyKind::CounterexampleEscape);
        assert!(check_outer_semicontinuity(&f, &[0.0], &quick(), OSC_TOL).unwrap().is_pass());
        let lb = check_local_boundedness(&f, &[0.0], &quick()).unwrap();
        let w = lb.witness().expect("fail");
        // the witness is the escaping branch 1/y
        let y = w.param[0];
        assert!((w.point.as_ref().unwrap()[0] - 1.0 / y).abs() < 1e-9);
    }

    #[test]
    fn sqrt_nominal_is_not_closed() {
        let v = hypothesis_report(&family(FamilyKind::CounterexampleSqrt), &[0.0], &quick()).unwrap();
        assert_eq!(v.violated_premises(), alloc::vec![Premise::ClosedNominal]);
        assert!(!v.applicable);
    }

    #[test]
    fn polyhedral_feasible_sets_pass() {
        let bx = Polyhedron::from_box(&[-2.0, -2.0], &[2.0, 2.0]);
        let f = family(FamilyKind::LpFeasible { dim: 2, rows: 2, fixed: Some(bx) });
        let ybar = [1.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let v = hypothesis_report(&f, &ybar, &quick()).unwrap();
        assert!(v.applicable, "{v:?}");
    }

    #[test]
    fn fail_witness_reevaluates() {
        let f = family(FamilyKind::CounterexampleJump);
        let out = check_outer_semicontinuity(&f, &[0.0], &quick(), OSC_TOL).unwrap();
        let w = out.witness().unwrap();
        let image = f.evaluate(&w.param).unwrap();
        assert!(image.contains(w.point.as_ref().unwrap(), 1e-12).unwrap());
        let nominal = f.evaluate(&[0.0]).unwrap();
        let d = crate::geometry::distance_to_set(w.point.as_ref().unwrap(), &nominal, NormKind::Euclidean).unwrap();
        assert!(d.value() > OSC_TOL);
    }
}
