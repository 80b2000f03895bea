use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{Interval, IntervalUnion};

/// `|f(x) - alpha|` at or below this counts as a root.
pub const ZERO_TOL: f64 = 1e-12;

/// A local extremum of `f - alpha` closer than this to zero without a sign
/// change is a tangency.
pub const TANGENCY_TOL: f64 = 1e-9;

const BISECTION_WIDTH: f64 = 1e-12;

/// Scalar functions with closed-form derivatives.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "snake_case"))]
pub enum ScalarFunction {
    Sin,
    Cos,
    /// Coefficients in ascending powers.
    Polynomial {
        coefficients: Vec<f64>,
    },
}

impl ScalarFunction {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            ScalarFunction::Sin => libm::sin(x),
            ScalarFunction::Cos => libm::cos(x),
            ScalarFunction::Polynomial { coefficients } => coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            ScalarFunction::Sin => libm::cos(x),
            ScalarFunction::Cos => -libm::sin(x),
            ScalarFunction::Polynomial { coefficients } => {
                coefficients.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, c)| acc * x + k as f64 * c)
            }
        }
    }
}

fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut glo = g(lo);
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm < 0.0) == (glo < 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn sign(v: f64) -> i8 {
    if v.abs() <= ZERO_TOL {
        0
    } else if v < 0.0 {
        -1
    } else {
        1
    }
}

/// Points of `[lo, hi]` where `f = alpha`, sorted. Includes domain endpoints
/// where `f = alpha`.
///
/// Sign changes on a uniform grid of `grid_points` are refined by bisection.
/// Inside every cell where `f'` changes sign the critical point is located
/// too, so narrow dips between grid nodes are found; a dip that touches
/// `alpha` without crossing it is a tangency and fails with
/// [`Error::DegenerateLevelSet`].
pub fn level_crossings(f: &ScalarFunction, alpha: f64, domain: (f64, f64), grid_points: usize) -> Result<Vec<f64>> {
    let (lo, hi) = domain;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument("domain must be a finite interval lo < hi".into()));
    }
    if grid_points < 2 {
        return Err(Error::InvalidArgument("grid needs at least two points".into()));
    }
    let g = |x: f64| f.value(x) - alpha;
    let n = grid_points;
    let xs: Vec<f64> =
        (0..n).map(|k| if k == n - 1 { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect();
    let gs: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let ss: Vec<i8> = gs.iter().map(|&v| sign(v)).collect();

    let mut roots = Vec::new();
    for k in 0..n {
        if ss[k] != 0 {
            continue;
        }
        let left = if k > 0 { ss[k - 1] } else { 0 };
        let right = if k + 1 < n { ss[k + 1] } else { 0 };
        if (k > 0 && left == 0) || (k + 1 < n && right == 0) {
            return Err(Error::DegenerateLevelSet { at: xs[k] });
        }
        if k > 0 && k + 1 < n && left == right {
            return Err(Error::DegenerateLevelSet { at: xs[k] });
        }
        roots.push(xs[k]);
    }
    for k in 0..n - 1 {
        let (a, b) = (xs[k], xs[k + 1]);
        if ss[k] != 0 && ss[k + 1] != 0 && ss[k] != ss[k + 1] {
            roots.push(bisect(g, a, b));
            continue;
        }
        // a critical point strictly inside the cell may hide two crossings
        let (da, db) = (f.derivative(a), f.derivative(b));
        if ss[k] == 0 || ss[k + 1] == 0 || (da < 0.0) == (db < 0.0) || da == 0.0 || db == 0.0 {
            continue;
        }
        let c = bisect(|x| f.derivative(x), a, b);
        let gc = g(c);
        if sign(gc) == ss[k] {
            if gc.abs() < TANGENCY_TOL {
                return Err(Error::DegenerateLevelSet { at: c });
            }
            continue;
        }
        if sign(gc) == 0 {
            return Err(Error::DegenerateLevelSet { at: c });
        }
        roots.push(bisect(g, a, c));
        roots.push(bisect(g, c, b));
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= BISECTION_WIDTH);
    Ok(roots)
}

/// `{x in [lo, hi] : f(x) <= alpha}` assembled from the level crossings.
pub fn sublevel_set(f: &ScalarFunction, alpha: f64, domain: (f64, f64), grid_points: usize) -> Result<IntervalUnion> {
    let roots = level_crossings(f, alpha, domain, grid_points)?;
    let mut breaks = vec![domain.0];
    breaks.extend(roots.iter().copied().filter(|&r| r > domain.0 && r < domain.1));
    breaks.push(domain.1);
    let mut pieces: Vec<Interval> = roots.iter().map(|&r| Interval::point(r)).collect();
    for w in breaks.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if f.value(mid) <= alpha {
            pieces.push(Interval::closed(w[0], w[1]));
        }
    }
    IntervalUnion::new(pieces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn polynomial_evaluation() {
        let p = ScalarFunction::Polynomial { coefficients: vec![1.0, -2.0, 3.0] };
        assert_eq!(p.value(2.0), 9.0);
        assert_eq!(p.derivative(2.0), 10.0);
    }

    #[test]
    fn sine_level_set() {
        let u = sublevel_set(&ScalarFunction::Sin, 0.0, (-2.0 * PI, 2.0 * PI), 4001).unwrap();
        let ivs = u.intervals();
        assert_eq!(ivs.len(), 3);
        assert!((ivs[0].lo + 2.0 * PI).abs() < 1e-12 && ivs[0].lo == ivs[0].hi);
        assert!((ivs[1].lo + PI).abs() < 1e-9 && ivs[1].hi.abs() < 1e-9);
        assert!((ivs[2].lo - PI).abs() < 1e-9 && (ivs[2].hi - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn tangency_is_an_error() {
        let f = ScalarFunction::Polynomial { coefficients: vec![0.0, 0.0, 1.0] };
        assert!(matches!(sublevel_set(&f, 0.0, (-1.0, 1.0), 100), Err(Error::DegenerateLevelSet { .. })));
    }

    #[test]
    fn dip_between_grid_nodes_is_found() {
        // (x - 0.05)^2 - 1e-4 has roots 0.04 and 0.06, both inside one cell
        let f = ScalarFunction::Polynomial { coefficients: vec![0.0025 - 1e-4, -0.1, 1.0] };
        let r = level_crossings(&f, 0.0, (-1.0, 1.0), 11).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0] - 0.04).abs() < 1e-10 && (r[1] - 0.06).abs() < 1e-10);
    }
}
