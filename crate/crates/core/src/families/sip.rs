use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{NormKind, Polyhedron};

/// A linear semi-infinite system `a(t)'x <= b(t)` for `t in [-1, 1]`,
/// discretized on a uniform grid.
///
/// Nominal coefficient functions are polynomials in `t` (ascending powers).
/// Perturbations live in the span of `{1, t, |t|}` for every coordinate of
/// `a` and `{1, t}` for `b`. The packed parameter is, per coordinate `j`,
/// `(a_j: 1, t, |t|)`, followed by `(b: 1, t)`; its length is `3n + 2` and
/// the nominal parameter is all zeros.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SipSpec {
    pub dim: usize,
    /// One polynomial per coordinate of `a`.
    pub nominal_a: Vec<Vec<f64>>,
    pub nominal_b: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(default = "default_grid"))]
    pub grid_points: usize,
}

#[cfg(feature = "serde")]
fn default_grid() -> usize {
    SipSpec::DEFAULT_GRID
}

fn poly(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * t + v)
}

impl SipSpec {
    pub const DEFAULT_GRID: usize = 201;

    pub fn new(nominal_a: Vec<Vec<f64>>, nominal_b: Vec<f64>) -> Self {
        SipSpec { dim: nominal_a.len(), nominal_a, nominal_b, grid_points: Self::DEFAULT_GRID }
    }

    pub fn validate(&self) -> Result<()> {
        Error::check_dim(self.dim, self.nominal_a.len())?;
        if self.grid_points < 2 {
            return Err(Error::InvalidArgument("sip grid needs at least two points".into()));
        }
        Ok(())
    }

    pub fn parameter_dim(&self) -> usize {
        3 * self.dim + 2
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_points;
        (0..n).map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64).collect()
    }

    /// Perturbation of `(a(t), b(t))` at one index `t`.
    fn delta_at(&self, param: &[f64], t: f64) -> (Vec<f64>, f64) {
        let da = (0..self.dim).map(|j| param[3 * j] + param[3 * j + 1] * t + param[3 * j + 2] * t.abs()).collect();
        let k = 3 * self.dim;
        (da, param[k] + param[k + 1] * t)
    }

    /// The discretized feasible set at a packed parameter.
    pub fn polyhedron(&self, param: &[f64]) -> Result<Polyhedron> {
        Error::check_dim(self.parameter_dim(), param.len())?;
        let mut a = Vec::with_capacity(self.grid_points);
        let mut b = Vec::with_capacity(self.grid_points);
        for t in self.grid() {
            let (da, db) = self.delta_at(param, t);
            a.push(self.nominal_a.iter().zip(&da).map(|(c, d)| poly(c, t) + d).collect());
            b.push(poly(&self.nominal_b, t) + db);
        }
        Polyhedron::new(self.dim, a, b)
    }

    /// Uniform distance between the coefficient functions over the grid:
    /// `max_t max(|da(t)|, |db(t)|)`, with `|da(t)|` in the given norm.
    pub fn distance(&self, y: &[f64], ybar: &[f64], norm: NormKind) -> f64 {
        let diff: Vec<f64> = y.iter().zip(ybar).map(|(u, v)| u - v).collect();
        self.grid()
            .into_iter()
            .map(|t| {
                let (da, db) = self.delta_at(&diff, t);
                norm.norm(&da).max(db.abs())
            })
            .fold(0.0, f64::max)
    }

    /// `(da, db) = (|t|, -1)` in every coordinate of `a`, followed by the
    /// sign mirrors `(±|t|, ±1)` and `(±t, ±1)`.
    pub fn probe_directions(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        let k = 3 * self.dim;
        for (slot, sa) in [(2usize, 1.0), (2, -1.0), (1, 1.0), (1, -1.0)] {
            for sb in [-1.0, 1.0] {
                let mut d = vec![0.0; k + 2];
                for j in 0..self.dim {
                    d[3 * j + slot] = sa;
                }
                d[k] = sb;
                out.push(d);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_interval() -> SipSpec {
        SipSpec::new(vec![vec![0.0, 1.0]], vec![1.0])
    }

    #[test]
    fn nominal_set_is_unit_interval() {
        let s = unit_interval();
        let p = s.polyhedron(&[0.0; 5]).unwrap();
        let iv = p.to_interval().unwrap().unwrap();
        assert!((iv.lo + 1.0).abs() < 1e-12 && (iv.hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expanding_probe() {
        // a = (1 - e) t, b = 1 + e gives |x| <= (1 + e) / (1 - e)
        let s = unit_interval();
        let e = 0.01;
        let p = s.polyhedron(&[0.0, -e, 0.0, e, 0.0]).unwrap();
        let iv = p.to_interval().unwrap().unwrap();
        assert!((iv.hi - (1.0 + e) / (1.0 - e)).abs() < 1e-12);
        assert!((s.distance(&[0.0, -e, 0.0, e, 0.0], &[0.0; 5], NormKind::Euclidean) - e).abs() < 1e-15);
    }

    #[test]
    fn shrinking_probe_is_first() {
        let d = &unit_interval().probe_directions()[0];
        assert_eq!(d, &vec![0.0, 0.0, 1.0, -1.0, 0.0]);
    }
}
