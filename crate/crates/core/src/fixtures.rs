//! Built-in worked examples with their nominal parameters.
//!
//! Each fixture registers the perturbation direction along which its known
//! modulus is attained, so the sampling estimators hit it exactly.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::families::{FamilyKind, MappingFamily, ScalarFunction, SipSpec, DEFAULT_SUBLEVEL_GRID};
use crate::geometry::Polyhedron;

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub id: &'static str,
    pub family: MappingFamily,
    pub nominal: Vec<f64>,
}

pub const IDS: [&str; 7] =
    ["lp_optimal", "lcp", "sip", "sublevel", "counterexample_sqrt", "counterexample_jump", "counterexample_escape"];

fn fixture(id: &'static str, kind: FamilyKind, nominal: Vec<f64>, probes: Vec<Vec<f64>>) -> Fixture {
    let mut family = MappingFamily::new(id, kind).expect("fixture is well formed");
    family.probes = probes;
    Fixture { id, family, nominal }
}

/// `min -x  s.t.  a x <= b, -x <= 0` at `(a, b, c) = (1, 1, -1)`; the optimal
/// set is `{b / a}`. Probe `(a, b) -> (1 - e, 1 + e)`.
pub fn lp_optimal() -> Fixture {
    let fixed = Polyhedron::new(1, vec![vec![-1.0]], vec![0.0]).expect("valid");
    fixture(
        "lp_optimal",
        FamilyKind::LpOptimalFull { dim: 1, rows: 1, fixed: Some(fixed) },
        vec![1.0, 1.0, -1.0],
        vec![vec![-1.0, 1.0, 0.0]],
    )
}

/// `LCP(-1, 1)` with solutions `{0, 1}`. Probe `(M, q) -> (-1 + e, 1 + e)`.
pub fn lcp() -> Fixture {
    fixture("lcp", FamilyKind::Lcp { dim: 1 }, vec![-1.0, 1.0], vec![vec![1.0, 1.0]])
}

/// `t x <= 1` for `t in [-1, 1]`, feasible set `[-1, 1]`.
pub fn sip() -> Fixture {
    let spec = SipSpec::new(vec![vec![0.0, 1.0]], vec![1.0]);
    let dim = spec.parameter_dim();
    fixture("sip", FamilyKind::SipGrid(spec), vec![0.0; dim], Vec::new())
}

/// `{x in [-2 pi, 2 pi] : sin x <= alpha}` at `alpha = 0`.
pub fn sublevel() -> Fixture {
    fixture(
        "sublevel",
        FamilyKind::Sublevel1d {
            function: ScalarFunction::Sin,
            domain: [-2.0 * PI, 2.0 * PI],
            grid_points: DEFAULT_SUBLEVEL_GRID,
        },
        vec![0.0],
        vec![vec![1.0]],
    )
}

pub fn counterexample_sqrt() -> Fixture {
    fixture("counterexample_sqrt", FamilyKind::CounterexampleSqrt, vec![0.0], vec![vec![1.0]])
}

pub fn counterexample_jump() -> Fixture {
    fixture("counterexample_jump", FamilyKind::CounterexampleJump, vec![0.0], Vec::new())
}

pub fn counterexample_escape() -> Fixture {
    fixture("counterexample_escape", FamilyKind::CounterexampleEscape, vec![0.0], Vec::new())
}

pub fn by_id(id: &str) -> Option<Fixture> {
    Some(match id {
        "lp_optimal" => lp_optimal(),
        "lcp" => lcp(),
        "sip" => sip(),
        "sublevel" => sublevel(),
        "counterexample_sqrt" => counterexample_sqrt(),
        "counterexample_jump" => counterexample_jump(),
        "counterexample_escape" => counterexample_escape(),
        _ => return None,
    })
}

pub fn all() -> Vec<Fixture> {
    IDS.iter().map(|id| by_id(id).expect("listed")).collect()
}
