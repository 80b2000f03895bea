//! Calmness and Lipschitz upper semicontinuity moduli of parametric
//! set-valued mappings.
//!
//! The crate has two routes to a modulus:
//!
//! * sampling estimators ([`estimation`]) that discretize the limsup
//!   definitions on a shrinking radius schedule, and
//! * closed-form calculators ([`exact`]) for canonically perturbed convex
//!   QPs and one-dimensional sub-level sets.
//!
//! [`topology`] checks the two premises (outer semicontinuity and local
//! boundedness) under which the semilocal modulus equals the supremum of the
//! local calmness moduli over the nominal set, and
//! [`estimation::verify_equality`] puts all three together.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line
//! front end and CSV traces live in the companion `lipcalm-cli` crate.

#![no_std]

extern crate alloc;

pub mod error;
pub mod estimation;
pub mod exact;
pub mod extended;
pub mod families;
pub mod fixtures;
pub mod geometry;
pub mod linalg;
pub mod lp;
pub mod qp;
pub mod rng;
pub mod topology;

pub use error::{Error, Result};
pub use estimation::{
    estimate_calmness, estimate_lipusc, nominal_probe_points, sup_calmness_over_nominal, verify_equality,
    Classification, EqualityReport, EqualityVerdict, ModulusEstimate, PointCalmness, RadiusLevel, RadiusSchedule,
    SupCalmness,
};
pub use exact::{
    cone_membership, operator_partial_inverse_norm, qp_canonical_modulus, sublevel_modulus, ActiveSet, KktCertificate,
    OperatorNorm, QpModulus, SublevelModulus,
};
pub use extended::ExtendedReal;
pub use families::{
    sample_parameters, solve_lcp_enumerate, FamilyKind, MappingFamily, ScalarFunction, SetValuedMapping, SipSpec,
};
pub use geometry::{
    distance_to_set, enumerate_vertices, project_onto_polyhedron, sup_distance_over_set, FinitePointSet, Interval,
    IntervalUnion, NormKind, NormSpec, Polyhedron, SetRepr, SupDistance, SupExactness,
};
pub use topology::{
    check_local_boundedness, check_outer_semicontinuity, hypothesis_report, CheckOutcome, FailureReason,
    HypothesisVerdict, Premise, Witness,
};

/// Constraint satisfaction tolerance shared by every feasibility test.
pub const FEAS_TOL: f64 = 1e-9;

/// Two points closer than this (Chebyshev distance) are the same point.
pub const DEDUP_TOL: f64 = 1e-7;

/// Numerators below this are zero, which realizes the `0/0 := 0` convention.
pub const DIST_TOL: f64 = 1e-10;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
