//! Closed-form moduli for two structured classes.
//!
//! * Convex QPs under canonical perturbations `(c, b)`: the modulus is
//!   `max_{D} |(I_n 0) M_D^{-1}|` over active subsets `D` with linearly
//!   independent rows and `-(Q xbar + c) in cone{a_t : t in D}`, where
//!   `M_D = [[Q, A_D'], [A_D, 0]]`.
//! * One-dimensional sub-level sets `{f <= alpha}`: the modulus is the
//!   largest `1 / |f'(x)|` over the points where `f = alpha`.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::families::{level_crossings, sublevel_set, ScalarFunction};
use crate::geometry::{enumerate_vertices, Polyhedron, SetRepr, MAX_VERTEX_DIM};
use crate::linalg::{
    condition_number, dot, for_each_combination, matrix_from_rows, nnls, rank, singular_values, MAX_CONDITION,
};
use crate::qp::{solve_qp, QpOutcome};

/// Largest active set whose subsets are enumerated.
pub const MAX_ACTIVE: usize = 20;

/// Relative activity tolerance: `|a_t'x - b_t| <= ACTIVE_TOL (1 + |b_t|)`.
pub const ACTIVE_TOL: f64 = 1e-7;

/// Relative residual accepted by [`cone_membership`].
pub const CONE_TOL: f64 = 1e-9;

/// Optimal faces with a larger diameter are not singletons.
pub const UNIQUENESS_TOL: f64 = 1e-7;

/// `|f'|` below this is a vanishing gradient.
pub const GRADIENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum OperatorNorm {
    /// Euclidean to Euclidean: largest singular value.
    #[default]
    Spectral,
    /// Max norm to max norm: largest absolute row sum.
    InfInduced,
}

/// Active constraints at the nominal optimum.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ActiveSet {
    pub indices: Vec<usize>,
    pub x: Vec<f64>,
}

/// One admissible active subset `D` and its partial-inverse norm.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KktCertificate {
    /// Constraint indices, ascending.
    pub d: Vec<usize>,
    pub a_d: Vec<Vec<f64>>,
    /// `[[Q, A_D'], [A_D, 0]]`, row by row.
    pub m_d: Vec<Vec<f64>>,
    /// `lambda >= 0` with `A_D' lambda = -(Q xbar + c)`.
    pub multipliers: Vec<f64>,
    pub partial_inverse_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QpModulus {
    pub value: f64,
    pub norm: OperatorNorm,
    pub active_set: ActiveSet,
    /// In enumeration order: increasing `|D|`, then lexicographic.
    pub certificates: Vec<KktCertificate>,
    /// Positions in `certificates` attaining `value`.
    pub attaining: Vec<usize>,
}

/// Nonnegative multipliers `lambda` with `sum lambda_t g_t = v`, if any.
///
/// Solved by nonnegative least squares; the combination holds when the
/// residual is at most [`CONE_TOL`]` * (1 + |v|)`. With no generators only
/// `v = 0` is in the cone.
pub fn cone_membership(v: &[f64], generators: &[Vec<f64>]) -> Result<Option<Vec<f64>>> {
    let n = v.len();
    for g in generators {
        Error::check_dim(n, g.len())?;
    }
    let scale = 1.0 + libm::sqrt(dot(v, v));
    if generators.is_empty() {
        return Ok(if libm::sqrt(dot(v, v)) <= CONE_TOL * scale { Some(Vec::new()) } else { None });
    }
    let a = DMatrix::from_fn(n, generators.len(), |i, j| generators[j][i]);
    let b = DVector::from_column_slice(v);
    let lambda = nnls(&a, &b);
    let residual = (&a * &lambda - &b).norm();
    Ok((residual <= CONE_TOL * scale).then(|| lambda.iter().copied().collect()))
}

/// Induced norm of the top `n` rows of `M_D^{-1}`.
pub fn operator_partial_inverse_norm(m_d: &DMatrix<f64>, n: usize, norm: OperatorNorm) -> Result<f64> {
    Error::check_dim(m_d.nrows(), m_d.ncols())?;
    if n > m_d.nrows() {
        return Err(Error::InvalidArgument("n exceeds the block size".into()));
    }
    let condition = condition_number(m_d);
    if condition > MAX_CONDITION {
        return Err(Error::SingularMatrix { condition });
    }
    let inv = m_d.clone().try_inverse().ok_or(Error::SingularMatrix { condition })?;
    let top = inv.rows(0, n).into_owned();
    Ok(match norm {
        OperatorNorm::Spectral => singular_values(&top).first().copied().unwrap_or(0.0),
        OperatorNorm::InfInduced => (0..n).map(|i| top.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max),
    })
}

fn kkt_block(q: &DMatrix<f64>, a_d: &[Vec<f64>]) -> DMatrix<f64> {
    let n = q.nrows();
    let k = a_d.len();
    DMatrix::from_fn(n + k, n + k, |i, j| match (i < n, j < n) {
        (true, true) => q[(i, j)],
        (true, false) => a_d[j - n][i],
        (false, true) => a_d[i - n][j],
        (false, false) => 0.0,
    })
}

/// Certificates for every admissible `D` drawn from `pool`.
pub(crate) fn certificates_over(
    q: &DMatrix<f64>,
    a: &[Vec<f64>],
    gradient: &[f64],
    pool: &[usize],
    norm: OperatorNorm,
) -> Vec<KktCertificate> {
    let n = q.nrows();
    let v: Vec<f64> = gradient.iter().map(|g| -g).collect();
    let mut out = Vec::new();
    for k in 0..=pool.len().min(n) {
        for_each_combination(pool.len(), k, |idx| {
            let d: Vec<usize> = idx.iter().map(|&i| pool[i]).collect();
            let a_d: Vec<Vec<f64>> = d.iter().map(|&t| a[t].clone()).collect();
            if k > 0 && rank(&matrix_from_rows(&a_d, n)) < k {
                return;
            }
            let Ok(Some(multipliers)) = cone_membership(&v, &a_d) else { return };
            let m = kkt_block(q, &a_d);
            let Ok(value) = operator_partial_inverse_norm(&m, n, norm) else { return };
            out.push(KktCertificate {
                d,
                a_d,
                m_d: (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect(),
                multipliers,
                partial_inverse_norm: value,
            });
        });
    }
    out
}

/// Calmness (and Lipschitz upper semicontinuity) modulus of the optimal set
/// of `min 1/2 x'Qx + c'x  s.t.  A x <= b` under perturbations of `(c, b)`.
///
/// Requires `Q` symmetric positive semidefinite and a unique nominal
/// optimum; both are checked.
pub fn qp_canonical_modulus(
    q: &[Vec<f64>],
    a: &[Vec<f64>],
    c: &[f64],
    b: &[f64],
    norm: OperatorNorm,
) -> Result<QpModulus> {
    let n = c.len();
    Error::check_dim(n, q.len())?;
    for row in q {
        Error::check_dim(n, row.len())?;
    }
    Error::check_dim(a.len(), b.len())?;
    for row in a {
        Error::check_dim(n, row.len())?;
    }
    let qm = matrix_from_rows(q, n);
    let scale = 1.0 + qm.amax();
    if (&qm - qm.transpose()).amax() > 1e-12 * scale {
        return Err(Error::Precondition("Q must be symmetric".into()));
    }
    let min_eig = if n == 0 { 0.0 } else { qm.clone().symmetric_eigenvalues().min() };
    if min_eig < -1e-10 * scale {
        return Err(Error::Precondition("Q must be positive semidefinite".into()));
    }

    let x = match solve_qp(&qm, c, a, b)? {
        QpOutcome::Optimal { x, .. } => x,
        QpOutcome::Infeasible => return Err(Error::Precondition("nominal QP is infeasible".into())),
        QpOutcome::Unbounded => return Err(Error::Precondition("nominal QP is unbounded".into())),
    };
    if qm.clone().cholesky().is_none() {
        check_unique(&qm, a, b, c, &x)?;
    }

    let indices: Vec<usize> =
        (0..a.len()).filter(|&t| (dot(&a[t], &x) - b[t]).abs() <= ACTIVE_TOL * (1.0 + b[t].abs())).collect();
    if indices.len() > MAX_ACTIVE {
        return Err(Error::EnumerationBudget { size: indices.len(), max: MAX_ACTIVE });
    }
    let gradient: Vec<f64> =
        (&qm * DVector::from_column_slice(&x) + DVector::from_column_slice(c)).iter().copied().collect();
    let certificates = certificates_over(&qm, a, &gradient, &indices, norm);
    if certificates.is_empty() {
        return Err(Error::NoAdmissibleActiveSet);
    }
    let value = certificates.iter().map(|c| c.partial_inverse_norm).fold(0.0, f64::max);
    let attaining = certificates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.partial_inverse_norm >= value - 1e-12 * (1.0 + value))
        .map(|(i, _)| i)
        .collect();
    Ok(QpModulus { value, norm, active_set: ActiveSet { indices, x }, certificates, attaining })
}

/// The optimal face `{A x <= b, Q x = Q xbar, c'x <= c'xbar}` must be a point.
fn check_unique(q: &DMatrix<f64>, a: &[Vec<f64>], b: &[f64], c: &[f64], x: &[f64]) -> Result<()> {
    let n = x.len();
    let mut face = Polyhedron::new(n, a.to_vec(), b.to_vec())?;
    for i in 0..n {
        let row: Vec<f64> = (0..n).map(|j| q[(i, j)]).collect();
        let rhs = dot(&row, x);
        face.push_equality(row, rhs);
    }
    let cx = dot(c, x);
    face.push_row(c.to_vec(), cx + 1e-12 * (1.0 + cx.abs()));
    let nonunique = || Error::Precondition("nominal QP optimum is not unique".into());
    if !face.is_bounded()? {
        return Err(nonunique());
    }
    let diameter = if n <= MAX_VERTEX_DIM {
        let v = enumerate_vertices(&face)?;
        let pts = v.points();
        let mut d = 0.0f64;
        for i in 0..pts.len() {
            for j in 0..i {
                d = d.max(crate::geometry::NormKind::Euclidean.dist(&pts[i], &pts[j]));
            }
        }
        d
    } else {
        let (lo, hi) = SetRepr::Polyhedron(face).bounding_box()?.ok_or_else(nonunique)?;
        crate::geometry::NormKind::Euclidean.dist(&lo, &hi)
    };
    if diameter >= UNIQUENESS_TOL {
        return Err(nonunique());
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SublevelModulus {
    pub value: ExtendedReal,
    /// Points of the domain where `f = alpha`, ascending.
    pub boundary_points: Vec<f64>,
    /// Some boundary point has `|f'| <` [`GRADIENT_TOL`]; `value` is `+inf`.
    pub vanishing_gradient: bool,
}

/// `max 1 / |f'(x)|` over the points of `[lo, hi]` where `f(x) = alpha`.
///
/// Domain endpoints with `f < alpha` are not boundary points of the
/// constraint and are ignored; endpoints with `f = alpha` count.
pub fn sublevel_modulus(
    f: &ScalarFunction,
    alpha: f64,
    domain: (f64, f64),
    grid_points: usize,
) -> Result<SublevelModulus> {
    if sublevel_set(f, alpha, domain, grid_points)?.is_empty() {
        return Err(Error::EmptyNominal);
    }
    let boundary_points = level_crossings(f, alpha, domain, grid_points)?;
    let mut value = ExtendedReal::ZERO;
    let mut vanishing_gradient = false;
    for &x in &boundary_points {
        let g = f.derivative(x).abs();
        if g < GRADIENT_TOL {
            vanishing_gradient = true;
            value = ExtendedReal::INFINITY;
        } else {
            value = value.max(ExtendedReal::new(1.0 / g));
        }
    }
    Ok(SublevelModulus { value, boundary_points, vanishing_gradient })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    #[test]
    fn scalar_qp_fixture() {
        let m = qp_canonical_modulus(&[vec![1.0]], &[vec![1.0]], &[-2.0], &[1.0], OperatorNorm::Spectral).unwrap();
        assert!((m.value - 1.0).abs() < 1e-9);
        assert_eq!(m.certificates.len(), 1);
        assert_eq!(m.certificates[0].d, vec![0]);
        assert_eq!(m.certificates[0].m_d, vec![vec![1.0, 1.0], vec![1.0, 0.0]]);
        assert!((m.certificates[0].multipliers[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unconstrained_qp_fixture() {
        let q = vec![vec![2.0, 0.0], vec![0.0, 2.0]];
        let m = qp_canonical_modulus(&q, &[], &[0.3, -1.0], &[], OperatorNorm::Spectral).unwrap();
        assert!((m.value - 0.5).abs() < 1e-9);
        assert!(m.certificates[0].d.is_empty());
    }

    #[test]
    fn nonunique_optimum_is_refused() {
        // Q = 0, c = 0 on [0, 1]
        let r =
            qp_canonical_modulus(&[vec![0.0]], &[vec![1.0], vec![-1.0]], &[0.0], &[1.0, 0.0], OperatorNorm::Spectral);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn indefinite_q_is_refused() {
        let r = qp_canonical_modulus(&[vec![-1.0]], &[], &[0.0], &[], OperatorNorm::Spectral);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn cone_examples() {
        assert_eq!(cone_membership(&[0.0], &[]).unwrap(), Some(vec![]));
        assert_eq!(cone_membership(&[1.0], &[vec![1.0]]).unwrap(), Some(vec![1.0]));
        assert_eq!(cone_membership(&[-1.0, 0.0], &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(), None);
    }

    #[test]
    fn partial_inverse_by_hand() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]);
        assert!((operator_partial_inverse_norm(&m, 1, OperatorNorm::InfInduced).unwrap() - 1.0).abs() < 1e-12);
        let m = DMatrix::identity(2, 2) * 2.0;
        assert!((operator_partial_inverse_norm(&m, 2, OperatorNorm::Spectral).unwrap() - 0.5).abs() < 1e-12);
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            operator_partial_inverse_norm(&s, 1, OperatorNorm::Spectral),
            Err(Error::SingularMatrix { .. })
        ));
    }

    /// Gauss-Jordan inverse with partial pivoting.
    fn gj_inverse(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = m.len();
        let mut a: Vec<Vec<f64>> = m
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row = r.clone();
                row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
                row
            })
            .collect();
        for col in 0..n {
            let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
            a.swap(col, p);
            let d = a[col][col];
            for v in a[col].iter_mut() {
                *v /= d;
            }
            for i in 0..n {
                if i != col {
                    let f = a[i][col];
                    let pivot = a[col].clone();
                    for (v, pv) in a[i].iter_mut().zip(pivot) {
                        *v -= f * pv;
                    }
                }
            }
        }
        a.into_iter().map(|r| r[n..].to_vec()).collect()
    }

    /// Largest singular value by power iteration on `B'B`.
    fn power_norm(b: &[Vec<f64>]) -> f64 {
        let cols = b[0].len();
        let mut v = vec![1.0; cols];
        let mut lambda = 0.0;
        for _ in 0..5000 {
            let bv: Vec<f64> = b.iter().map(|r| dot(r, &v)).collect();
            let w: Vec<f64> = (0..cols).map(|j| b.iter().zip(&bv).map(|(r, x)| r[j] * x).sum()).collect();
            let nw = libm::sqrt(dot(&w, &w));
            let next: Vec<f64> = w.iter().map(|x| x / nw).collect();
            let done = (nw - lambda).abs() <= 1e-15 * nw;
            lambda = nw;
            v = next;
            if done {
                break;
            }
        }
        libm::sqrt(lambda)
    }

    #[test]
    fn sine_sublevel() {
        let m = sublevel_modulus(&ScalarFunction::Sin, 0.0, (-2.0 * PI, 2.0 * PI), 4001).unwrap();
        assert!((m.value.value() - 1.0).abs() < 1e-9);
        let expect = [-2.0 * PI, -PI, 0.0, PI, 2.0 * PI];
        assert_eq!(m.boundary_points.len(), 5);
        for (a, b) in m.boundary_points.iter().zip(expect) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn polynomial_sublevels() {
        let lin = ScalarFunction::Polynomial { coefficients: vec![0.0, 1.0] };
        assert!((sublevel_modulus(&lin, 0.0, (-1.0, 1.0), 101).unwrap().value.value() - 1.0).abs() < 1e-12);
        let sq = ScalarFunction::Polynomial { coefficients: vec![0.0, 0.0, 1.0] };
        assert!((sublevel_modulus(&sq, 1.0, (-2.0, 2.0), 401).unwrap().value.value() - 0.5).abs() < 1e-9);
        let cube = ScalarFunction::Polynomial { coefficients: vec![0.0, 0.0, 0.0, 1.0] };
        let m = sublevel_modulus(&cube, 0.0, (-1.0, 1.0), 101).unwrap();
        assert!(m.vanishing_gradient && m.value.is_infinite());
    }

    fn random_block() -> impl Strategy<Value = (Vec<Vec<f64>>, usize)> {
        (proptest::collection::vec(-1.0f64..1.0, 16), 1usize..=3).prop_map(|(v, n)| {
            let m = (0..4).map(|i| (0..4).map(|j| v[4 * i + j] + if i == j { 3.0 } else { 0.0 }).collect()).collect();
            (m, n)
        })
    }

    fn random_qp() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
        (
            proptest::collection::vec(-1.0f64..1.0, 4),
            proptest::collection::vec(-1.0f64..1.0, 8),
            proptest::collection::vec(-1.0f64..1.0, 2),
            proptest::collection::vec(0.0f64..1.0, 4),
        )
            .prop_map(|(l, a, c, b)| {
                // Q = L L' + I/2
                let q = (0..2)
                    .map(|i| {
                        (0..2)
                            .map(|j| l[2 * i] * l[2 * j] + l[2 * i + 1] * l[2 * j + 1] + if i == j { 0.5 } else { 0.0 })
                            .collect()
                    })
                    .collect();
                let a = (0..4).map(|i| vec![a[2 * i], a[2 * i + 1]]).collect();
                (q, a, c, b)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn spectral_matches_power_iteration((m, n) in random_block()) {
            let dm = matrix_from_rows(&m, 4);
            let got = operator_partial_inverse_norm(&dm, n, OperatorNorm::Spectral).unwrap();
            let inv = gj_inverse(&m);
            let oracle = power_norm(&inv[..n]);
            prop_assert!((got - oracle).abs() <= 1e-8 * (1.0 + oracle));
            let inf = operator_partial_inverse_norm(&dm, n, OperatorNorm::InfInduced).unwrap();
            prop_assert!(got <= libm::sqrt(n as f64) * inf + 1e-12);
        }

        #[test]
        fn certificates_recheck((q, a, c, b) in random_qp()) {
            let Ok(m) = qp_canonical_modulus(&q, &a, &c, &b, OperatorNorm::Spectral) else { return Ok(()) };
            let x = &m.active_set.x;
            for t in &m.active_set.indices {
                prop_assert!((dot(&a[*t], x) - b[*t]).abs() <= ACTIVE_TOL * (1.0 + b[*t].abs()));
            }
            for cert in &m.certificates {
                let k = cert.d.len();
                prop_assert_eq!(rank(&matrix_from_rows(&cert.a_d, 2)), k);
                prop_assert!(cert.multipliers.iter().all(|&l| l >= -1e-12));
                let g: Vec<f64> = (0..2).map(|i| dot(&q[i], x) + c[i]).collect();
                let res: f64 = (0..2)
                    .map(|i| {
                        let s: f64 = cert.a_d.iter().zip(&cert.multipliers).map(|(r, l)| r[i] * l).sum();
                        (s + g[i]).powi(2)
                    })
                    .sum();
                prop_assert!(libm::sqrt(res) <= 1e-8 * (1.0 + libm::sqrt(dot(&g, &g))));
                let mm = matrix_from_rows(&cert.m_d, 2 + k);
                prop_assert!(condition_number(&mm) < MAX_CONDITION);
                prop_assert!(cert.partial_inverse_norm <= m.value + 1e-12);
            }
            // restricting the pool of active indices never increases the value
            let qm = matrix_from_rows(&q, 2);
            let g: Vec<f64> = (0..2).map(|i| dot(&q[i], x) + c[i]).collect();
            let pool = &m.active_set.indices;
            if !pool.is_empty() {
                let sub = certificates_over(&qm, &a, &g, &pool[1..], OperatorNorm::Spectral);
                let v = sub.iter().map(|c| c.partial_inverse_norm).fold(0.0, f64::max);
                prop_assert!(v <= m.value + 1e-12);
            }
        }
    }
}
