//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p lipcalm --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lipcalm::families::{FamilyKind, MappingFamily};
use lipcalm::fixtures;
use lipcalm::geometry::{NormKind, NormSpec};
use lipcalm::linalg::{dot, matrix_from_rows, rank};
use lipcalm::rng;
use lipcalm::*;

struct Report {
    failures: usize,
}

impl Report {
    fn criterion(
        &mut self,
        id: u32,
        title: &str,
        limit: Option<Duration>,
        body: impl FnOnce(&mut Vec<String>) -> bool,
    ) {
        let start = Instant::now();
        let mut notes = Vec::new();
        let ok = body(&mut notes);
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let pass = ok && in_time;
        if !pass {
            self.failures += 1;
        }
        let budget = limit.map_or(String::new(), |l| format!(" / limit {:.0}s", l.as_secs_f64()));
        println!(
            "criterion {id}: {} {title} ({:.2}s{budget}){}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time { "" } else { " [over time]" }
        );
        for n in notes {
            println!("    {n}");
        }
    }
}

fn rel_close(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol * want.abs()
}

fn check(notes: &mut Vec<String>, ok: bool, what: String) -> bool {
    notes.push(format!("{} {what}", if ok { "ok  " } else { "BAD " }));
    ok
}

fn value(e: &ModulusEstimate) -> f64 {
    e.value.value()
}

fn lp_fixture(notes: &mut Vec<String>) -> bool {
    let f = fixtures::lp_optimal();
    let s = RadiusSchedule::default();
    let clm = estimate_calmness(&f.family, &f.nominal, &[1.0], &s).unwrap();
    let lip = estimate_lipusc(&f.family, &f.nominal, &s).unwrap();
    let a = check(notes, rel_close(value(&clm), 2.0, 0.03), format!("clm at x = 1: {} (want 2, 3%)", clm.value));
    let b = check(notes, rel_close(value(&lip), 2.0, 0.03), format!("lipusc: {} (want 2, 3%)", lip.value));
    a && b
}

fn lcp_fixture(notes: &mut Vec<String>) -> bool {
    let f = fixtures::lcp();
    let s = RadiusSchedule::default();
    let sol = solve_lcp_enumerate(&[vec![-1.0]], &[1.0]).unwrap();
    let exact = sol == SetRepr::points(1, vec![vec![0.0], vec![1.0]]).unwrap();
    let a = check(notes, exact, format!("LCP(-1, 1) solutions: {sol:?}"));
    let c0 = estimate_calmness(&f.family, &f.nominal, &[0.0], &s).unwrap();
    let c1 = estimate_calmness(&f.family, &f.nominal, &[1.0], &s).unwrap();
    let lip = estimate_lipusc(&f.family, &f.nominal, &s).unwrap();
    let b = check(notes, value(&c0) <= 1e-6, format!("clm at 0: {} (want 0, abs 1e-6)", c0.value));
    let c = check(notes, rel_close(value(&c1), 2.0, 0.03), format!("clm at 1: {} (want 2, 3%)", c1.value));
    let d = check(notes, rel_close(value(&lip), 2.0, 0.03), format!("lipusc: {} (want 2, 3%)", lip.value));
    a && b && c && d
}

fn sip_fixture(notes: &mut Vec<String>) -> bool {
    let f = fixtures::sip();
    let FamilyKind::SipGrid(spec) = &f.family.kind else { unreachable!() };
    let mut ok = check(notes, spec.grid_points == 201, format!("grid points: {}", spec.grid_points));
    let shrinking_probe = vec![0.0, 0.0, 1.0, -1.0, 0.0];
    ok &= check(
        notes,
        f.family.probe_directions().contains(&shrinking_probe),
        "probe (da, db) = (e|t|, -e) registered".into(),
    );
    let s = RadiusSchedule::default();
    let points = vec![vec![-1.0], vec![-0.5], vec![0.0], vec![0.5], vec![1.0]];
    let sup = sup_calmness_over_nominal(&f.family, &f.nominal, &points, &s).unwrap();
    for p in &sup.points {
        let x = p.point[0];
        let v = value(&p.estimate);
        ok &= if x.abs() == 1.0 {
            check(notes, rel_close(v, 2.0, 0.03), format!("clm at {x}: {v} (want 2, 3%)"))
        } else {
            check(notes, v <= 1e-6, format!("clm at interior {x}: {v} (want 0)"))
        };
    }
    let lip = estimate_lipusc(&f.family, &f.nominal, &s).unwrap();
    ok &= check(notes, rel_close(value(&lip), 2.0, 0.03), format!("lipusc: {} (want 2, 3%)", lip.value));
    ok
}

fn sublevel_fixture(notes: &mut Vec<String>) -> bool {
    let m = sublevel_modulus(&ScalarFunction::Sin, 0.0, (-2.0 * PI, 2.0 * PI), 4001).unwrap();
    let want = [-2.0 * PI, -PI, 0.0, PI, 2.0 * PI];
    let mut ok = check(notes, (m.value.value() - 1.0).abs() <= 1e-9, format!("exact modulus: {}", m.value));
    let same =
        m.boundary_points.len() == want.len() && m.boundary_points.iter().zip(want).all(|(a, b)| (a - b).abs() <= 1e-9);
    ok &= check(notes, same, format!("boundary points: {:?}", m.boundary_points));
    for &x in &m.boundary_points {
        ok &= (1.0 / x.cos().abs() - 1.0).abs() <= 1e-9;
    }
    let f = fixtures::sublevel();
    let lip = estimate_lipusc(&f.family, &f.nominal, &RadiusSchedule::default()).unwrap();
    ok &= check(notes, rel_close(value(&lip), 1.0, 0.05), format!("sampling estimate: {} (want 1, 5%)", lip.value));
    ok
}

fn counterexamples(notes: &mut Vec<String>) -> bool {
    let s = RadiusSchedule::default();
    let mut ok = true;
    for (f, premise) in [
        (fixtures::counterexample_sqrt(), Premise::ClosedNominal),
        (fixtures::counterexample_jump(), Premise::OuterSemicontinuity),
        (fixtures::counterexample_escape(), Premise::LocalBoundedness),
    ] {
        let lip = estimate_lipusc(&f.family, &f.nominal, &s).unwrap();
        let nominal = f.family.evaluate(&f.nominal).unwrap();
        let probes = nominal_probe_points(&nominal, s.seed).unwrap();
        let sup = sup_calmness_over_nominal(&f.family, &f.nominal, &probes, &s).unwrap();
        let hyp = hypothesis_report(&f.family, &f.nominal, &s).unwrap();
        let violated = hyp.violated_premises();
        ok &= check(
            notes,
            lip.classification == Classification::Infinite,
            format!("{}: lipusc {:?}", f.id, lip.classification),
        );
        ok &= check(notes, value(&sup.estimate) <= 1e-6, format!("{}: sup clm {}", f.id, sup.estimate.value));
        ok &= check(notes, violated == vec![premise], format!("{}: violated premises {violated:?}", f.id));
    }
    ok
}

/// Random bounded 2-D polytope `{A x <= b}`: the box `[-2, 2]^2` cut by
/// three halfplanes that keep a disc of radius 0.5 around the origin.
fn random_polytope(seed: u64, i: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut r = rng::stream(seed, i);
    let mut a = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
    let mut b = vec![2.0; 4];
    for _ in 0..3 {
        let th = 2.0 * PI * rng::uniform(&mut r);
        a.push(vec![th.cos(), th.sin()]);
        b.push(0.5 + 1.5 * rng::uniform(&mut r));
    }
    (a, b)
}

fn inequality_holds(l: &ModulusEstimate, s: &ModulusEstimate) -> bool {
    l.value.is_infinite() || (s.value.is_finite() && l.value.value() >= s.value.value() - 1e-6)
}

fn fundamental_inequality(notes: &mut Vec<String>) -> bool {
    let mut violations = 0;
    let mut checked = 0;
    let full = RadiusSchedule::default();
    for f in fixtures::all() {
        let r = verify_equality(&f.family, &f.nominal, &full, 0.03).unwrap();
        checked += 1;
        if !inequality_holds(&r.lipusc, &r.sup_calmness.estimate) {
            violations += 1;
            notes.push(format!("BAD  {}: {} < {}", f.id, r.lipusc.value, r.sup_calmness.estimate.value));
        }
    }
    let s = RadiusSchedule::default().with_samples(48);
    let seed = 20_240_601;
    // 25 random feasible-set mappings {x : A x <= b} in the plane
    let lp = MappingFamily::new("lp", FamilyKind::LpFeasible { dim: 2, rows: 7, fixed: None }).unwrap();
    for i in 0..25 {
        let (a, b) = random_polytope(seed, i);
        let mut ybar: Vec<f64> = a.into_iter().flatten().collect();
        ybar.extend(b);
        let nominal = lp.evaluate(&ybar).unwrap();
        let probes = nominal_probe_points(&nominal, i).unwrap();
        let l = estimate_lipusc(&lp, &ybar, &s.clone().with_seed(i)).unwrap();
        let c = sup_calmness_over_nominal(&lp, &ybar, &probes, &s.clone().with_seed(i)).unwrap();
        checked += 1;
        if !inequality_holds(&l, &c.estimate) {
            violations += 1;
            notes.push(format!("BAD  lp #{i}: {} < {}", l.value, c.estimate.value));
        }
    }
    // 25 random LCPs in dimension 2 with nonempty nominal solution sets
    let lcp = MappingFamily::new("lcp", FamilyKind::Lcp { dim: 2 }).unwrap();
    let mut i = 0u64;
    let mut lcps = 0;
    while lcps < 25 {
        let mut r = rng::stream(seed + 1, i);
        i += 1;
        let ybar: Vec<f64> = (0..6).map(|_| 4.0 * rng::uniform(&mut r) - 2.0).collect();
        let nominal = lcp.evaluate(&ybar).unwrap();
        if nominal.is_empty().unwrap() || !matches!(nominal, SetRepr::FinitePointSet(_)) {
            continue;
        }
        lcps += 1;
        let probes = nominal_probe_points(&nominal, i).unwrap();
        let l = estimate_lipusc(&lcp, &ybar, &s.clone().with_seed(i)).unwrap();
        let c = sup_calmness_over_nominal(&lcp, &ybar, &probes, &s.clone().with_seed(i)).unwrap();
        checked += 1;
        if !inequality_holds(&l, &c.estimate) {
            violations += 1;
            notes.push(format!("BAD  lcp #{i}: {} < {}", l.value, c.estimate.value));
        }
    }
    check(notes, violations == 0, format!("{checked} instances, {violations} violations"))
}

struct RandomQp {
    q: Vec<Vec<f64>>,
    a: Vec<Vec<f64>>,
    c: Vec<f64>,
    b: Vec<f64>,
    x: Vec<f64>,
}

/// Strongly convex QP with a prescribed nondegenerate optimum: active rows
/// linearly independent with multipliers >= 0.2, inactive slack >= 0.5.
fn random_qp(seed: u64, i: u64) -> RandomQp {
    let mut r = rng::stream(seed, i);
    let mut u = || rng::uniform(&mut r);
    let n = 1 + (u() * 3.0) as usize;
    let m = 1 + (u() * 5.0) as usize;
    let l: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| 2.0 * u() - 1.0).collect()).collect();
    let q: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| dot(&l[i], &l[j]) + if i == j { 0.5 } else { 0.0 }).collect()).collect();
    let x: Vec<f64> = (0..n).map(|_| 2.0 * u() - 1.0).collect();
    let a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| 2.0 * u() - 1.0).collect()).collect();
    let want_active = (u() * (n.min(m) as f64 + 1.0)) as usize;
    let mut active: Vec<usize> = Vec::new();
    for t in 0..m {
        if active.len() == want_active {
            break;
        }
        let mut rows: Vec<Vec<f64>> = active.iter().map(|&s| a[s].clone()).collect();
        rows.push(a[t].clone());
        if rank(&matrix_from_rows(&rows, n)) == rows.len() {
            active.push(t);
        }
    }
    let mut b = vec![0.0; m];
    let mut c: Vec<f64> = (0..n).map(|i| -dot(&q[i], &x)).collect();
    for t in 0..m {
        if active.contains(&t) {
            b[t] = dot(&a[t], &x);
            let lambda = 0.2 + u();
            for j in 0..n {
                c[j] -= lambda * a[t][j];
            }
        } else {
            b[t] = dot(&a[t], &x) + 0.5 + u();
        }
    }
    RandomQp { q, a, c, b, x }
}

fn qp_oracle(notes: &mut Vec<String>) -> bool {
    let m1 = qp_canonical_modulus(&[vec![1.0]], &[vec![1.0]], &[-2.0], &[1.0], OperatorNorm::Spectral).unwrap();
    let mut ok = check(
        notes,
        (m1.value - 1.0).abs() <= 1e-9 && m1.certificates[0].m_d == vec![vec![1.0, 1.0], vec![1.0, 0.0]],
        format!("hand fixture Q = [[1]]: {} with M_D {:?}", m1.value, m1.certificates[0].m_d),
    );
    let m2 = qp_canonical_modulus(&[vec![2.0, 0.0], vec![0.0, 2.0]], &[], &[1.0, -1.0], &[], OperatorNorm::Spectral)
        .unwrap();
    ok &= check(notes, (m2.value - 0.5).abs() <= 1e-9, format!("hand fixture Q = 2I: {}", m2.value));

    // max-norm on parameters and image pairs with the max-row-sum operator norm
    let norms = NormSpec { parameter: NormKind::Chebyshev, image: NormKind::Chebyshev };
    let s = RadiusSchedule::default();
    let mut agree = 0;
    let count = 24;
    for i in 0..count {
        let p = random_qp(77, i);
        let exact = qp_canonical_modulus(&p.q, &p.a, &p.c, &p.b, OperatorNorm::InfInduced).unwrap();
        let fam = MappingFamily::new("qp", FamilyKind::QpOptimalCanonical { q: p.q.clone(), a: p.a.clone() })
            .unwrap()
            .with_norms(norms);
        let mut ybar = p.c.clone();
        ybar.extend(&p.b);
        let est = estimate_calmness(&fam, &ybar, &p.x, &s.clone().with_seed(i)).unwrap();
        let good = rel_close(value(&est), exact.value, 0.05);
        agree += good as usize;
        notes.push(format!(
            "{} qp #{i} (n = {}, m = {}, |T| = {}): exact {:.6}, sampled {:.6}",
            if good { "ok  " } else { "BAD " },
            p.x.len(),
            p.a.len(),
            exact.active_set.indices.len(),
            exact.value,
            value(&est)
        ));
    }
    ok &= check(notes, agree as u64 == count, format!("{agree} of {count} random instances within 5%"));
    ok
}

fn geometry_oracle(notes: &mut Vec<String>) -> bool {
    let pitch = 0.005;
    let k = (4.0 / pitch) as i64;
    let mut worst = 0.0f64;
    let mut ok = true;
    for i in 0..25 {
        let (a, b) = random_polytope(99, i);
        let p = Polyhedron::new(2, a.clone(), b.clone()).unwrap();
        let mut r = rng::stream(100, i);
        let x = [8.0 * rng::uniform(&mut r) - 4.0, 8.0 * rng::uniform(&mut r) - 4.0];
        let proj = project_onto_polyhedron(&x, &p).unwrap();
        let point = proj.point.clone().unwrap();
        let feasible = a.iter().zip(&b).all(|(row, bi)| dot(row, &point) <= bi + 1e-9);
        let mut brute = f64::INFINITY;
        for ix in 0..=k {
            for iy in 0..=k {
                let g = [-2.0 + ix as f64 * pitch, -2.0 + iy as f64 * pitch];
                if a.iter().zip(&b).all(|(row, bi)| dot(row, &g) <= *bi) {
                    brute = brute.min(NormKind::Euclidean.dist(&g, &x));
                }
            }
        }
        let gap = (brute - proj.distance.value()).abs();
        worst = worst.max(gap);
        if !(feasible && gap <= pitch + 1e-6 && brute >= proj.distance.value() - 1e-9) {
            ok = false;
            notes.push(format!("BAD  polytope #{i}: exact {} brute {brute} feasible {feasible}", proj.distance));
        }
    }
    check(notes, ok, format!("25 polytopes, worst gap {worst:.2e} (pitch {pitch})"))
}

fn main() -> ExitCode {
    let mut report = Report { failures: 0 };
    let secs = Duration::from_secs;
    report.criterion(1, "LP optimal-set fixture", Some(secs(10)), lp_fixture);
    report.criterion(2, "LCP fixture", Some(secs(10)), lcp_fixture);
    report.criterion(3, "SIP fixture", Some(secs(30)), sip_fixture);
    report.criterion(4, "sub-level fixture", None, sublevel_fixture);
    report.criterion(5, "counterexamples", None, counterexamples);
    report.criterion(6, "fundamental inequality", None, fundamental_inequality);
    report.criterion(7, "QP exact vs sampling oracle", Some(secs(120)), qp_oracle);
    report.criterion(8, "projection vs grid brute force", None, geometry_oracle);
    println!("{} of 8 criteria passed", 8 - report.failures);
    if report.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
