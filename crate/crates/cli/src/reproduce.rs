//! Canonical scenarios for the built-in examples and their expected values.

use std::fmt;

use lipcalm::{fixtures, Classification, ExtendedReal, Premise};
use serde::Serialize;

use crate::report::{run, AnalysisResult, RunReport};
use crate::scenario::{Analysis, Scenario};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tolerance {
    Relative { tol: f64 },
    Absolute { tol: f64 },
    Exact,
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::Relative { tol } => write!(f, "rel {tol}"),
            Tolerance::Absolute { tol } => write!(f, "abs {tol:e}"),
            Tolerance::Exact => f.write_str("exact"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub quantity: String,
    pub expected: String,
    pub computed: String,
    pub tolerance: Tolerance,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reproduction {
    pub example: String,
    pub rows: Vec<Row>,
}

impl Reproduction {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

impl fmt::Display for Reproduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.rows.iter().map(|r| r.quantity.len()).max().unwrap_or(0).max(8);
        let e = self.rows.iter().map(|r| r.expected.len()).max().unwrap_or(0).max(8);
        let c = self.rows.iter().map(|r| r.computed.len()).max().unwrap_or(0).max(8);
        writeln!(f, "{:<w$}  {:<e$}  {:<c$}  {:<10}  verdict", "quantity", "expected", "computed", "tolerance")?;
        for r in &self.rows {
            let tol = r.tolerance.to_string();
            let verdict = if r.pass { "pass" } else { "FAIL" };
            writeln!(f, "{:<w$}  {:<e$}  {:<c$}  {tol:<10}  {verdict}", r.quantity, r.expected, r.computed)?;
        }
        Ok(())
    }
}

fn numeric(quantity: impl Into<String>, want: f64, got: ExtendedReal, tol: Tolerance) -> Row {
    let pass = got.finite().is_some_and(|g| match tol {
        Tolerance::Relative { tol } => (g - want).abs() <= tol * want.abs(),
        Tolerance::Absolute { tol } => (g - want).abs() <= tol,
        Tolerance::Exact => g == want,
    });
    Row { quantity: quantity.into(), expected: want.to_string(), computed: got.to_string(), tolerance: tol, pass }
}

fn label(quantity: impl Into<String>, want: String, got: String) -> Row {
    let pass = want == got;
    Row { quantity: quantity.into(), expected: want, computed: got, tolerance: Tolerance::Exact, pass }
}

const REL: Tolerance = Tolerance::Relative { tol: 0.03 };
const ZERO: Tolerance = Tolerance::Absolute { tol: 1e-6 };

/// The scenario `reproduce` runs for `id`.
pub fn canonical_scenario(id: &str) -> Option<Scenario> {
    let f = fixtures::by_id(id)?;
    let mut s = Scenario::new(f.family, f.nominal);
    s.analyses = match id {
        "lp_optimal" => vec![Analysis::Calmness { x: vec![1.0] }, Analysis::VerifyEquality { rel_tol: 0.03 }],
        "lcp" => vec![
            Analysis::Calmness { x: vec![0.0] },
            Analysis::Calmness { x: vec![1.0] },
            Analysis::VerifyEquality { rel_tol: 0.03 },
        ],
        "sip" => vec![
            Analysis::SupCalmness { points: Some(vec![vec![-1.0], vec![-0.5], vec![0.0], vec![0.5], vec![1.0]]) },
            Analysis::Lipusc,
        ],
        "sublevel" => vec![Analysis::ExactSublevel, Analysis::Lipusc],
        _ => vec![Analysis::VerifyEquality { rel_tol: 0.03 }],
    };
    Some(s)
}

fn classification(c: Classification) -> String {
    format!("{c:?}").to_lowercase()
}

fn premises(p: &[Premise]) -> String {
    let names: Vec<String> = p.iter().map(|p| serde_json::to_value(p).unwrap().as_str().unwrap().to_string()).collect();
    names.join(",")
}

/// Compares a finished canonical run with the expected values.
pub fn table(id: &str, report: &RunReport) -> Vec<Row> {
    use AnalysisResult as R;
    let mut rows = Vec::new();
    for r in &report.results {
        match (id, r) {
            ("lp_optimal" | "lcp", R::Calmness { x, estimate }) => {
                let want = if id == "lcp" && x[0] == 0.0 { 0.0 } else { 2.0 };
                let tol = if want == 0.0 { ZERO } else { REL };
                rows.push(numeric(format!("clm at x = {}", x[0]), want, estimate.value, tol));
            }
            ("lp_optimal" | "lcp", R::VerifyEquality { report: e }) => {
                rows.push(numeric("lipusc", 2.0, e.lipusc.value, REL));
                rows.push(numeric("sup clm", 2.0, e.sup_calmness.estimate.value, REL));
                rows.push(label("equality verdict", "equal".into(), format!("{:?}", e.verdict).to_lowercase()));
            }
            ("sip", R::SupCalmness { result }) => {
                for p in &result.points {
                    let x = p.point[0];
                    let (want, tol) = if x.abs() == 1.0 { (2.0, REL) } else { (0.0, ZERO) };
                    rows.push(numeric(format!("clm at x = {x}"), want, p.estimate.value, tol));
                }
            }
            ("sip" | "sublevel", R::Lipusc { estimate }) => {
                let (want, tol) = if id == "sip" { (2.0, REL) } else { (1.0, Tolerance::Relative { tol: 0.05 }) };
                rows.push(numeric("lipusc (sampled)", want, estimate.value, tol));
            }
            ("sublevel", R::ExactSublevel { result }) => {
                rows.push(numeric("modulus (exact)", 1.0, result.value, Tolerance::Absolute { tol: 1e-9 }));
                let want = [-2.0, -1.0, 0.0, 1.0, 2.0];
                let got: Vec<f64> = result.boundary_points.iter().map(|x| x / std::f64::consts::PI).collect();
                let same = got.len() == want.len() && got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 1e-9);
                rows.push(Row {
                    quantity: "boundary points / pi".into(),
                    expected: format!("{want:?}"),
                    computed: format!("{:?}", got.iter().map(|g| (g * 1e9).round() / 1e9).collect::<Vec<_>>()),
                    tolerance: Tolerance::Absolute { tol: 1e-9 },
                    pass: same,
                });
            }
            (_, R::VerifyEquality { report: e }) => {
                let violated = match id {
                    "counterexample_sqrt" => Premise::ClosedNominal,
                    "counterexample_jump" => Premise::OuterSemicontinuity,
                    _ => Premise::LocalBoundedness,
                };
                rows.push(label("lipusc class", "infinite".into(), classification(e.lipusc.classification)));
                rows.push(numeric("sup clm", 0.0, e.sup_calmness.estimate.value, ZERO));
                rows.push(label(
                    "violated premise",
                    premises(&[violated]),
                    premises(&e.hypotheses.violated_premises()),
                ));
            }
            _ => {}
        }
    }
    rows
}

/// Runs the canonical scenario with `adjust` applied (flag overrides).
pub fn reproduce(id: &str, adjust: impl FnOnce(&mut Scenario)) -> Result<(RunReport, Reproduction), CliError> {
    let mut scenario = canonical_scenario(id).ok_or_else(|| CliError::Validation {
        field: "example_id".into(),
        message: format!("unknown example {id:?}; expected one of {}", fixtures::IDS.join(", ")),
    })?;
    adjust(&mut scenario);
    let report = run(&scenario)?;
    let rows = table(id, &report);
    Ok((report, Reproduction { example: id.into(), rows }))
}
