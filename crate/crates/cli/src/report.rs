//! Running a scenario and writing its report and traces.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lipcalm::{
    estimate_calmness, estimate_lipusc, hypothesis_report, nominal_probe_points, qp_canonical_modulus,
    sublevel_modulus, sup_calmness_over_nominal, verify_equality, EqualityReport, FamilyKind, HypothesisVerdict,
    ModulusEstimate, QpModulus, SetValuedMapping, SublevelModulus, SupCalmness,
};
use serde::{Deserialize, Serialize};

use crate::scenario::{Analysis, Scenario};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub lipcalm: String,
    pub cli: String,
}

impl Versions {
    pub fn current() -> Self {
        Versions { lipcalm: lipcalm::VERSION.into(), cli: env!("CARGO_PKG_VERSION").into() }
    }
}

/// One entry per requested analysis, same order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AnalysisResult {
    Lipusc { estimate: ModulusEstimate },
    Calmness { x: Vec<f64>, estimate: ModulusEstimate },
    SupCalmness { result: SupCalmness },
    ExactQp { result: QpModulus },
    ExactSublevel { result: SublevelModulus },
    Hypotheses { verdict: HypothesisVerdict },
    VerifyEquality { report: EqualityReport },
}

impl AnalysisResult {
    /// Per-radius series for the trace files, with a file-name suffix.
    pub fn traces(&self) -> Vec<(&'static str, &ModulusEstimate)> {
        match self {
            AnalysisResult::Lipusc { estimate } => vec![("lipusc", estimate)],
            AnalysisResult::Calmness { estimate, .. } => vec![("calmness", estimate)],
            AnalysisResult::SupCalmness { result } => vec![("sup_calmness", &result.estimate)],
            AnalysisResult::VerifyEquality { report } => vec![
                ("verify_equality_lipusc", &report.lipusc),
                ("verify_equality_sup_calmness", &report.sup_calmness.estimate),
            ],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub results: Vec<AnalysisResult>,
    pub versions: Versions,
    pub seed: u64,
    pub wall_time_seconds: f64,
}

fn solver(analysis: &str) -> impl Fn(lipcalm::Error) -> CliError + '_ {
    move |e| CliError::Solver { analysis: analysis.to_string(), source: e }
}

pub fn run_analysis(s: &Scenario, a: &Analysis) -> Result<AnalysisResult, CliError> {
    let (f, y, sch) = (&s.family, s.nominal.as_slice(), &s.schedule);
    let err = solver(a.name());
    Ok(match a {
        Analysis::Lipusc => AnalysisResult::Lipusc { estimate: estimate_lipusc(f, y, sch).map_err(&err)? },
        Analysis::Calmness { x } => {
            AnalysisResult::Calmness { x: x.clone(), estimate: estimate_calmness(f, y, x, sch).map_err(&err)? }
        }
        Analysis::SupCalmness { points } => {
            let points = match points {
                Some(p) => p.clone(),
                None => nominal_probe_points(&f.evaluate(y).map_err(&err)?, sch.seed).map_err(&err)?,
            };
            AnalysisResult::SupCalmness { result: sup_calmness_over_nominal(f, y, &points, sch).map_err(&err)? }
        }
        Analysis::ExactQp { norm } => {
            let FamilyKind::QpOptimalCanonical { q, a } = &f.kind else { unreachable!("validated") };
            let (c, b) = y.split_at(q.len());
            AnalysisResult::ExactQp { result: qp_canonical_modulus(q, a, c, b, *norm).map_err(&err)? }
        }
        Analysis::ExactSublevel => {
            let FamilyKind::Sublevel1d { function, domain, grid_points } = &f.kind else { unreachable!("validated") };
            let result = sublevel_modulus(function, y[0], (domain[0], domain[1]), *grid_points).map_err(&err)?;
            AnalysisResult::ExactSublevel { result }
        }
        Analysis::Hypotheses => AnalysisResult::Hypotheses { verdict: hypothesis_report(f, y, sch).map_err(&err)? },
        Analysis::VerifyEquality { rel_tol } => {
            AnalysisResult::VerifyEquality { report: verify_equality(f, y, sch, *rel_tol).map_err(&err)? }
        }
    })
}

/// Runs every analysis in declaration order. Writes nothing.
pub fn run(scenario: &Scenario) -> Result<RunReport, CliError> {
    scenario.validate()?;
    let start = Instant::now();
    let results = scenario.analyses.iter().map(|a| run_analysis(scenario, a)).collect::<Result<Vec<_>, _>>()?;
    Ok(RunReport {
        scenario: scenario.clone(),
        results,
        versions: Versions::current(),
        seed: scenario.schedule.seed,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Loads, runs and writes. `out_dir` overrides the scenario's output dir.
pub fn run_scenario(path: &Path, out_dir: Option<&Path>) -> Result<(RunReport, Vec<PathBuf>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let scenario = Scenario::from_json(&text)?;
    let report = run(&scenario)?;
    let written = write_outputs(&report, out_dir)?;
    Ok((report, written))
}

pub const DEFAULT_OUT_DIR: &str = "lipcalm-out";

/// Report JSON plus one CSV per traced series. An empty analysis list
/// writes nothing.
pub fn write_outputs(report: &RunReport, out_dir: Option<&Path>) -> Result<Vec<PathBuf>, CliError> {
    if report.results.is_empty() {
        return Ok(Vec::new());
    }
    let out = &report.scenario.output;
    let dir = out_dir.map(Path::to_path_buf).or_else(|| out.dir.clone()).unwrap_or_else(|| DEFAULT_OUT_DIR.into());
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut written = Vec::new();
    let report_path = dir.join(out.report.clone().unwrap_or_else(|| "report.json".into()));
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    fs::write(&report_path, json + "\n").map_err(|e| CliError::io(&report_path, e))?;
    written.push(report_path);
    written.extend(emit_traces(report, &dir)?);
    Ok(written)
}

/// `NN_<series>.csv` for each analysis with a per-radius trace.
pub fn emit_traces(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for (i, r) in report.results.iter().enumerate() {
        for (suffix, est) in r.traces() {
            let path = dir.join(format!("{i:02}_{suffix}.csv"));
            let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::csv(&path, e))?;
            crate::trace::write(&mut w, est).map_err(|e| CliError::csv(&path, e))?;
            w.flush().map_err(|e| CliError::io(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}
