//! Scenario files: one JSON document per run.

use std::path::PathBuf;

use lipcalm::{FamilyKind, MappingFamily, OperatorNorm, RadiusSchedule, SetValuedMapping};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub family: MappingFamily,
    /// Packed nominal parameter, in the family's packing order.
    pub nominal: Vec<f64>,
    #[serde(default)]
    pub schedule: RadiusSchedule,
    #[serde(default)]
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub output: OutputPaths,
}

/// Requested analyses, run in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Analysis {
    Lipusc,
    Calmness {
        x: Vec<f64>,
    },
    /// Over `points`, or over the standard nominal probes when absent.
    SupCalmness {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<Vec<Vec<f64>>>,
    },
    ExactQp {
        #[serde(default)]
        norm: OperatorNorm,
    },
    ExactSublevel,
    Hypotheses,
    VerifyEquality {
        #[serde(default = "default_rel_tol")]
        rel_tol: f64,
    },
}

fn default_rel_tol() -> f64 {
    0.03
}

impl Analysis {
    pub fn name(&self) -> &'static str {
        match self {
            Analysis::Lipusc => "lipusc",
            Analysis::Calmness { .. } => "calmness",
            Analysis::SupCalmness { .. } => "sup_calmness",
            Analysis::ExactQp { .. } => "exact_qp",
            Analysis::ExactSublevel => "exact_sublevel",
            Analysis::Hypotheses => "hypotheses",
            Analysis::VerifyEquality { .. } => "verify_equality",
        }
    }
}

/// Relative paths resolve against the output directory.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Validation { field: field.into(), message: message.into() }
}

impl Scenario {
    pub fn new(family: MappingFamily, nominal: Vec<f64>) -> Self {
        Scenario {
            schema_version: SCHEMA_VERSION,
            family,
            nominal,
            schedule: RadiusSchedule::default(),
            analyses: Vec::new(),
            output: OutputPaths::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let s: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            CliError::Parse {
                path: e.path().to_string(),
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Structural checks; the error names the offending field.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        self.family.validate().map_err(|e| invalid("family", e.to_string()))?;
        let p = self.family.parameter_dim();
        if self.nominal.len() != p {
            return Err(invalid(
                "nominal",
                format!(
                    "length {} does not match the {} packing ({p} entries)",
                    self.nominal.len(),
                    self.family.kind.name()
                ),
            ));
        }
        if self.nominal.iter().any(|v| !v.is_finite()) {
            return Err(invalid("nominal", "entries must be finite"));
        }
        self.schedule.validate().map_err(|e| invalid("schedule", e.to_string()))?;
        let n = self.family.image_dim();
        for (i, a) in self.analyses.iter().enumerate() {
            let at = |f: &str| format!("analyses[{i}].{f}");
            match a {
                Analysis::Calmness { x } if x.len() != n => {
                    return Err(invalid(at("x"), format!("length {} does not match image dimension {n}", x.len())));
                }
                Analysis::SupCalmness { points: Some(pts) } => {
                    if pts.is_empty() {
                        return Err(invalid(at("points"), "at least one point is needed"));
                    }
                    if let Some(j) = pts.iter().position(|x| x.len() != n) {
                        return Err(invalid(at(&format!("points[{j}]")), format!("expected {n} coordinates")));
                    }
                }
                Analysis::ExactQp { .. } if !matches!(self.family.kind, FamilyKind::QpOptimalCanonical { .. }) => {
                    return Err(invalid(at("type"), "exact_qp needs a qp_optimal_canonical family"));
                }
                Analysis::ExactSublevel if !matches!(self.family.kind, FamilyKind::Sublevel1d { .. }) => {
                    return Err(invalid(at("type"), "exact_sublevel needs a sublevel_1d family"));
                }
                Analysis::VerifyEquality { rel_tol } if !(*rel_tol >= 0.0 && rel_tol.is_finite()) => {
                    return Err(invalid(at("rel_tol"), "must be finite and nonnegative"));
                }
                _ => {}
            }
        }
        Ok(())
    }
}
