//! Scenario files, reports and CSV traces for `lipcalm`.
//!
//! Verdicts are data. Only unreadable input, invalid scenarios and solver
//! preconditions produce errors (and nonzero exit codes).

use std::path::{Path, PathBuf};

pub mod report;
pub mod reproduce;
pub mod scenario;
pub mod trace;

pub use report::{run, run_scenario, write_outputs, AnalysisResult, RunReport};
pub use scenario::{Analysis, Scenario};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: at `{field}`: {message}", field = if path.is_empty() { "." } else { path })]
    Parse { path: String, line: usize, column: usize, message: String },

    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{analysis}: {source}")]
    Solver { analysis: String, source: lipcalm::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn csv(path: &Path, e: csv::Error) -> Self {
        let source = match e.into_kind() {
            csv::ErrorKind::Io(e) => e,
            other => std::io::Error::other(format!("{other:?}")),
        };
        CliError::io(path, source)
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } | CliError::Validation { .. } => 2,
            CliError::Io { .. } => 3,
            CliError::Solver { .. } => 4,
        }
    }
}

/// `(kind, packed parameter layout)` for `list-families`.
pub fn family_packings() -> Vec<(&'static str, &'static str)> {
    let layouts = [
        "A (rows x dim, row-major), b (rows)",
        "A (rows x dim), b (rows), c (dim)",
        "c (n), b (m); Q and A are structural",
        "A (rows x dim), Q (dim x dim), b (rows), c (dim); image is (x, lambda)",
        "M (dim x dim), q (dim)",
        "per coordinate j: a_j coefficients of (1, t, |t|), then b coefficients of (1, t)",
        "alpha",
        "y",
        "y",
        "y",
    ];
    lipcalm::FamilyKind::ALL_NAMES.into_iter().zip(layouts).collect()
}

/// JSON Schema (draft 2020-12) for scenario files.
pub fn scenario_schema() -> serde_json::Value {
    use serde_json::json;
    let vector = json!({"type": "array", "items": {"type": "number"}});
    let matrix = json!({"type": "array", "items": vector});
    let norm = json!({"enum": ["chebyshev", "euclidean"]});
    let polyhedron = json!({
        "type": "object",
        "required": ["dim", "a", "b"],
        "properties": {"dim": {"type": "integer"}, "a": matrix, "b": vector}
    });
    let kind = |name: &str, props: serde_json::Value, required: &[&str]| {
        let mut p = props.as_object().cloned().unwrap_or_default();
        p.insert("kind".into(), json!({"const": name}));
        let mut r = vec!["kind"];
        r.extend_from_slice(required);
        json!({"type": "object", "properties": p, "required": r})
    };
    let dims = json!({"dim": {"type": "integer", "minimum": 1}, "rows": {"type": "integer"}, "fixed": polyhedron});
    let families = json!([
        kind("lp_feasible", dims.clone(), &["dim", "rows"]),
        kind("lp_optimal_full", dims, &["dim", "rows"]),
        kind("qp_optimal_canonical", json!({"q": matrix, "a": matrix}), &["q", "a"]),
        kind("qp_kkt_full", json!({"dim": {"type": "integer"}, "rows": {"type": "integer"}}), &["dim", "rows"]),
        kind("lcp", json!({"dim": {"type": "integer", "minimum": 1}}), &["dim"]),
        kind(
            "sip_grid",
            json!({"dim": {"type": "integer"}, "nominal_a": matrix, "nominal_b": vector, "grid_points": {"type": "integer", "default": 201}}),
            &["dim", "nominal_a", "nominal_b"]
        ),
        kind(
            "sublevel_1d",
            json!({
                "function": {"oneOf": [
                    {"type": "object", "properties": {"type": {"const": "sin"}}, "required": ["type"]},
                    {"type": "object", "properties": {"type": {"const": "cos"}}, "required": ["type"]},
                    {"type": "object", "properties": {"type": {"const": "polynomial"}, "coefficients": vector}, "required": ["type", "coefficients"]}
                ]},
                "domain": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "grid_points": {"type": "integer", "default": 4001}
            }),
            &["function", "domain"]
        ),
        kind("counterexample_sqrt", json!({}), &[]),
        kind("counterexample_jump", json!({}), &[]),
        kind("counterexample_escape", json!({}), &[]),
    ]);
    let analysis = |name: &str, props: serde_json::Value, required: &[&str]| {
        let mut p = props.as_object().cloned().unwrap_or_default();
        p.insert("type".into(), json!({"const": name}));
        let mut r = vec!["type"];
        r.extend_from_slice(required);
        json!({"type": "object", "properties": p, "required": r, "additionalProperties": false})
    };
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "lipcalm scenario",
        "type": "object",
        "required": ["schema_version", "family", "nominal"],
        "additionalProperties": false,
        "properties": {
            "schema_version": {"const": scenario::SCHEMA_VERSION},
            "family": {
                "description": "Mapping kind with its structural data, plus name, norms and probe directions.",
                "allOf": [
                    {"oneOf": families},
                    {"properties": {
                        "name": {"type": "string"},
                        "norms": {"type": "object", "properties": {"parameter": norm, "image": norm}},
                        "probes": matrix
                    }}
                ]
            },
            "nominal": {"description": "Packed parameter; see `lipcalm list-families`.", "type": "array", "items": {"type": "number"}},
            "schedule": {
                "type": "object",
                "properties": {
                    "radii": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
                    "samples_per_radius": {"type": "integer", "minimum": 1, "default": 256},
                    "seed": {"type": "integer", "minimum": 0, "default": 0},
                    "localization_radius_factor": {"type": "number", "default": 10.0},
                    "growth_factor": {"type": "number", "default": 4.0},
                    "stabilization_tol": {"type": "number", "default": 0.02},
                    "sup_budget": {"type": "integer", "default": 64}
                }
            },
            "analyses": {"type": "array", "items": {"oneOf": [
                analysis("lipusc", json!({}), &[]),
                analysis("calmness", json!({"x": vector}), &["x"]),
                analysis("sup_calmness", json!({"points": matrix}), &[]),
                analysis("exact_qp", json!({"norm": {"enum": ["spectral", "inf_induced"], "default": "spectral"}}), &[]),
                analysis("exact_sublevel", json!({}), &[]),
                analysis("hypotheses", json!({}), &[]),
                analysis("verify_equality", json!({"rel_tol": {"type": "number", "minimum": 0, "default": 0.03}}), &[]),
            ]}},
            "output": {
                "type": "object",
                "additionalProperties": false,
                "properties": {"dir": {"type": "string"}, "report": {"type": "string"}}
            }
        }
    })
}
