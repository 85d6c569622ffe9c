//! Scenario files, the end-to-end pipeline and result serialization.
//!
//! Scenarios and results are JSON. Complex numbers are `[re, im]` pairs (a
//! plain number is accepted on input); floats are written with 17
//! significant digits so every value round-trips exactly.

mod format;
mod grid;
mod run;
mod schema;

pub use format::{to_json_string, write_results, FAR_FIELD_FILE, RESULTS_FILE};
pub use grid::FarFieldGrid;
pub use run::{
    check, run, BodyReport, CacheStats, Diagnostics, EmFarField, FarFieldReport, FieldSample, NeumannReport, Results,
};
pub use schema::{
    BodySpec, CapacitanceSpec, Complex, ConditionKind, Family, GridSpec, IncidentKind, IncidentSpec, MediumSpec,
    MethodKind, OutputSpec, Scenario, ShapeSpec, SolverSpec,
};

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("{path}: {message} at line {line}, column {column}")]
    Parse {
        path: String,
        message: String,
        line: usize,
        column: usize,
    },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("[{module}]{}: {message}", .body.map(|b| format!(" body {b}")).unwrap_or_default())]
    Module {
        module: &'static str,
        body: Option<usize>,
        message: String,
    },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl ScenarioError {
    pub(crate) fn module(module: &'static str, body: Option<usize>, err: impl std::fmt::Display) -> Self {
        Self::Module {
            module,
            body,
            message: err.to_string(),
        }
    }

    pub(crate) fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        Self::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

/// Parses and validates a scenario document. Unknown keys are errors;
/// defaulted fields are filled in.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ScenarioError::Parse {
            path,
            message: inner.to_string().split(" at line ").next().unwrap_or_default().to_string(),
            line: inner.line(),
            column: inner.column(),
        }
    })?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::io(path, e))?;
    parse_scenario(&text)
}
