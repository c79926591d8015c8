//! Machine-readable run records emitted by the command-line tool.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bounds::{EntropyBound, LogBeta, Target};
use crate::oracle::CheckResult;

/// JSON schema describing [`RunRecord`].
pub const SCHEMA: &str = include_str!("../schema/run_record.schema.json");

/// Tool version recorded in every run.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Outcome class of a run, mirrored by the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NotConverged,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Consistency {
    pub target: Target,
    pub consistent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvePoint {
    pub p: f64,
    pub value: f64,
    pub peak: bool,
}

/// One result; the `kind` tag names the variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResultRow {
    Beta(LogBeta),
    Bound(EntropyBound),
    Consistency(Consistency),
    Curve(CurvePoint),
    Check(CheckResult),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timings {
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub command: String,
    pub version: String,
    pub status: Status,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub results: Vec<ResultRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl RunRecord {
    pub fn new(command: &str, parameters: BTreeMap<String, serde_json::Value>) -> Self {
        Self {
            command: command.to_string(),
            version: VERSION.to_string(),
            status: Status::Ok,
            parameters,
            results: Vec::new(),
            timings: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records serialize")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
