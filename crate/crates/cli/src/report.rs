//! Run reports: per-stage diagnostics, assertions with their tolerances, and
//! the mesh files written. Reports carry no timestamps or paths so that equal
//! inputs give byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// measured <= tolerance
    Le,
    /// measured >= tolerance
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub stage: String,
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Assertion {
    pub fn new(
        stage: &str,
        name: &str,
        measured: f64,
        tolerance: f64,
        comparison: Comparison,
    ) -> Self {
        // NaN fails either way
        let pass = match comparison {
            Comparison::Le => measured <= tolerance,
            Comparison::Ge => measured >= tolerance,
        };
        Assertion {
            stage: stage.to_string(),
            name: name.to_string(),
            measured,
            tolerance,
            comparison,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub id: String,
    pub op: String,
    pub diagnostics: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshRecord {
    pub object: String,
    pub file: String,
    pub vertices: usize,
    pub faces: usize,
    pub dropped_vertices: usize,
    pub dropped_cells: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalars_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub name: String,
    pub seed: u64,
    pub stages: Vec<StageReport>,
    pub assertions: Vec<Assertion>,
    pub meshes: Vec<MeshRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<StageError>,
    pub pass: bool,
}

impl RunReport {
    pub fn new(name: &str, seed: u64) -> Self {
        RunReport {
            schema_version: REPORT_SCHEMA_VERSION,
            name: name.to_string(),
            seed,
            stages: Vec::new(),
            assertions: Vec::new(),
            meshes: Vec::new(),
            error: None,
            pass: false,
        }
    }

    pub fn finish(&mut self) {
        self.pass = self.error.is_none() && self.assertions.iter().all(|a| a.pass);
    }

    pub fn failed_assertions(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    /// One row per assertion.
    pub fn residuals_csv(&self) -> String {
        let mut s = String::from("stage,assertion,measured,tolerance,comparison,pass\n");
        for a in &self.assertions {
            let cmp = match a.comparison {
                Comparison::Le => "le",
                Comparison::Ge => "ge",
            };
            let _ = writeln!(
                s,
                "{},{},{:e},{:e},{cmp},{}",
                a.stage, a.name, a.measured, a.tolerance, a.pass
            );
        }
        s
    }
}

/// Diagnostics collector for one stage.
#[derive(Debug, Default)]
pub struct Diagnostics(pub BTreeMap<String, Value>);

impl Diagnostics {
    pub fn set(&mut self, key: &str, v: impl Serialize) {
        self.0.insert(
            key.to_string(),
            serde_json::to_value(v).expect("diagnostic serialises"),
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_never_passes() {
        assert!(!Assertion::new("s", "x", f64::NAN, 1.0, Comparison::Le).pass);
        assert!(!Assertion::new("s", "x", f64::NAN, 1.0, Comparison::Ge).pass);
        assert!(Assertion::new("s", "x", 1.0, 1.0, Comparison::Ge).pass);
    }

    #[test]
    fn pass_needs_all_assertions_and_no_error() {
        let mut r = RunReport::new("t", 0);
        r.assertions
            .push(Assertion::new("a", "x", 0.0, 1.0, Comparison::Le));
        r.finish();
        assert!(r.pass);
        r.assertions
            .push(Assertion::new("b", "y", 2.0, 1.0, Comparison::Le));
        r.finish();
        assert!(!r.pass);
        assert_eq!(r.failed_assertions().count(), 1);
        assert_eq!(r.residuals_csv().lines().count(), 3);
    }
}
