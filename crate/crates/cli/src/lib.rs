//! Scene runner for chansurf: JSON scene configs, pipelines of kernel
//! operations, diagnostics reports and OBJ export.

pub mod config;
pub mod demos;
pub mod pipeline;
pub mod report;

use std::path::Path;

pub use config::{SceneConfig, SchemaError};
pub use pipeline::{execute, write_outputs, Outcome};
pub use report::RunReport;

/// Exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    /// A stage failed or an assertion did not hold.
    Fail = 1,
    /// The scene did not validate; nothing was written.
    Schema = 2,
}

/// Runs `cfg` and writes all outputs into `dir`.
pub fn run_scene(cfg: &SceneConfig, dir: &Path) -> anyhow::Result<RunReport> {
    let outcome = execute(cfg);
    write_outputs(&outcome, dir)?;
    Ok(outcome.report)
}
