//! Scenario files, trajectory CSVs, reports and the check/simulate pipeline
//! behind the `ltv-commute` command.

pub mod builtins;
pub mod csv;
pub mod pipeline;
pub mod report;
pub mod scenario;

use std::path::Path;

pub use scenario::{Scenario, ScenarioError};

/// Resolves a built-in name or a scenario file path.
pub fn resolve(spec: &str) -> Result<Scenario, ScenarioError> {
    match builtins::get(spec) {
        Some(s) => s,
        None => Scenario::load(Path::new(spec)),
    }
}
