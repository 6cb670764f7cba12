//! Scenarios shipped with the tool. The files under `scenarios/` are the
//! single source; they are embedded at compile time.

use crate::scenario::{Scenario, ScenarioError};

pub const BUILTINS: &[(&str, &str)] = &[
    ("example1", include_str!("../scenarios/example1.scn")),
    ("example1-mistuned", include_str!("../scenarios/example1-mistuned.scn")),
    ("example1-retuned", include_str!("../scenarios/example1-retuned.scn")),
    ("example1-first-order", include_str!("../scenarios/example1-first-order.scn")),
    ("example2", include_str!("../scenarios/example2.scn")),
    ("example2-feedback", include_str!("../scenarios/example2-feedback.scn")),
    ("example2-feedback-unity", include_str!("../scenarios/example2-feedback-unity.scn")),
    ("example3", include_str!("../scenarios/example3.scn")),
    ("scalar-identity", include_str!("../scenarios/scalar-identity.scn")),
    ("scalar-gain2", include_str!("../scenarios/scalar-gain2.scn")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|(n, _)| *n)
}

pub fn get(name: &str) -> Option<Result<Scenario, ScenarioError>> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, text)| Scenario::parse(text))
}
