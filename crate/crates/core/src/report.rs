//! Named tolerance checks carried inside reports.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Assertion {
    /// Passes when `value < tolerance`; NaN fails.
    pub fn below(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.to_string(), value, tolerance, passed: value < tolerance }
    }

    /// Same check against a different tolerance.
    pub fn with_tolerance(&self, tolerance: f64) -> Self {
        Self::below(&self.name, self.value, tolerance)
    }
}
