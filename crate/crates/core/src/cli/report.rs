//! JSON report envelope shared by all commands.

use serde::Serialize;

use super::spec_file::SpecFile;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Tolerances {
    /// Curvature-level identities and the P-tensor predicate.
    pub curvature: f64,
    /// First-derivative-level identities, parallel torsion.
    pub derivative: f64,
    /// W1 residual and closedness of `θ`, `θ∘P`.
    pub structure: f64,
}

impl Tolerances {
    /// Ricci and scalar curvature relations accumulate one more contraction.
    pub fn ricci(&self) -> f64 {
        10.0 * self.curvature
    }
}

/// A residual with the tolerance it was judged against.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    /// `None` for values that are reported but not judged.
    pub tolerance: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub fn judged(name: &str, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance: Some(tolerance),
            passed: residual <= tolerance,
        }
    }

    pub fn info(name: &str, residual: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance: None,
            passed: true,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Summary {
    pub passed: bool,
    pub failures: Vec<String>,
}

impl Summary {
    pub fn from_failures(failures: Vec<String>) -> Self {
        Self {
            passed: failures.is_empty(),
            failures,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub spec: SpecFile,
    pub seed: Option<u64>,
    pub fd_step: f64,
    pub points: Vec<Vec<f64>>,
    pub tolerances: Tolerances,
    #[serde(flatten)]
    pub body: T,
    pub summary: Summary,
}

pub fn to_json<T: Serialize>(report: &Report<T>) -> String {
    serde_json::to_string_pretty(report).expect("report types serialize infallibly")
}
