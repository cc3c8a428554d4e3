//! The manifold spec file: a JSON document describing a chart manifold and its sample points.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chart::{ChartManifold, DEFAULT_FD_STEP};
use crate::dsl::{build_manifold, parse, FieldSpec};
use crate::error::{Error, Result};
use crate::random::random_coords;

pub const DEFAULT_SEED: u64 = 20_240_117;
pub const DEFAULT_POINT_COUNT: usize = 5;
pub const SEED_ENV: &str = "PAPM_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    ConformalProduct,
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub n: usize,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<Vec<String>>>,
    #[serde(default, rename = "P", skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
}

/// A parsed spec with its manifold and evaluation points.
#[derive(Clone, Debug)]
pub struct LoadedSpec {
    pub file: SpecFile,
    pub field: FieldSpec,
    pub manifold: ChartManifold,
    pub points: Vec<Vec<f64>>,
    /// Seed used to draw the points; `None` when the spec lists them.
    pub seed: Option<u64>,
}

impl SpecFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Field(format!("malformed spec: {e}")))
    }

    pub fn field_spec(&self) -> Result<FieldSpec> {
        let n = self.n;
        if n == 0 {
            return Err(Error::Field("n must be at least 1".into()));
        }
        match self.kind {
            Kind::ConformalProduct => {
                if self.g.is_some() || self.p.is_some() {
                    return Err(Error::Field(
                        "\"g\" and \"P\" belong to the explicit kind".into(),
                    ));
                }
                let src = self
                    .u
                    .as_deref()
                    .ok_or_else(|| Error::Field("conformal_product needs \"u\"".into()))?;
                Ok(FieldSpec::ConformalProduct { n, u: parse(src)? })
            }
            Kind::Explicit => {
                if self.u.is_some() {
                    return Err(Error::Field(
                        "\"u\" belongs to the conformal_product kind".into(),
                    ));
                }
                let (Some(g), Some(p)) = (&self.g, &self.p) else {
                    return Err(Error::Field("explicit needs \"g\" and \"P\"".into()));
                };
                let g = g
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|s| parse(s))
                            .collect::<std::result::Result<_, _>>()
                    })
                    .collect::<std::result::Result<_, _>>()?;
                Ok(FieldSpec::Explicit { n, g, p: p.clone() })
            }
        }
    }
}

/// Seed from the environment, falling back to [`DEFAULT_SEED`].
pub fn seed_from_env() -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Field(format!("{SEED_ENV}='{s}' is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Seeded points in `[-0.5, 0.5]^dim`.
pub fn default_points(dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..DEFAULT_POINT_COUNT)
        .map(|_| random_coords(dim, 0.5, &mut rng))
        .collect()
}

impl LoadedSpec {
    pub fn from_file(path: &Path, seed: u64) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Field(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, seed)
    }

    /// Parses and checks everything that is input rather than mathematics;
    /// structure axioms are checked per point by the commands.
    pub fn from_json(text: &str, seed: u64) -> Result<Self> {
        let file = SpecFile::from_json(text)?;
        let field = file.field_spec()?;
        let dim = 2 * file.n;
        let manifold =
            build_manifold(&field, &[])?.with_fd_step(file.fd_step.unwrap_or(DEFAULT_FD_STEP))?;
        let (points, seed) = match &file.points {
            Some(pts) => {
                if pts.is_empty() {
                    return Err(Error::Field("\"points\" is empty".into()));
                }
                if let Some(bad) = pts.iter().find(|p| p.len() != dim) {
                    return Err(Error::Field(format!(
                        "point {bad:?} has {} coordinates, expected {dim}",
                        bad.len()
                    )));
                }
                (pts.clone(), None)
            }
            None => (default_points(dim, seed), Some(seed)),
        };
        Ok(Self {
            file,
            field,
            manifold,
            points,
            seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_conformal_spec_with_default_points() {
        let s = LoadedSpec::from_json(r#"{"n": 2, "kind": "conformal_product", "u": "x1*x3"}"#, 3)
            .unwrap();
        assert_eq!(s.points.len(), DEFAULT_POINT_COUNT);
        assert!(s.points.iter().flatten().all(|x| x.abs() <= 0.5));
        assert_eq!(s.seed, Some(3));
        let again =
            LoadedSpec::from_json(r#"{"n": 2, "kind": "conformal_product", "u": "x1*x3"}"#, 3)
                .unwrap();
        assert_eq!(s.points, again.points);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "{",
            r#"{"n": 2, "kind": "conformal_product"}"#,
            r#"{"n": 2, "kind": "conformal_product", "u": "x1+*x2"}"#,
            r#"{"n": 2, "kind": "spherical", "u": "x1"}"#,
            r#"{"n": 1, "kind": "conformal_product", "u": "x1", "points": [[0.0]]}"#,
            r#"{"n": 1, "kind": "conformal_product", "u": "x1", "fd_step": 0.5}"#,
            r#"{"n": 1, "kind": "explicit", "g": [["1","x1"],["0","1"]], "P": [[1,0],[0,-1]]}"#,
        ] {
            assert!(LoadedSpec::from_json(text, 1).is_err(), "{text}");
        }
    }
}
