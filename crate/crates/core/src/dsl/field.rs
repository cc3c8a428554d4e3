use std::sync::Arc;

use crate::chart::{ChartManifold, Field};
use crate::error::{Error, Result};
use crate::structure::{validate, StructuredPoint};
use crate::tensor::{Bilinear, Covector, Endomorphism};

use super::expr::Expr;

/// How a chart manifold is described.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldSpec {
    /// `g = e^{2u} I` on `R^{2n}` with `P = diag(I_n, -I_n)`.
    ConformalProduct { n: usize, u: Expr },
    /// Metric entries as expressions, constant structure matrix.
    Explicit {
        n: usize,
        g: Vec<Vec<Expr>>,
        p: Vec<Vec<f64>>,
    },
}

impl FieldSpec {
    pub fn n(&self) -> usize {
        match self {
            FieldSpec::ConformalProduct { n, .. } | FieldSpec::Explicit { n, .. } => *n,
        }
    }

    fn check(&self) -> Result<()> {
        let d = 2 * self.n();
        crate::tensor::check_dim(d)?;
        let check_vars = |e: &Expr, what: &str| {
            if e.max_var() > d {
                Err(Error::Field(format!(
                    "{what} uses x{} but the chart has only {d} coordinates",
                    e.max_var()
                )))
            } else {
                Ok(())
            }
        };
        match self {
            FieldSpec::ConformalProduct { u, .. } => check_vars(u, "u"),
            FieldSpec::Explicit { g, p, .. } => {
                if g.len() != d || g.iter().any(|r| r.len() != d) {
                    return Err(Error::Field(format!("g must be a {d}x{d} matrix")));
                }
                if p.len() != d || p.iter().any(|r| r.len() != d) {
                    return Err(Error::Field(format!("P must be a {d}x{d} matrix")));
                }
                for i in 0..d {
                    for j in 0..d {
                        check_vars(&g[i][j], &format!("g[{i}][{j}]"))?;
                        if j > i && g[i][j] != g[j][i] {
                            return Err(Error::Field(format!(
                                "g is not symmetric as written: g[{i}][{j}] = {} but g[{j}][{i}] = {}",
                                g[i][j], g[j][i]
                            )));
                        }
                    }
                }
                if p.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::Field("P entries must be finite".into()));
                }
                Ok(())
            }
        }
    }
}

/// Builds the chart and checks the structure axioms at every sample point.
pub fn build_manifold(fs: &FieldSpec, samples: &[Vec<f64>]) -> Result<ChartManifold> {
    fs.check()?;
    let m = match fs {
        FieldSpec::ConformalProduct { n, u } => {
            let u = u.clone();
            ChartManifold::conformal_product(*n, move |x| Ok(u.eval(x)?))?
        }
        FieldSpec::Explicit { n, g, p } => {
            let d = 2 * n;
            let g = g.clone();
            let metric: Field<Bilinear> = Arc::new(move |x: &[f64]| {
                let mut out = Bilinear::zeros(d);
                for i in 0..d {
                    for j in 0..d {
                        out[[i, j]] = g[i][j].eval(x)?;
                    }
                }
                Ok(out)
            });
            let p = Endomorphism::from_rows(p)?;
            ChartManifold::new(*n, metric, Arc::new(move |_: &[f64]| Ok(p.clone())))?
        }
    };
    for u in samples {
        let pt = StructuredPoint::new(
            m.n(),
            m.metric_at(u)?,
            m.structure_at(u)?,
            Covector::zeros(m.dim()),
        )?;
        let violations = validate(&pt);
        if !violations.is_empty() {
            return Err(Error::InvalidStructure(violations));
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn samples() -> Vec<Vec<f64>> {
        vec![vec![0.1, -0.2, 0.3, 0.05], vec![-0.3, 0.2, 0.0, 0.4]]
    }

    #[test]
    fn conformal_fixture_builds() {
        let fs = FieldSpec::ConformalProduct {
            n: 2,
            u: parse("x1*x3").unwrap(),
        };
        let m = build_manifold(&fs, &samples()).unwrap();
        assert!(m.w1_residual(&samples()[0]).unwrap() < 1e-6);
        let flat = FieldSpec::ConformalProduct {
            n: 2,
            u: parse("0").unwrap(),
        };
        let m = build_manifold(&flat, &samples()).unwrap();
        assert_eq!(m.point_of(&samples()[1]).unwrap().theta.max_abs(), 0.0);
    }

    fn explicit(g: [[&str; 2]; 2], p: [[f64; 2]; 2]) -> FieldSpec {
        FieldSpec::Explicit {
            n: 1,
            g: g.iter()
                .map(|r| r.iter().map(|s| parse(s).unwrap()).collect())
                .collect(),
            p: p.iter().map(|r| r.to_vec()).collect(),
        }
    }

    #[test]
    fn explicit_checks() {
        let pts = vec![vec![0.1, 0.2]];
        let ok = explicit(
            [["exp(x1)", "0"], ["0", "exp(x1)"]],
            [[1.0, 0.0], [0.0, -1.0]],
        );
        assert!(build_manifold(&ok, &pts).is_ok());
        let asym = explicit([["1", "x1"], ["0", "1"]], [[1.0, 0.0], [0.0, -1.0]]);
        assert!(matches!(build_manifold(&asym, &pts), Err(Error::Field(_))));
        let trace = explicit([["1", "0"], ["0", "1"]], [[1.0, 0.0], [0.0, 1.0]]);
        assert!(matches!(
            build_manifold(&trace, &pts),
            Err(Error::InvalidStructure(_))
        ));
        let out_of_range = FieldSpec::ConformalProduct {
            n: 1,
            u: parse("x3").unwrap(),
        };
        assert!(matches!(
            build_manifold(&out_of_range, &pts),
            Err(Error::Field(_))
        ));
    }
}
