use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::report::{to_json, Check, Report, Summary, Tolerances, SCHEMA_VERSION};
use super::spec_file::{seed_from_env, LoadedSpec};
use super::{Identity, EXIT_INPUT, EXIT_OK, EXIT_VIOLATION};
use crate::chart::{ChartManifold, Connection};
use crate::classify::{
    case_of, classify_connection, closedness_condition_residuals, p_tensor_condition_residuals,
    parallel_torsion_constraints, prediction_agrees, ClassificationVerdict, ClosednessEvidence,
    Expectation,
};
use crate::connection::{discriminant, ConnectionParams};
use crate::error::{Error, Result};
use crate::identities::{
    torsion_parallel_residual, uv_tensors, verify_decomposition, verify_nabla_q,
    verify_ricci_scalar, verify_theta_derivatives, verify_torsion_curvature, Ingredients,
};
use crate::structure::{
    build_f, class_flags_with_f, curvature_residual, validate as validate_structure, ClassFlags,
    CurvatureResidual, StructuredPoint, Violation,
};
use crate::tensor::Covector;

/// Cells this close to the conic `Δ = 0` are reported but not judged.
pub const CONIC_BAND: f64 = 1e-9;

pub struct Outcome {
    pub stdout: String,
    pub stderr: Vec<String>,
    pub code: i32,
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidStructure(_)
        | Error::NotW1 { .. }
        | Error::NotSymmetric { .. }
        | Error::NotPositiveDefinite
        | Error::InverseInaccurate { .. } => EXIT_VIOLATION,
        _ => EXIT_INPUT,
    }
}

fn load(spec: &Path) -> Result<LoadedSpec> {
    LoadedSpec::from_file(spec, seed_from_env()?)
}

fn envelope<T: Serialize>(
    command: &'static str,
    spec: &LoadedSpec,
    tolerances: Tolerances,
    body: T,
    failures: Vec<String>,
) -> Report<T> {
    Report {
        schema_version: SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        spec: spec.file.clone(),
        seed: spec.seed,
        fd_step: spec.manifold.fd_step(),
        points: spec.points.clone(),
        tolerances,
        body,
        summary: Summary::from_failures(failures),
    }
}

/// Worst exit code among per-point errors, and their messages.
fn collect_errors<'a>(errors: impl IntoIterator<Item = (usize, &'a Error)>) -> (i32, Vec<String>) {
    let mut code = EXIT_OK;
    let mut msgs = Vec::new();
    for (i, e) in errors {
        code = code.max(exit_code_for(e));
        msgs.push(format!("point {i}: {e}"));
    }
    (code, msgs)
}

fn finish<T: Serialize>(report: Report<T>, code: i32) -> Outcome {
    let code = if code == EXIT_OK && !report.summary.passed {
        EXIT_VIOLATION
    } else {
        code
    };
    Outcome {
        stdout: to_json(&report) + "\n",
        stderr: report.summary.failures.clone(),
        code,
    }
}

#[derive(Serialize)]
struct ValidateRecord {
    index: usize,
    u: Vec<f64>,
    violations: Vec<Violation>,
    w1: Option<Check>,
    theta: Option<Vec<f64>>,
    class_flags: Option<ClassFlags>,
    error: Option<String>,
}

#[derive(Serialize)]
struct ValidateBody {
    records: Vec<ValidateRecord>,
}

fn validate_point(
    m: &ChartManifold,
    index: usize,
    u: &[f64],
    tol: Tolerances,
) -> (ValidateRecord, Option<Error>) {
    let mut rec = ValidateRecord {
        index,
        u: u.to_vec(),
        violations: Vec::new(),
        w1: None,
        theta: None,
        class_flags: None,
        error: None,
    };
    let result = (|| -> Result<()> {
        let bare = StructuredPoint::new(
            m.n(),
            m.metric_at(u)?,
            m.structure_at(u)?,
            Covector::zeros(m.dim()),
        )?;
        rec.violations = validate_structure(&bare);
        if !rec.violations.is_empty() {
            return Ok(());
        }
        let local = m.local(u)?;
        let pt = bare.with_theta(local.theta.clone());
        let residual = local.f.max_abs_diff(&build_f(&pt));
        rec.w1 = Some(Check::judged("w1_residual", residual, tol.structure));
        rec.theta = Some(local.theta.as_slice().to_vec());
        rec.class_flags = Some(class_flags_with_f(&pt, &local.f, tol.structure)?);
        Ok(())
    })();
    match result {
        Ok(()) => (rec, None),
        Err(e) => {
            rec.error = Some(e.to_string());
            (rec, Some(e))
        }
    }
}

pub fn validate(spec: &Path, tol: Tolerances) -> Result<Outcome> {
    let spec = load(spec)?;
    let m = &spec.manifold;
    let results: Vec<_> = spec
        .points
        .par_iter()
        .enumerate()
        .map(|(i, u)| validate_point(m, i, u, tol))
        .collect();
    let (code, mut failures) = collect_errors(
        results
            .iter()
            .filter_map(|(r, e)| e.as_ref().map(|e| (r.index, e))),
    );
    for (rec, _) in &results {
        if !rec.violations.is_empty() {
            let msgs: Vec<_> = rec.violations.iter().map(|v| v.to_string()).collect();
            failures.push(format!("point {}: {}", rec.index, msgs.join("; ")));
        }
        if let Some(c) = rec.w1.as_ref().filter(|c| !c.passed) {
            failures.push(format!(
                "point {}: not a W1 point (residual {:.3e} > {:.1e})",
                rec.index, c.residual, tol.structure
            ));
        }
    }
    let body = ValidateBody {
        records: results.into_iter().map(|(r, _)| r).collect(),
    };
    Ok(finish(
        envelope("validate", &spec, tol, body, failures),
        code,
    ))
}

#[derive(Serialize)]
struct TorsionRecord {
    nabla_torsion: f64,
    nabla_theta_prime: f64,
    parallel: bool,
    /// Parallel torsion and parallel `θ` agree.
    consistent: bool,
}

#[derive(Serialize)]
struct ClassifyRecord {
    index: usize,
    u: Vec<f64>,
    closedness_theta: f64,
    closedness_theta_p: f64,
    curvature_prime: CurvatureResidual,
    p_tensor_residual: f64,
    is_p_tensor: bool,
    p_tensor_condition: [f64; 2],
    closedness_condition: [f64; 2],
    class_flags: ClassFlags,
    torsion: TorsionRecord,
}

#[derive(Serialize)]
struct ClassifyBody {
    connection: ConnectionParams,
    discriminant: f64,
    records: Vec<ClassifyRecord>,
    errors: Vec<String>,
    evidence: Option<ClosednessEvidence>,
    verdict: Option<ClassificationVerdict>,
    numeric_p_tensor: Option<bool>,
    agrees: Option<bool>,
    parallel_torsion_violations: Vec<String>,
}

fn classify_point(
    m: &ChartManifold,
    index: usize,
    u: &[f64],
    cp: ConnectionParams,
    tol: Tolerances,
) -> Result<ClassifyRecord> {
    let ing = Ingredients::compute(m, u, cp)?;
    let (rt, rtp) = (
        ing.nabla_theta.asymmetry(),
        ing.nabla_theta.compose_right(&ing.pt.p).asymmetry(),
    );
    let cr = curvature_residual(&ing.curvature_prime.r, &ing.pt.p);
    let (u_t, v_t) = uv_tensors(&ing);
    let pc = p_tensor_condition_residuals(&u_t, &v_t, &ing.pt, cp);
    let cc = closedness_condition_residuals(&ing.nabla_theta, &ing.pt, cp);
    let f = m.f_tensor(u)?;
    let class_flags = class_flags_with_f(&ing.pt, &f, tol.structure)?;
    let (nt, nth) = torsion_parallel_residual(m, u, cp)?;
    Ok(ClassifyRecord {
        index,
        u: u.to_vec(),
        closedness_theta: rt,
        closedness_theta_p: rtp,
        curvature_prime: cr,
        p_tensor_residual: cr.p_tensor(),
        is_p_tensor: cr.p_tensor() <= tol.curvature,
        p_tensor_condition: [pc.0, pc.1],
        closedness_condition: [cc.0, cc.1],
        class_flags,
        torsion: TorsionRecord {
            nabla_torsion: nt,
            nabla_theta_prime: nth,
            parallel: nt <= tol.derivative,
            consistent: (nt <= tol.derivative) == (nth <= tol.derivative),
        },
    })
}

pub fn classify(
    spec: &Path,
    tol: Tolerances,
    connection: impl Fn(usize) -> ConnectionParams,
) -> Result<Outcome> {
    let spec = load(spec)?;
    let n = spec.file.n;
    let cp = connection(n);
    let m = &spec.manifold;
    let results: Vec<Result<ClassifyRecord>> = spec
        .points
        .par_iter()
        .enumerate()
        .map(|(i, u)| classify_point(m, i, u, cp, tol))
        .collect();
    let (code, mut failures) = collect_errors(
        results
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.as_ref().err().map(|e| (i, e))),
    );
    let errors = failures.clone();
    let records: Vec<ClassifyRecord> = results.into_iter().filter_map(|r| r.ok()).collect();
    let mut body = ClassifyBody {
        connection: cp,
        discriminant: discriminant(cp, n),
        records,
        errors,
        evidence: None,
        verdict: None,
        numeric_p_tensor: None,
        agrees: None,
        parallel_torsion_violations: Vec::new(),
    };
    if code == EXIT_OK {
        let recs = &body.records;
        let ev = ClosednessEvidence::aggregate(
            recs.iter()
                .map(|r| (r.closedness_theta, r.closedness_theta_p)),
            tol.structure,
        );
        let verdict = classify_connection(cp, n, &ev);
        let numeric = recs.iter().all(|r| r.is_p_tensor);
        let pure = recs.iter().all(|r| r.class_flags.pure_parity());
        let agrees = prediction_agrees(&verdict, &ev, pure, numeric);
        if !agrees {
            failures.push(format!(
                "prediction {} (clause {:?}) disagrees with numerics (P-tensor: {numeric})",
                verdict.p_tensor_expected, verdict.clause
            ));
        }
        for r in recs.iter().filter(|r| !r.torsion.consistent) {
            failures.push(format!(
                "point {}: parallel torsion and parallel θ disagree (|∇'T| = {:.3e}, |∇'θ| = {:.3e})",
                r.index, r.torsion.nabla_torsion, r.torsion.nabla_theta_prime
            ));
        }
        if recs.iter().all(|r| r.torsion.parallel) {
            let flags = recs[0].class_flags;
            body.parallel_torsion_violations = parallel_torsion_constraints(&ev, &flags, true);
            failures.extend(body.parallel_torsion_violations.iter().cloned());
        }
        body.evidence = Some(ev);
        body.verdict = Some(verdict);
        body.numeric_p_tensor = Some(numeric);
        body.agrees = Some(agrees);
    }
    Ok(finish(
        envelope("classify", &spec, tol, body, failures),
        code,
    ))
}

#[derive(Serialize)]
struct VerifyRecord {
    index: usize,
    u: Vec<f64>,
    checks: Vec<Check>,
    error: Option<String>,
}

#[derive(Serialize)]
struct VerifyBody {
    identity: String,
    connection: ConnectionParams,
    records: Vec<VerifyRecord>,
}

fn verify_point(
    m: &ChartManifold,
    u: &[f64],
    identity: Identity,
    cp: ConnectionParams,
    tol: Tolerances,
) -> Result<Vec<Check>> {
    let checks = match identity {
        Identity::Naturality => {
            let (ng, np) = m.naturality_residuals(u, Connection::Natural(cp))?;
            vec![
                Check::judged("nabla_prime_g", ng, tol.derivative),
                Check::judged("nabla_prime_p", np, tol.derivative),
            ]
        }
        _ => {
            let ing = Ingredients::compute(m, u, cp)?;
            match identity {
                Identity::TorsionCurvature => vec![Check::judged(
                    "torsion_curvature",
                    verify_torsion_curvature(&ing),
                    tol.curvature,
                )],
                Identity::NablaQ => {
                    vec![Check::judged(
                        "nabla_q",
                        verify_nabla_q(&ing),
                        tol.derivative,
                    )]
                }
                Identity::Decomposition => vec![Check::judged(
                    "decomposition",
                    verify_decomposition(&ing),
                    tol.curvature,
                )],
                Identity::RicciScalar => {
                    let r = verify_ricci_scalar(&ing);
                    vec![
                        Check::judged("ricci_contraction", r.ricci, tol.ricci()),
                        Check::judged("ricci_formula", r.ricci_formula, tol.ricci()),
                        Check::judged("scalar_formula", r.tau, tol.ricci()),
                        Check::info("scalar_formula_alternate", r.tau_alternate),
                    ]
                }
                Identity::ThetaDerivatives => vec![Check::judged(
                    "theta_derivatives",
                    verify_theta_derivatives(&ing),
                    tol.derivative,
                )],
                Identity::Naturality => unreachable!("handled above"),
            }
        }
    };
    Ok(checks)
}

pub fn verify(
    spec: &Path,
    tol: Tolerances,
    identity: Identity,
    connection: impl Fn(usize) -> ConnectionParams,
) -> Result<Outcome> {
    use clap::ValueEnum;
    let spec = load(spec)?;
    let cp = connection(spec.file.n);
    let m = &spec.manifold;
    let results: Vec<Result<Vec<Check>>> = spec
        .points
        .par_iter()
        .map(|u| verify_point(m, u, identity, cp, tol))
        .collect();
    let (code, mut failures) = collect_errors(
        results
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.as_ref().err().map(|e| (i, e))),
    );
    let records: Vec<VerifyRecord> = results
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let u = spec.points[i].clone();
            match r {
                Ok(checks) => VerifyRecord {
                    index: i,
                    u,
                    checks,
                    error: None,
                },
                Err(e) => VerifyRecord {
                    index: i,
                    u,
                    checks: Vec::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    for rec in &records {
        for c in rec.checks.iter().filter(|c| !c.passed) {
            failures.push(format!(
                "point {}: {} residual {:.3e} exceeds {:.1e}",
                rec.index,
                c.name,
                c.residual,
                c.tolerance.unwrap_or(f64::NAN)
            ));
        }
    }
    let name = identity
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    let body = VerifyBody {
        identity: name,
        connection: cp,
        records,
    };
    Ok(finish(envelope("verify", &spec, tol, body, failures), code))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Grid {
    pub lambda: (f64, f64),
    pub mu: (f64, f64),
    pub steps: usize,
}

impl Grid {
    fn axis(range: (f64, f64), steps: usize) -> Vec<f64> {
        if steps == 1 {
            return vec![range.0];
        }
        (0..steps)
            .map(|i| range.0 + (range.1 - range.0) * i as f64 / (steps - 1) as f64)
            .collect()
    }

    fn cells(&self) -> Vec<ConnectionParams> {
        let mus = Self::axis(self.mu, self.steps);
        Self::axis(self.lambda, self.steps)
            .into_iter()
            .flat_map(|l| mus.iter().map(move |&m| ConnectionParams::new(l, m)))
            .collect()
    }

    fn check(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Field("--steps must be at least 1".into()));
        }
        if self.lambda.0 > self.lambda.1 || self.mu.0 > self.mu.1 {
            return Err(Error::Field("empty parameter range (A > B)".into()));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct Row {
    lambda: f64,
    mu: f64,
    delta: f64,
    case: String,
    p_tensor_residual: f64,
    expected: String,
}

#[derive(Serialize)]
struct Mismatch {
    lambda: f64,
    mu: f64,
    expected: Expectation,
    p_tensor_residual: f64,
}

#[derive(Serialize)]
struct SweepBody {
    grid: Grid,
    evidence: ClosednessEvidence,
    cells: usize,
    judged: usize,
    on_conic: Vec<[f64; 2]>,
    mismatches: Vec<Mismatch>,
}

pub fn sweep(spec: &Path, tol: Tolerances, grid: Grid, summary: Option<&Path>) -> Result<Outcome> {
    grid.check()?;
    let spec = load(spec)?;
    let n = spec.file.n;
    let m = &spec.manifold;
    let structure: Vec<_> = spec
        .points
        .par_iter()
        .map(|u| -> Result<_> {
            m.point_of(u)?;
            Ok((m.closedness_residuals(u)?, m.structure_at(u)?))
        })
        .collect::<Result<_>>()?;
    let ev = ClosednessEvidence::aggregate(structure.iter().map(|(r, _)| *r), tol.structure);
    let cells = grid.cells();
    let residuals: Vec<f64> = cells
        .par_iter()
        .map(|&cp| -> Result<f64> {
            let mut worst = 0.0f64;
            for (u, (_, p)) in spec.points.iter().zip(&structure) {
                let r = m.curvature(u, Connection::Natural(cp))?.r;
                worst = worst.max(curvature_residual(&r, p).p_tensor());
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(cells.len());
    let mut on_conic = Vec::new();
    let mut mismatches = Vec::new();
    let mut judged = 0;
    for (cp, &res) in cells.iter().zip(&residuals) {
        let delta = discriminant(*cp, n);
        let verdict = classify_connection(*cp, n, &ev);
        let expected = verdict.p_tensor_expected;
        if delta.abs() <= CONIC_BAND {
            on_conic.push([cp.lambda, cp.mu]);
        } else {
            judged += 1;
            let numeric = res <= tol.curvature;
            let agrees = match expected {
                Expectation::Yes => numeric,
                Expectation::No => !numeric,
                Expectation::Conditional => true,
            };
            if !agrees {
                mismatches.push(Mismatch {
                    lambda: cp.lambda,
                    mu: cp.mu,
                    expected,
                    p_tensor_residual: res,
                });
            }
        }
        rows.push(Row {
            lambda: cp.lambda,
            mu: cp.mu,
            delta,
            case: case_of(*cp, n).to_string(),
            p_tensor_residual: res,
            expected: expected.to_string(),
        });
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        w.serialize(row)
            .map_err(|e| Error::Field(format!("csv output: {e}")))?;
    }
    let csv_bytes = w
        .into_inner()
        .map_err(|e| Error::Field(format!("csv output: {e}")))?;
    let failures: Vec<String> = mismatches
        .iter()
        .map(|m| {
            format!(
                "(λ={}, μ={}): expected {} but P-tensor residual is {:.3e}",
                m.lambda, m.mu, m.expected, m.p_tensor_residual
            )
        })
        .collect();
    let body = SweepBody {
        grid,
        evidence: ev,
        cells: cells.len(),
        judged,
        on_conic,
        mismatches,
    };
    let report = envelope("sweep", &spec, tol, body, failures.clone());
    if let Some(path) = summary {
        std::fs::write(path, to_json(&report) + "\n")
            .map_err(|e| Error::Field(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(Outcome {
        stdout: String::from_utf8(csv_bytes).expect("csv output is utf-8"),
        stderr: failures,
        code: if report.summary.passed {
            EXIT_OK
        } else {
            EXIT_VIOLATION
        },
    })
}
