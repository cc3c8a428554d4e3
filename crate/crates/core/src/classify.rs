//! Decision procedures: when the curvature of a natural connection is a
//! Riemannian P-tensor, and which connections can have parallel torsion.

use std::fmt;

use serde::Serialize;

use crate::connection::{discriminant, w_bilinear, ConnectionParams, PARAM_TOL};
use crate::structure::{ClassFlags, StructuredPoint};
use crate::tensor::Bilinear;

/// Closedness of `θ` and `θ∘P`, aggregated over sampled points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosednessEvidence {
    pub theta_closed: bool,
    pub theta_p_closed: bool,
    /// Largest antisymmetry of `∇θ` seen.
    pub residual_theta: f64,
    /// Largest antisymmetry of `(∇θ)(·, P·)` seen.
    pub residual_theta_p: f64,
    pub tolerance: f64,
}

impl ClosednessEvidence {
    pub fn from_residuals(residual_theta: f64, residual_theta_p: f64, tolerance: f64) -> Self {
        Self {
            theta_closed: residual_theta <= tolerance,
            theta_p_closed: residual_theta_p <= tolerance,
            residual_theta,
            residual_theta_p,
            tolerance,
        }
    }

    /// A form counts as closed only if it is closed at every point.
    pub fn aggregate(points: impl IntoIterator<Item = (f64, f64)>, tolerance: f64) -> Self {
        let (rt, rtp) = points
            .into_iter()
            .fold((0.0f64, 0.0f64), |(a, b), (x, y)| (a.max(x), b.max(y)));
        Self::from_residuals(rt, rtp, tolerance)
    }

    /// Evidence with the given flags, as for a hand-specified scenario.
    pub fn synthetic(theta_closed: bool, theta_p_closed: bool) -> Self {
        let r = |closed| if closed { 0.0 } else { 1.0 };
        Self::from_residuals(r(theta_closed), r(theta_p_closed), 1e-6)
    }
}

/// Region of the parameter plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CaseId {
    /// `λ = μ = 0`.
    #[serde(rename = "I_a")]
    Ia,
    /// `λ = 0, μ = -1/2n`.
    #[serde(rename = "I_b")]
    Ib,
    /// `λ ≠ 0` on the conic `Δ = 0`.
    #[serde(rename = "I_c")]
    Ic,
    /// `Δ ≠ 0`.
    #[serde(rename = "II")]
    II,
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseId::Ia => "I_a",
            CaseId::Ib => "I_b",
            CaseId::Ic => "I_c",
            CaseId::II => "II",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Yes,
    No,
    Conditional,
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Expectation::Yes => "yes",
            Expectation::No => "no",
            Expectation::Conditional => "conditional",
        })
    }
}

/// The four regimes of the P-tensor classification: `D`, `D~`, generic `Δ ≠ 0`, and the conic `Δ = 0, λ ≠ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Clause {
    I,
    Ii,
    Iii,
    Iv,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationVerdict {
    pub case_id: CaseId,
    pub p_tensor_expected: Expectation,
    pub clause: Clause,
    /// For the conditional clause: what must hold if `R'` turns out to be a P-tensor.
    pub necessary_conditions: Vec<String>,
    pub notes: Vec<String>,
}

pub fn case_of(cp: ConnectionParams, n: usize) -> CaseId {
    let c = 1.0 / (2 * n) as f64;
    let zero = |x: f64| x.abs() <= PARAM_TOL;
    if zero(cp.lambda) && zero(cp.mu) {
        CaseId::Ia
    } else if zero(cp.lambda) && zero(cp.mu + c) {
        CaseId::Ib
    } else if zero(discriminant(cp, n)) {
        CaseId::Ic
    } else {
        CaseId::II
    }
}

/// Predicts whether `R'` is a Riemannian P-tensor.
///
/// For `D` and `D~` the prediction follows the closedness conditions directly:
/// for `D` they reduce to `d(θ∘P) = 0`, for `D~` to `dθ = 0`. When both forms
/// are closed the conditions hold trivially and the prediction is `yes`; a note
/// records that the point is outside the "exactly one form closed" situation.
pub fn classify_connection(
    cp: ConnectionParams,
    n: usize,
    ev: &ClosednessEvidence,
) -> ClassificationVerdict {
    let case_id = case_of(cp, n);
    let yes_if = |b: bool| if b { Expectation::Yes } else { Expectation::No };
    let mut notes = Vec::new();
    let mut necessary_conditions = Vec::new();
    let both = ev.theta_closed && ev.theta_p_closed;
    let (clause, expected) = match case_id {
        CaseId::Ia => {
            if both {
                notes.push("both θ and θ∘P are closed: degenerate for D, P-tensor by the closedness conditions".into());
            }
            (Clause::I, yes_if(ev.theta_p_closed))
        }
        CaseId::Ib => {
            if both {
                notes.push("both θ and θ∘P are closed: degenerate for D~, P-tensor by the closedness conditions".into());
            }
            (Clause::Ii, yes_if(ev.theta_closed))
        }
        CaseId::II => (Clause::Iii, yes_if(both)),
        CaseId::Ic => {
            necessary_conditions.push("θ is not closed".into());
            necessary_conditions.push("θ∘P is not closed".into());
            necessary_conditions.push("the manifold is neither W3-bar nor W6-bar".into());
            (Clause::Iv, Expectation::Conditional)
        }
    };
    ClassificationVerdict {
        case_id,
        p_tensor_expected: expected,
        clause,
        necessary_conditions,
        notes,
    }
}

/// For the conditional clause: whether an observed P-tensor is compatible with the
/// necessary conditions. A non-P-tensor is always compatible.
pub fn conditional_consistent(ev: &ClosednessEvidence, pure_parity: bool, p_tensor: bool) -> bool {
    !p_tensor || (!ev.theta_closed && !ev.theta_p_closed && !pure_parity)
}

/// Whether a numerical P-tensor verdict agrees with the prediction.
pub fn prediction_agrees(
    verdict: &ClassificationVerdict,
    ev: &ClosednessEvidence,
    pure_parity: bool,
    p_tensor: bool,
) -> bool {
    match verdict.p_tensor_expected {
        Expectation::Yes => p_tensor,
        Expectation::No => !p_tensor,
        Expectation::Conditional => conditional_consistent(ev, pure_parity, p_tensor),
    }
}

/// Residuals of `U(y,z) - U(z,y) + (λ/2n)W(y,z) = 0` and `V(y,z) - V(z,y) + (μ/2n)W(y,z) = 0`.
/// Both vanish exactly when `R'` is a Riemannian P-tensor.
pub fn p_tensor_condition_residuals(
    u: &Bilinear,
    v: &Bilinear,
    pt: &StructuredPoint,
    cp: ConnectionParams,
) -> (f64, f64) {
    let w = w_bilinear(pt);
    let c = pt.inv_2n();
    let r1 = (&u.skew() + &w.scale(c * cp.lambda)).max_abs();
    let r2 = (&v.skew() + &w.scale(c * cp.mu)).max_abs();
    (r1, r2)
}

/// Residuals of the same condition written with the Levi-Civita derivative:
/// `λ{(∇_yθ)z - (∇_zθ)y} + (μ + 1/2n){(∇_yθ)Pz - (∇_zθ)Py} = 0` and
/// `μ{(∇_yθ)z - (∇_zθ)y} + λ{(∇_yθ)Pz - (∇_zθ)Py} = 0`.
pub fn closedness_condition_residuals(
    nabla_theta: &Bilinear,
    pt: &StructuredPoint,
    cp: ConnectionParams,
) -> (f64, f64) {
    let x1 = nabla_theta.skew();
    let x2 = nabla_theta.compose_right(&pt.p).skew();
    let c = pt.inv_2n();
    let r1 = (&x1.scale(cp.lambda) + &x2.scale(cp.mu + c)).max_abs();
    let r2 = (&x1.scale(cp.mu) + &x2.scale(cp.lambda)).max_abs();
    (r1, r2)
}

/// Constraints forced by parallel torsion: `θ∘P` closed, and `θ` closed too on W3-bar / W6-bar.
pub fn parallel_torsion_constraints(
    ev: &ClosednessEvidence,
    flags: &ClassFlags,
    torsion_parallel: bool,
) -> Vec<String> {
    let mut out = Vec::new();
    if !torsion_parallel {
        return out;
    }
    if !ev.theta_p_closed {
        out.push(format!(
            "parallel torsion requires θ∘P closed (residual {:.3e})",
            ev.residual_theta_p
        ));
    }
    if flags.pure_parity() && !ev.theta_closed {
        out.push(format!(
            "parallel torsion on W3-bar/W6-bar requires θ closed (residual {:.3e})",
            ev.residual_theta
        ));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TorsionCase {
    I,
    Ii,
    Iii,
    Iv,
    Inconsistent,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorsionVerdict {
    pub case_id: TorsionCase,
    /// Class membership implied by the case.
    pub requires: String,
    /// Whether the supplied `W` and class flags meet the requirement.
    pub satisfied: bool,
}

/// Case analysis for a natural connection with parallel torsion whose curvature
/// is a Riemannian P-tensor (the caller asserts both).
pub fn classify_parallel_torsion(
    cp: ConnectionParams,
    w: &Bilinear,
    flags: &ClassFlags,
    tol: f64,
) -> TorsionVerdict {
    let zero = |x: f64| x.abs() <= PARAM_TOL;
    let w_zero = w.max_abs() <= tol;
    let pure = flags.pure_parity();
    let (case_id, requires, satisfied) = match (zero(cp.lambda), zero(cp.mu)) {
        (true, true) if !w_zero => (
            TorsionCase::I,
            "W ≠ 0; the manifold is neither W3-bar nor W6-bar",
            !pure,
        ),
        (true, true) => (TorsionCase::Ii, "W = 0; the manifold is W3-bar or W6-bar", pure),
        (true, false) => (
            TorsionCase::Iii,
            "W = 0 and θ∘P = ±θ (W3-bar or W6-bar)",
            w_zero && pure,
        ),
        (false, true) => (
            TorsionCase::Iv,
            "W = 0 and θ∘P = ±θ (W3-bar or W6-bar)",
            w_zero && pure,
        ),
        (false, false) => (
            TorsionCase::Inconsistent,
            "no natural connection with λ ≠ 0 and μ ≠ 0 has parallel torsion and P-tensor curvature",
            false,
        ),
    };
    TorsionVerdict {
        case_id,
        requires: requires.into(),
        satisfied,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::NamedConnection;
    use crate::structure::Parity;

    fn flags(parity: Parity) -> ClassFlags {
        ClassFlags {
            is_w0: parity == Parity::Zero,
            in_w3bar: parity == Parity::Odd,
            in_w6bar: parity == Parity::Even,
            theta_parity: parity,
            odd_defect: 0.0,
            even_defect: 0.0,
            shape_residual: 0.0,
        }
    }

    fn mu_on_conic(l: f64, n: usize) -> f64 {
        // μ² + μ/2n - λ² = 0
        let c = 1.0 / (2 * n) as f64;
        (-c + (c * c + 4.0 * l * l).sqrt()) / 2.0
    }

    #[test]
    fn clause_examples() {
        let ev = ClosednessEvidence::synthetic(false, true);
        let v = classify_connection(NamedConnection::D.params(2), 2, &ev);
        assert_eq!(
            (v.clause, v.p_tensor_expected),
            (Clause::I, Expectation::Yes)
        );
        let both = ClosednessEvidence::synthetic(true, true);
        let v = classify_connection(NamedConnection::Canonical.params(2), 2, &both);
        assert_eq!(
            (v.clause, v.p_tensor_expected),
            (Clause::Iii, Expectation::Yes)
        );
        let v = classify_connection(NamedConnection::Canonical.params(2), 2, &ev);
        assert_eq!(v.p_tensor_expected, Expectation::No);
        let mu = mu_on_conic(0.3, 2);
        let v = classify_connection(ConnectionParams::new(0.3, mu), 2, &ev);
        assert_eq!((v.case_id, v.clause), (CaseId::Ic, Clause::Iv));
        assert_eq!(v.p_tensor_expected, Expectation::Conditional);
        assert_eq!(v.necessary_conditions.len(), 3);
    }

    #[test]
    fn d_tilde_clause() {
        let dt = NamedConnection::DTilde.params(3);
        let v = classify_connection(dt, 3, &ClosednessEvidence::synthetic(true, false));
        assert_eq!((v.case_id, v.clause), (CaseId::Ib, Clause::Ii));
        assert_eq!(v.p_tensor_expected, Expectation::Yes);
        let v = classify_connection(dt, 3, &ClosednessEvidence::synthetic(false, true));
        assert_eq!(v.p_tensor_expected, Expectation::No);
        let v = classify_connection(dt, 3, &ClosednessEvidence::synthetic(true, true));
        assert_eq!(v.p_tensor_expected, Expectation::Yes);
        assert!(!v.notes.is_empty());
    }

    #[test]
    fn conditional_direction() {
        let open = ClosednessEvidence::synthetic(false, false);
        assert!(conditional_consistent(&open, false, true));
        assert!(!conditional_consistent(&open, true, true));
        let closed = ClosednessEvidence::synthetic(true, false);
        assert!(!conditional_consistent(&closed, false, true));
        assert!(conditional_consistent(&closed, true, false));
    }

    #[test]
    fn parallel_torsion_constraints_examples() {
        let ev = ClosednessEvidence::synthetic(false, false);
        assert!(parallel_torsion_constraints(&ev, &flags(Parity::Mixed), false).is_empty());
        let ev = ClosednessEvidence::synthetic(false, true);
        assert!(parallel_torsion_constraints(&ev, &flags(Parity::Mixed), true).is_empty());
        assert_eq!(
            parallel_torsion_constraints(&ev, &flags(Parity::Odd), true).len(),
            1
        );
        let ev = ClosednessEvidence::synthetic(true, false);
        assert_eq!(
            parallel_torsion_constraints(&ev, &flags(Parity::Even), true).len(),
            1
        );
    }

    #[test]
    fn torsion_table() {
        let mut w = Bilinear::zeros(2);
        w[[0, 1]] = 2.0;
        w[[1, 0]] = -2.0;
        let zero = Bilinear::zeros(2);
        let t = classify_parallel_torsion(
            ConnectionParams::new(0.0, 0.0),
            &w,
            &flags(Parity::Mixed),
            1e-9,
        );
        assert_eq!(t.case_id, TorsionCase::I);
        assert!(t.satisfied);
        let t = classify_parallel_torsion(
            ConnectionParams::new(0.0, 0.0),
            &zero,
            &flags(Parity::Odd),
            1e-9,
        );
        assert_eq!(t.case_id, TorsionCase::Ii);
        let t = classify_parallel_torsion(
            ConnectionParams::new(0.0, 0.7),
            &zero,
            &flags(Parity::Even),
            1e-9,
        );
        assert_eq!(t.case_id, TorsionCase::Iii);
        assert!(t.satisfied);
        let t = classify_parallel_torsion(
            ConnectionParams::new(0.2, 0.0),
            &w,
            &flags(Parity::Mixed),
            1e-9,
        );
        assert_eq!(t.case_id, TorsionCase::Iv);
        assert!(!t.satisfied);
        let t = classify_parallel_torsion(
            ConnectionParams::new(0.5, 0.5),
            &zero,
            &flags(Parity::Even),
            1e-9,
        );
        assert_eq!(t.case_id, TorsionCase::Inconsistent);
    }
}
