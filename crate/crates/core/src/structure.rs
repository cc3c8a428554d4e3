//! Pointwise almost product structure `(g, P, theta)` on a single tangent space.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensor::{metric_inverse, Bilinear, Covector, Endomorphism, Tensor3, Tensor4};

/// Componentwise tolerance for exactly specified structures.
pub const CATALOG_TOL: f64 = 1e-10;
/// Default tolerance for data carrying finite-difference noise.
pub const CHART_TOL: f64 = 1e-6;
/// Default tolerance of the curvature-like and P-tensor predicates.
pub const CURVATURE_TOL: f64 = 1e-8;

/// A point of a Riemannian almost product manifold of dimension `2n`,
/// together with the associated 1-form `theta` of the W1 class.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuredPoint {
    pub n: usize,
    pub g: Bilinear,
    pub p: Endomorphism,
    pub theta: Covector,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DimensionMismatch { expected: usize, found: usize },
    NotInvolution { residual: f64 },
    NotCompatible { residual: f64 },
    NotTraceless { trace: f64 },
    MetricNotSymmetric { asymmetry: f64 },
    MetricNotPositiveDefinite,
    FNotSymmetric { residual: f64 },
    FNotAntiInvariant { residual: f64 },
    FNotSkewInP { residual: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch (expected {expected}, found {found})")
            }
            Violation::NotInvolution { residual } => write!(f, "P^2 ≠ I (residual {residual:.3e})"),
            Violation::NotCompatible { residual } => {
                write!(f, "g(Px,Py) ≠ g(x,y) (residual {residual:.3e})")
            }
            Violation::NotTraceless { trace } => write!(f, "trace(P) ≠ 0 (trace = {trace})"),
            Violation::MetricNotSymmetric { asymmetry } => {
                write!(f, "g not symmetric (asymmetry {asymmetry:.3e})")
            }
            Violation::MetricNotPositiveDefinite => write!(f, "g not positive definite"),
            Violation::FNotSymmetric { residual } => {
                write!(f, "F(x,y,z) ≠ F(x,z,y) (residual {residual:.3e})")
            }
            Violation::FNotAntiInvariant { residual } => {
                write!(f, "F(x,y,z) ≠ -F(x,Py,Pz) (residual {residual:.3e})")
            }
            Violation::FNotSkewInP { residual } => {
                write!(f, "F(x,y,Pz) ≠ -F(x,Py,z) (residual {residual:.3e})")
            }
        }
    }
}

impl StructuredPoint {
    /// Assembles a point; only shapes are checked here, see [`validate`].
    pub fn new(n: usize, g: Bilinear, p: Endomorphism, theta: Covector) -> Result<Self> {
        let d = 2 * n;
        crate::tensor::check_dim(d)?;
        for found in [g.dim(), p.dim(), theta.dim()] {
            if found != d {
                return Err(Error::DimensionMismatch { expected: d, found });
            }
        }
        Ok(Self { n, g, p, theta })
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// `1 / 2n`.
    pub fn inv_2n(&self) -> f64 {
        1.0 / (2 * self.n) as f64
    }

    pub fn g_inv(&self) -> Result<Bilinear> {
        metric_inverse(&self.g)
    }

    /// The 1-form `theta ∘ P`.
    pub fn theta_p(&self) -> Covector {
        self.theta.compose(&self.p)
    }

    /// Same point with a different 1-form.
    pub fn with_theta(&self, theta: Covector) -> Self {
        Self {
            theta,
            ..self.clone()
        }
    }
}

/// Lists every failed structure axiom at the catalog tolerance.
pub fn validate(pt: &StructuredPoint) -> Vec<Violation> {
    validate_with_tol(pt, CATALOG_TOL)
}

pub fn validate_with_tol(pt: &StructuredPoint, tol: f64) -> Vec<Violation> {
    let d = pt.dim();
    let mut out = Vec::new();
    for found in [pt.g.dim(), pt.p.dim(), pt.theta.dim()] {
        if found != d {
            out.push(Violation::DimensionMismatch { expected: d, found });
            return out;
        }
    }
    let p = &pt.p;
    let inv_res = p.compose(p).max_abs_diff(&Endomorphism::identity(d));
    if inv_res > tol {
        out.push(Violation::NotInvolution { residual: inv_res });
    }
    let scale = pt.g.max_abs().max(1.0);
    let compat = pt.g.pullback(p).max_abs_diff(&pt.g);
    if compat > tol * scale {
        out.push(Violation::NotCompatible { residual: compat });
    }
    let trace = p.trace();
    if trace.abs() > tol {
        out.push(Violation::NotTraceless { trace });
    }
    let asym = pt.g.asymmetry();
    if asym > tol * scale {
        out.push(Violation::MetricNotSymmetric { asymmetry: asym });
    } else if metric_inverse(&pt.g).is_err() {
        out.push(Violation::MetricNotPositiveDefinite);
    }
    out
}

/// The associated metric `g~(x, y) = g(x, P y)`.
pub fn associated_metric(pt: &StructuredPoint) -> Bilinear {
    pt.g.compose_right(&pt.p)
}

/// The fundamental tensor of a W1 point, determined by `theta`.
pub fn build_f(pt: &StructuredPoint) -> Tensor3 {
    let g = &pt.g;
    let gt = associated_metric(pt);
    let th = &pt.theta;
    let thp = pt.theta_p();
    let c = pt.inv_2n();
    Tensor3::from_fn(pt.dim(), |i, j, k| {
        c * (g[[i, j]] * th[[k]] - gt[[i, j]] * thp[[k]] + g[[i, k]] * th[[j]]
            - gt[[i, k]] * thp[[j]])
    })
}

/// Checks the algebraic identities every fundamental tensor satisfies.
pub fn check_f_properties(f: &Tensor3, p: &Endomorphism) -> Vec<Violation> {
    check_f_properties_tol(f, p, CATALOG_TOL)
}

pub fn check_f_properties_tol(f: &Tensor3, p: &Endomorphism, tol: f64) -> Vec<Violation> {
    let d = f.dim();
    if p.dim() != d {
        return vec![Violation::DimensionMismatch {
            expected: d,
            found: p.dim(),
        }];
    }
    // F(x, Py, z) and F(x, y, Pz)
    let f_py = Tensor3::from_fn(d, |i, j, k| (0..d).map(|a| p[[a, j]] * f[[i, a, k]]).sum());
    let f_pz = Tensor3::from_fn(d, |i, j, k| (0..d).map(|a| p[[a, k]] * f[[i, j, a]]).sum());
    let f_pypz = Tensor3::from_fn(d, |i, j, k| {
        (0..d).map(|a| p[[a, k]] * f_py[[i, j, a]]).sum()
    });

    let mut out = Vec::new();
    let sym = f.max_abs_diff(&f.permute([0, 2, 1]));
    if sym > tol {
        out.push(Violation::FNotSymmetric { residual: sym });
    }
    let anti = (f + &f_pypz).max_abs();
    if anti > tol {
        out.push(Violation::FNotAntiInvariant { residual: anti });
    }
    let skew = (&f_pz + &f_py).max_abs();
    if skew > tol {
        out.push(Violation::FNotSkewInP { residual: skew });
    }
    out
}

/// Splits `theta` into `(theta_v, theta_h)` with `theta_v ∘ P = -theta_v`, `theta_h ∘ P = theta_h`.
pub fn theta_parts(pt: &StructuredPoint) -> (Covector, Covector) {
    let thp = pt.theta_p();
    let v = (&pt.theta - &thp).scale(0.5);
    let h = (&pt.theta + &thp).scale(0.5);
    (v, h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    /// `theta` vanishes.
    Zero,
    /// `theta ∘ P = -theta`.
    Odd,
    /// `theta ∘ P = theta`.
    Even,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassFlags {
    pub is_w0: bool,
    pub in_w3bar: bool,
    pub in_w6bar: bool,
    pub theta_parity: Parity,
    /// `|theta ∘ P + theta| / |theta|`.
    pub odd_defect: f64,
    /// `|theta ∘ P - theta| / |theta|`.
    pub even_defect: f64,
    /// Residual of the F-shape condition of the matched subclass (0 when none matched).
    pub shape_residual: f64,
}

impl ClassFlags {
    pub fn pure_parity(&self) -> bool {
        self.in_w3bar || self.in_w6bar
    }
}

/// Residual of the W3-bar form of F, `(1/2n){[g(x,y)+g(x,Py)]θ(z) + [g(x,z)+g(x,Pz)]θ(y)}`.
pub fn w3bar_shape_residual(pt: &StructuredPoint, f: &Tensor3) -> f64 {
    subclass_shape(pt, 1.0).max_abs_diff(f)
}

/// Residual of the W6-bar form of F, `(1/2n){[g(x,y)-g(x,Py)]θ(z) + [g(x,z)-g(x,Pz)]θ(y)}`.
pub fn w6bar_shape_residual(pt: &StructuredPoint, f: &Tensor3) -> f64 {
    subclass_shape(pt, -1.0).max_abs_diff(f)
}

fn subclass_shape(pt: &StructuredPoint, sign: f64) -> Tensor3 {
    let g = &pt.g;
    let gt = associated_metric(pt);
    let th = &pt.theta;
    let c = pt.inv_2n();
    Tensor3::from_fn(pt.dim(), |i, j, k| {
        c * ((g[[i, j]] + sign * gt[[i, j]]) * th[[k]] + (g[[i, k]] + sign * gt[[i, k]]) * th[[j]])
    })
}

/// Classifies a valid point into W0 / W3-bar / W6-bar / mixed W1.
///
/// Parity defects are measured relative to `|theta|_inf`; below `tol` in
/// absolute size the form is treated as zero and the point is W0.
pub fn class_flags(pt: &StructuredPoint, tol: f64) -> Result<ClassFlags> {
    class_flags_with_f(pt, &build_f(pt), tol)
}

/// As [`class_flags`], but the subclass F-shape is checked against a supplied
/// (e.g. finite-difference) fundamental tensor instead of the one built from `theta`.
pub fn class_flags_with_f(pt: &StructuredPoint, f: &Tensor3, tol: f64) -> Result<ClassFlags> {
    let violations = validate(pt);
    if !violations.is_empty() {
        return Err(Error::InvalidStructure(violations));
    }
    let norm = pt.theta.max_abs();
    if norm < tol {
        return Ok(ClassFlags {
            is_w0: true,
            in_w3bar: false,
            in_w6bar: false,
            theta_parity: Parity::Zero,
            odd_defect: 0.0,
            even_defect: 0.0,
            shape_residual: 0.0,
        });
    }
    let thp = pt.theta_p();
    let odd_defect = (&thp + &pt.theta).max_abs() / norm;
    let even_defect = (&thp - &pt.theta).max_abs() / norm;
    let shape_tol = tol * norm.max(1.0) * pt.g.max_abs().max(1.0);
    let (parity, shape_residual) = if odd_defect <= tol {
        (Parity::Odd, w3bar_shape_residual(pt, f))
    } else if even_defect <= tol {
        (Parity::Even, w6bar_shape_residual(pt, f))
    } else {
        (Parity::Mixed, 0.0)
    };
    let shape_ok = shape_residual <= shape_tol;
    Ok(ClassFlags {
        is_w0: false,
        in_w3bar: parity == Parity::Odd && shape_ok,
        in_w6bar: parity == Parity::Even && shape_ok,
        theta_parity: parity,
        odd_defect,
        even_defect,
        shape_residual,
    })
}

/// `psi1(S)(x,y,z,w) = g(y,z)S(x,w) - g(x,z)S(y,w) + S(y,z)g(x,w) - S(x,z)g(y,w)`.
pub fn psi1(s: &Bilinear, g: &Bilinear) -> Tensor4 {
    Tensor4::from_fn(g.dim(), |x, y, z, w| {
        g[[y, z]] * s[[x, w]] - g[[x, z]] * s[[y, w]] + s[[y, z]] * g[[x, w]]
            - s[[x, z]] * g[[y, w]]
    })
}

/// `psi2(S)(x,y,z,w) = psi1(S)(x,y,Pz,Pw)`.
pub fn psi2(s: &Bilinear, g: &Bilinear, p: &Endomorphism) -> Tensor4 {
    psi1(s, g).pull_last_two(p)
}

#[derive(Clone, Debug)]
pub struct PiTensors {
    pub pi1: Tensor4,
    pub pi2: Tensor4,
    pub pi3: Tensor4,
}

/// `pi1 = psi1(g)/2`, `pi2 = psi2(g)/2`, `pi3 = psi1(g~)`.
pub fn pi_tensors(g: &Bilinear, p: &Endomorphism) -> PiTensors {
    let gt = g.compose_right(p);
    PiTensors {
        pi1: psi1(g, g).scale(0.5),
        pi2: psi2(g, g, p).scale(0.5),
        pi3: psi1(&gt, g),
    }
}

/// Residuals of the curvature-like identities and the P-invariance of the last pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CurvatureResidual {
    /// `L(x,y,z,w) + L(y,x,z,w)`
    pub antisym_first: f64,
    /// `L(x,y,z,w) + L(x,y,w,z)`
    pub antisym_last: f64,
    /// First Bianchi cyclic sum.
    pub bianchi: f64,
    /// `L(x,y,Pz,Pw) - L(x,y,z,w)`
    pub p_invariance: f64,
}

impl CurvatureResidual {
    pub fn curvature_like(&self) -> f64 {
        self.antisym_first.max(self.antisym_last).max(self.bianchi)
    }

    pub fn p_tensor(&self) -> f64 {
        self.curvature_like().max(self.p_invariance)
    }
}

pub fn curvature_residual(l: &Tensor4, p: &Endomorphism) -> CurvatureResidual {
    let d = l.dim();
    let mut r = CurvatureResidual::default();
    for x in 0..d {
        for y in 0..d {
            for z in 0..d {
                for w in 0..d {
                    let v = l[[x, y, z, w]];
                    r.antisym_first = r.antisym_first.max((v + l[[y, x, z, w]]).abs());
                    r.antisym_last = r.antisym_last.max((v + l[[x, y, w, z]]).abs());
                    let cyc = v + l[[y, z, x, w]] + l[[z, x, y, w]];
                    r.bianchi = r.bianchi.max(cyc.abs());
                }
            }
        }
    }
    r.p_invariance = l.pull_last_two(p).max_abs_diff(l);
    r
}

pub fn is_curvature_like(l: &Tensor4) -> bool {
    is_curvature_like_tol(l, CURVATURE_TOL)
}

pub fn is_curvature_like_tol(l: &Tensor4, tol: f64) -> bool {
    let id = Endomorphism::identity(l.dim());
    curvature_residual(l, &id).curvature_like() <= tol
}

pub fn is_p_tensor(l: &Tensor4, p: &Endomorphism) -> bool {
    is_p_tensor_tol(l, p, CURVATURE_TOL)
}

pub fn is_p_tensor_tol(l: &Tensor4, p: &Endomorphism, tol: f64) -> bool {
    curvature_residual(l, p).p_tensor() <= tol
}
