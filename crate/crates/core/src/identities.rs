//! Numerical checks of the identities relating the Levi-Civita connection `∇`
//! and a natural connection `∇' = ∇ + Q` on a chart manifold.
//!
//! All checks share one [`Ingredients`] bundle per point and parameter pair,
//! so each finite-difference quantity is computed once.

use serde::Serialize;

use crate::chart::{covariant_covector, ChartManifold, Connection, CurvaturePack};
use crate::connection::{p_q_vectors, q_tensor, torsion, w_bilinear, ConnectionParams};
use crate::error::Result;
use crate::structure::{associated_metric, pi_tensors, psi1, psi2, StructuredPoint};
use crate::tensor::{raise_last, Bilinear, Tensor3, Tensor4, Vector};

/// Everything the identity checks need at one point for one connection.
#[derive(Clone, Debug)]
pub struct Ingredients {
    pub cp: ConnectionParams,
    pub pt: StructuredPoint,
    pub g_inv: Bilinear,
    pub gt: Bilinear,
    pub curvature: CurvaturePack,
    pub curvature_prime: CurvaturePack,
    pub t: Tensor3,
    pub q: Tensor3,
    /// `(∇_x θ) y`.
    pub nabla_theta: Bilinear,
    /// `(∇'_x θ) y`.
    pub nabla_theta_prime: Bilinear,
    /// `nabla_prime_q[x][[y, z, w]] = (∇'_x Q)(y, z, w)`.
    pub nabla_prime_q: Vec<Tensor3>,
    pub p: Vector,
    pub q_vec: Vector,
}

impl Ingredients {
    pub fn compute(m: &ChartManifold, u: &[f64], cp: ConnectionParams) -> Result<Self> {
        let pt = m.point_of(u)?;
        let g_inv = pt.g_inv()?;
        let gt = associated_metric(&pt);
        let prime = Connection::Natural(cp);
        let curvature = m.curvature(u, Connection::LeviCivita)?;
        let curvature_prime = m.curvature(u, prime)?;
        let dth = m.partials(u, m.rhs_step(), |v| m.theta_at(v))?;
        let gamma = m.christoffels(u)?.gamma;
        let gamma_prime = m.prime_coefficients(u, cp)?.gamma;
        let nabla_theta = covariant_covector(&pt.theta, &dth, &gamma);
        let nabla_theta_prime = covariant_covector(&pt.theta, &dth, &gamma_prime);
        let q_field = |v: &[f64]| {
            let local = m.local(v)?;
            let at = StructuredPoint::new(m.n(), local.g, local.p, local.theta)?;
            Ok(q_tensor(&at, cp))
        };
        let nabla_prime_q = m.nabla_tensor3(u, prime, q_field)?;
        let (p, q_vec) = p_q_vectors(&pt, cp)?;
        Ok(Self {
            cp,
            t: torsion(&pt, cp),
            q: q_tensor(&pt, cp),
            g_inv,
            gt,
            curvature,
            curvature_prime,
            nabla_theta,
            nabla_theta_prime,
            nabla_prime_q,
            p,
            q_vec,
            pt,
        })
    }

    fn c(&self) -> f64 {
        self.pt.inv_2n()
    }

    /// `R - R'`.
    pub fn curvature_difference(&self) -> Tensor4 {
        &self.curvature.r - &self.curvature_prime.r
    }
}

/// `U = λ∇'θ + (μ + 1/2n)(∇'θ)(·, P·)` and `V = λ(∇'θ)(·, P·) + μ∇'θ`.
pub fn uv_tensors(ing: &Ingredients) -> (Bilinear, Bilinear) {
    let a = &ing.nabla_theta_prime;
    let ap = a.compose_right(&ing.pt.p);
    let ConnectionParams { lambda: l, mu: m } = ing.cp;
    let u = &a.scale(l) + &ap.scale(m + ing.c());
    let v = &ap.scale(l) + &a.scale(m);
    (u, v)
}

/// `S'(y,z) = U(y,z) - (1/2n){λθ(y)θ(Pz) + μθ(y)θ(z)}` and
/// `S''(y,z) = V(y,Pz) + (1/2n){λθ(Py)θ(z) + μθ(Py)θ(Pz)}`.
pub fn s_tensors(ing: &Ingredients) -> (Bilinear, Bilinear) {
    let (u, v) = uv_tensors(ing);
    let th = &ing.pt.theta;
    let thp = ing.pt.theta_p();
    let c = ing.c();
    let ConnectionParams { lambda: l, mu: m } = ing.cp;
    let s1 = &u - &(&th.outer(&thp).scale(l) + &th.outer(th).scale(m)).scale(c);
    let s2 = &v.compose_right(&ing.pt.p)
        + &(&thp.outer(th).scale(l) + &thp.outer(&thp).scale(m)).scale(c);
    (s1, s2)
}

/// Right-hand side of the torsion form of the curvature relation:
/// `R' - Q(T(x,y),z,w) - (∇'_x Q)(y,z,w) + (∇'_y Q)(x,z,w) + g(Q(x,z),Q(y,w)) - g(Q(y,z),Q(x,w))`.
pub fn torsion_curvature_rhs(ing: &Ingredients) -> Tensor4 {
    let d = ing.pt.dim();
    let q = &ing.q;
    let t_up = raise_last(&ing.t, &ing.g_inv);
    let q_up = raise_last(q, &ing.g_inv);
    let nq = &ing.nabla_prime_q;
    let rp = &ing.curvature_prime.r;
    Tensor4::from_fn(d, |x, y, z, w| {
        let mut s = rp[[x, y, z, w]] - nq[x][[y, z, w]] + nq[y][[x, z, w]];
        for a in 0..d {
            s -= t_up[[x, y, a]] * q[[a, z, w]];
            s += q[[x, z, a]] * q_up[[y, w, a]] - q[[y, z, a]] * q_up[[x, w, a]];
        }
        s
    })
}

/// Residual of `R = R' - Q(T(x,y),z,w) - (∇'_xQ)(y,z,w) + (∇'_yQ)(x,z,w) + g(Q(x,z),Q(y,w)) - g(Q(y,z),Q(x,w))`.
pub fn verify_torsion_curvature(ing: &Ingredients) -> f64 {
    ing.curvature.r.max_abs_diff(&torsion_curvature_rhs(ing))
}

/// The closed form of `∇'Q`:
/// `g(y,z)U(x,w) - g(y,w)U(x,z) + g(y,Pz)V(x,w) - g(y,Pw)V(x,z)`.
pub fn nabla_q_closed_form(ing: &Ingredients) -> Vec<Tensor3> {
    let d = ing.pt.dim();
    let (u, v) = uv_tensors(ing);
    let g = &ing.pt.g;
    let gt = &ing.gt;
    (0..d)
        .map(|x| {
            Tensor3::from_fn(d, |y, z, w| {
                g[[y, z]] * u[[x, w]] - g[[y, w]] * u[[x, z]] + gt[[y, z]] * v[[x, w]]
                    - gt[[y, w]] * v[[x, z]]
            })
        })
        .collect()
}

/// Residual of the closed form of `∇'Q` against its finite-difference value.
pub fn verify_nabla_q(ing: &Ingredients) -> f64 {
    nabla_q_closed_form(ing)
        .iter()
        .zip(&ing.nabla_prime_q)
        .map(|(a, b)| a.max_abs_diff(b))
        .fold(0.0, f64::max)
}

/// `-g(p,p)π1 - g(q,q)π2 - g(p,q)π3 - ψ1(S') - ψ2(S'')`, the predicted `R - R'`.
pub fn decomposition_rhs(ing: &Ingredients) -> Tensor4 {
    let g = &ing.pt.g;
    let pi = pi_tensors(g, &ing.pt.p);
    let (s1, s2) = s_tensors(ing);
    let pp = g.eval(&ing.p, &ing.p);
    let qq = g.eval(&ing.q_vec, &ing.q_vec);
    let pq = g.eval(&ing.p, &ing.q_vec);
    let mut out = pi.pi1.scale(-pp);
    out = &out - &pi.pi2.scale(qq);
    out = &out - &pi.pi3.scale(pq);
    out = &out - &psi1(&s1, g);
    &out - &psi2(&s2, g, &ing.pt.p)
}

/// Residual of `R = R' - g(p,p)π1 - g(q,q)π2 - g(p,q)π3 - ψ1(S') - ψ2(S'')`.
pub fn verify_decomposition(ing: &Ingredients) -> f64 {
    ing.curvature_difference()
        .max_abs_diff(&decomposition_rhs(ing))
}

/// Residuals of the Ricci and scalar curvature relations between `∇` and `∇'`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RicciScalarResiduals {
    /// `ρ - ρ'` against the contraction of the predicted `R - R'`.
    pub ricci: f64,
    /// `ρ - ρ'` against the explicit Ricci formula.
    pub ricci_formula: f64,
    /// `τ - τ'` against the explicit scalar formula.
    pub tau: f64,
    /// `τ - τ'` against the scalar formula with `2n(2n-1)` as the `tr S'` coefficient.
    /// Agrees with `tau` only for `n = 1`; reported, not judged.
    pub tau_alternate: f64,
}

/// `-{(2n-1)g(p,p) + tr S' - g(q,q)} g - {tr(S''∘P) + 2(n-1) g(p,q)} g~ - 2(n-1)S' + S'' + S''(P·,P·)`.
pub fn ricci_formula(ing: &Ingredients) -> Bilinear {
    let n = ing.pt.n as f64;
    let g = &ing.pt.g;
    let (s1, s2) = s_tensors(ing);
    let pp = g.eval(&ing.p, &ing.p);
    let qq = g.eval(&ing.q_vec, &ing.q_vec);
    let pq = g.eval(&ing.p, &ing.q_vec);
    let tr1 = s1.trace_with(&ing.g_inv);
    let tr2p = s2.compose_right(&ing.pt.p).trace_with(&ing.g_inv);
    let mut out = g.scale(-((2.0 * n - 1.0) * pp + tr1 - qq));
    out = &out - &ing.gt.scale(tr2p + 2.0 * (n - 1.0) * pq);
    out = &out - &s1.scale(2.0 * (n - 1.0));
    out = &out + &s2;
    &out + &s2.pullback(&ing.pt.p)
}

/// `-2n(2n-1)g(p,p) + 2n g(q,q) - k tr S' + 2 tr S''`.
fn tau_formula(ing: &Ingredients, trace_coefficient: f64) -> f64 {
    let n2 = 2.0 * ing.pt.n as f64;
    let g = &ing.pt.g;
    let (s1, s2) = s_tensors(ing);
    -n2 * (n2 - 1.0) * g.eval(&ing.p, &ing.p) + n2 * g.eval(&ing.q_vec, &ing.q_vec)
        - trace_coefficient * s1.trace_with(&ing.g_inv)
        + 2.0 * s2.trace_with(&ing.g_inv)
}

pub fn verify_ricci_scalar(ing: &Ingredients) -> RicciScalarResiduals {
    let n2 = 2.0 * ing.pt.n as f64;
    let diff = &ing.curvature.ricci - &ing.curvature_prime.ricci;
    let direct = decomposition_rhs(ing).ricci_contraction(&ing.g_inv);
    let dtau = ing.curvature.tau - ing.curvature_prime.tau;
    RicciScalarResiduals {
        ricci: diff.max_abs_diff(&direct),
        ricci_formula: diff.max_abs_diff(&ricci_formula(ing)),
        tau: (dtau - tau_formula(ing, 2.0 * (n2 - 1.0))).abs(),
        tau_alternate: (dtau - tau_formula(ing, n2 * (n2 - 1.0))).abs(),
    }
}

/// Residual of the relations between the antisymmetrised derivatives of `θ`:
/// `(∇'_yθ)z - (∇'_zθ)y = (∇_yθ)z - (∇_zθ)y - (1/2n)W(y,z)` and
/// `(∇'_yθ)Pz - (∇'_zθ)Py = (∇_yθ)Pz - (∇_zθ)Py`.
pub fn verify_theta_derivatives(ing: &Ingredients) -> f64 {
    let p = &ing.pt.p;
    let a = &ing.nabla_theta;
    let ap = &ing.nabla_theta_prime;
    let w = w_bilinear(&ing.pt).scale(ing.c());
    let first = (&ap.skew() - &a.skew()) + w;
    let second = &ap.compose_right(p).skew() - &a.compose_right(p).skew();
    first.max_abs().max(second.max_abs())
}

/// `(max |∇'T|, max |∇'θ|)`; these vanish together.
pub fn torsion_parallel_residual(
    m: &ChartManifold,
    u: &[f64],
    cp: ConnectionParams,
) -> Result<(f64, f64)> {
    let prime = Connection::Natural(cp);
    let nt = m.nabla_tensor3(u, prime, |v| m.torsion_at(v, cp))?;
    let nabla_t = nt.iter().map(Tensor3::max_abs).fold(0.0, f64::max);
    let nabla_theta = m.nabla_theta(u, prime)?.max_abs();
    Ok((nabla_t, nabla_theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::NamedConnection;

    const U: [f64; 4] = [0.21, -0.13, 0.34, 0.05];

    fn mixed() -> ChartManifold {
        ChartManifold::conformal_product(2, |u| Ok(u[0] * u[2])).unwrap()
    }

    fn params() -> Vec<ConnectionParams> {
        vec![
            NamedConnection::D.params(2),
            NamedConnection::Canonical.params(2),
            ConnectionParams::new(0.7, -0.4),
        ]
    }

    #[test]
    fn identities_hold_on_mixed_fixture() {
        let m = mixed();
        for cp in params() {
            let ing = Ingredients::compute(&m, &U, cp).unwrap();
            let e12 = verify_torsion_curvature(&ing);
            let e19 = verify_nabla_q(&ing);
            let e21 = verify_decomposition(&ing);
            let rs = verify_ricci_scalar(&ing);
            let e26 = verify_theta_derivatives(&ing);
            assert!(e12 < 1e-4, "{cp}: {e12:e}");
            assert!(e19 < 1e-5, "{cp}: {e19:e}");
            assert!(e21 < 1e-4, "{cp}: {e21:e}");
            assert!(
                rs.ricci < 1e-3 && rs.ricci_formula < 1e-3 && rs.tau < 1e-3,
                "{cp}: {rs:?}"
            );
            assert!(e26 < 1e-5, "{cp}: {e26:e}");
        }
    }

    #[test]
    fn printed_alternatives_fail() {
        let m = mixed();
        let cp = ConnectionParams::new(0.7, -0.4);
        let ing = Ingredients::compute(&m, &U, cp).unwrap();
        // unprimed derivatives of Q in the torsion form of the curvature relation
        let q_field = |v: &[f64]| {
            let local = m.local(v)?;
            let at = StructuredPoint::new(2, local.g, local.p, local.theta)?;
            Ok(q_tensor(&at, cp))
        };
        let nq = m
            .nabla_tensor3(&U, Connection::LeviCivita, q_field)
            .unwrap();
        let mut alt = ing.clone();
        alt.nabla_prime_q = nq;
        assert!(verify_torsion_curvature(&alt) > 1e-2);
        // λ and μ exchanged in the θθ-correction of S''
        let (_, s2) = s_tensors(&ing);
        let th = &ing.pt.theta;
        let thp = ing.pt.theta_p();
        let c = ing.c();
        let swap = (&thp.outer(th).scale(cp.mu - cp.lambda)
            + &thp.outer(&thp).scale(cp.lambda - cp.mu))
            .scale(c);
        let s2_alt = &s2 + &swap;
        let rhs_alt = &decomposition_rhs(&ing)
            - &(&psi2(&s2_alt, &ing.pt.g, &ing.pt.p) - &psi2(&s2, &ing.pt.g, &ing.pt.p));
        assert!(ing.curvature_difference().max_abs_diff(&rhs_alt) > 1e-2);
        assert!(verify_ricci_scalar(&ing).tau_alternate > 1e-2);
    }

    #[test]
    fn zero_theta_collapses() {
        let m = ChartManifold::conformal_product(2, |_| Ok(0.0)).unwrap();
        let ing = Ingredients::compute(&m, &U, ConnectionParams::new(0.4, 0.9)).unwrap();
        assert!(verify_decomposition(&ing) < 1e-10);
        assert!(verify_torsion_curvature(&ing) < 1e-10);
        let (s1, s2) = s_tensors(&ing);
        assert_eq!(s1.max_abs() + s2.max_abs(), 0.0);
        assert_eq!(
            torsion_parallel_residual(&m, &U, ing.cp).unwrap(),
            (0.0, 0.0)
        );
    }

    #[test]
    fn uv_special_cases() {
        let ing = Ingredients::compute(&mixed(), &U, ConnectionParams::new(0.0, 0.0)).unwrap();
        let (u, v) = uv_tensors(&ing);
        assert_eq!(v.max_abs(), 0.0);
        let expected = ing.nabla_theta_prime.compose_right(&ing.pt.p).scale(0.25);
        assert!(u.max_abs_diff(&expected) < 1e-15);
        let (s1, s2) = s_tensors(&ing);
        assert!(s1.max_abs_diff(&u) < 1e-15);
        assert!(s2.max_abs_diff(&v.compose_right(&ing.pt.p)) < 1e-15);
    }

    #[test]
    fn parallel_torsion_equivalence_on_mixed() {
        let (nt, nth) =
            torsion_parallel_residual(&mixed(), &U, ConnectionParams::new(0.0, 0.0)).unwrap();
        assert!(nt > 1e-3 && nth > 1e-3);
    }
}
