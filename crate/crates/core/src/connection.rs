//! The two-parameter family of natural connections on a W1 point.
//!
//! A member is selected by `(lambda, mu)`. Its torsion is affine in the
//! parameters with `theta`-dependent coefficients, and the transformation
//! tensor `Q` (with `∇' = ∇ + Q`) is obtained from the torsion by a slot swap.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::structure::{associated_metric, StructuredPoint};
use crate::tensor::{sharp, Bilinear, Covector, Endomorphism, Tensor3, Vector};

/// Absolute tolerance for exact parameter comparisons such as `lambda = 0`.
pub const PARAM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionParams {
    pub lambda: f64,
    pub mu: f64,
}

impl ConnectionParams {
    pub const fn new(lambda: f64, mu: f64) -> Self {
        Self { lambda, mu }
    }

    /// `lambda² - mu² - mu/2n`.
    pub fn discriminant(&self, n: usize) -> f64 {
        discriminant(*self, n)
    }
}

impl fmt::Display for ConnectionParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(λ={}, μ={})", self.lambda, self.mu)
    }
}

/// The distinguished members of the family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NamedConnection {
    /// `lambda = mu = 0`.
    D,
    /// `lambda = 0, mu = -1/2n`.
    DTilde,
    /// `lambda = 0, mu = -1/4n`, the midpoint of `D` and `DTilde`.
    Canonical,
}

impl NamedConnection {
    pub fn params(self, n: usize) -> ConnectionParams {
        let c = 1.0 / (2 * n) as f64;
        match self {
            NamedConnection::D => ConnectionParams::new(0.0, 0.0),
            NamedConnection::DTilde => ConnectionParams::new(0.0, -c),
            NamedConnection::Canonical => ConnectionParams::new(0.0, -c / 2.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NamedConnection::D => "D",
            NamedConnection::DTilde => "Dtilde",
            NamedConnection::Canonical => "canonical",
        }
    }
}

impl FromStr for NamedConnection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "D" => Ok(NamedConnection::D),
            "Dtilde" | "D_tilde" => Ok(NamedConnection::DTilde),
            "canonical" => Ok(NamedConnection::Canonical),
            other => Err(format!(
                "unknown connection '{other}' (expected D, Dtilde or canonical)"
            )),
        }
    }
}

/// `lambda² - mu² - mu/2n`, the determinant governing when `R'` is a Riemannian P-tensor.
pub fn discriminant(cp: ConnectionParams, n: usize) -> f64 {
    cp.lambda * cp.lambda - cp.mu * cp.mu - cp.mu / (2 * n) as f64
}

pub fn average_connection(a: ConnectionParams, b: ConnectionParams) -> ConnectionParams {
    ConnectionParams::new(0.5 * (a.lambda + b.lambda), 0.5 * (a.mu + b.mu))
}

/// The torsion `T(x, y, z) = g(T(x, y), z)` of the connection `cp`.
pub fn torsion(pt: &StructuredPoint, cp: ConnectionParams) -> Tensor3 {
    let g = &pt.g;
    let gt = associated_metric(pt);
    let th = &pt.theta;
    let thp = pt.theta_p();
    let c = pt.inv_2n();
    let ConnectionParams { lambda: l, mu: m } = cp;
    Tensor3::from_fn(pt.dim(), |x, y, z| {
        c * (g[[y, z]] * thp[[x]] - g[[x, z]] * thp[[y]])
            + l * (g[[y, z]] * th[[x]] - g[[x, z]] * th[[y]] + gt[[y, z]] * thp[[x]]
                - gt[[x, z]] * thp[[y]])
            + m * (gt[[y, z]] * th[[x]] - gt[[x, z]] * th[[y]] + g[[y, z]] * thp[[x]]
                - g[[x, z]] * thp[[y]])
    })
}

/// The transformation tensor `Q(x, y, z) = g(∇'_x y - ∇_x y, z)`, read off the torsion as `T(z, y, x)`.
pub fn q_tensor(pt: &StructuredPoint, cp: ConnectionParams) -> Tensor3 {
    torsion(pt, cp).permute([2, 1, 0])
}

/// The 1-forms `alpha = g(p, .)` and `beta = g(q, .)` that carry the parameters.
fn alpha_beta(pt: &StructuredPoint, cp: ConnectionParams) -> (Covector, Covector) {
    let th = &pt.theta;
    let thp = pt.theta_p();
    let c = pt.inv_2n();
    let alpha = &th.scale(cp.lambda) + &thp.scale(cp.mu + c);
    let beta = &thp.scale(cp.lambda) + &th.scale(cp.mu);
    (alpha, beta)
}

/// `Q` written out directly:
/// `g(y,z)α(w) - g(y,w)α(z) + g(y,Pz)β(w) - g(y,Pw)β(z)` with
/// `α = λθ + (μ + 1/2n)θ∘P`, `β = λθ∘P + μθ`.
pub fn q_tensor_closed_form(pt: &StructuredPoint, cp: ConnectionParams) -> Tensor3 {
    let g = &pt.g;
    let gt = associated_metric(pt);
    let (a, b) = alpha_beta(pt, cp);
    Tensor3::from_fn(pt.dim(), |y, z, w| {
        g[[y, z]] * a[[w]] - g[[y, w]] * a[[z]] + gt[[y, z]] * b[[w]] - gt[[y, w]] * b[[z]]
    })
}

/// The vectors `p = λΩ + (μ + 1/2n)PΩ` and `q = λPΩ + μΩ`, where `Ω` is dual to `theta`.
pub fn p_q_vectors(pt: &StructuredPoint, cp: ConnectionParams) -> Result<(Vector, Vector)> {
    let omega = sharp(&pt.g, &pt.theta)?;
    let p_omega = pt.p.apply(&omega);
    let c = pt.inv_2n();
    let p = &omega.scale(cp.lambda) + &p_omega.scale(cp.mu + c);
    let q = &p_omega.scale(cp.lambda) + &omega.scale(cp.mu);
    Ok((p, q))
}

/// The vector-valued increment `Q(x, y) = ∇'_x y - ∇_x y` of one connection at one point.
#[derive(Clone, Debug)]
pub struct ConnectionIncrement {
    g: Bilinear,
    gt: Bilinear,
    structure: Endomorphism,
    p: Vector,
    q: Vector,
    alpha: Covector,
    beta: Covector,
}

impl ConnectionIncrement {
    pub fn new(pt: &StructuredPoint, cp: ConnectionParams) -> Result<Self> {
        let (p, q) = p_q_vectors(pt, cp)?;
        let (alpha, beta) = alpha_beta(pt, cp);
        Ok(Self {
            g: pt.g.clone(),
            gt: associated_metric(pt),
            structure: pt.p.clone(),
            p,
            q,
            alpha,
            beta,
        })
    }

    /// `g(x,Py) q - β(y) Px + g(x,y) p - α(y) x`.
    pub fn apply(&self, x: &Vector, y: &Vector) -> Vector {
        let px = self.structure.apply(x);
        let mut out = self.q.scale(self.gt.eval(x, y));
        out = &out - &px.scale(self.beta.apply(y));
        out = &out + &self.p.scale(self.g.eval(x, y));
        &out - &x.scale(self.alpha.apply(y))
    }

    /// Components `[i, j, l]`: the `l`-th component of `Q(e_i, e_j)`.
    pub fn components(&self) -> Tensor3 {
        let d = self.g.dim();
        let mut out = Tensor3::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let v = self.apply(&Vector::basis(d, i), &Vector::basis(d, j));
                for l in 0..d {
                    out[[i, j, l]] = v[[l]];
                }
            }
        }
        out
    }
}

pub fn connection_increment(
    pt: &StructuredPoint,
    cp: ConnectionParams,
) -> Result<ConnectionIncrement> {
    ConnectionIncrement::new(pt, cp)
}

/// `W(y, z) = θ(Py)θ(z) - θ(y)θ(Pz)`.
pub fn w_bilinear(pt: &StructuredPoint) -> Bilinear {
    let th = &pt.theta;
    let thp = pt.theta_p();
    &thp.outer(th) - &th.outer(&thp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_params, random_point};
    use crate::structure::build_f;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture(a: f64, b: f64) -> StructuredPoint {
        StructuredPoint::new(
            1,
            Bilinear::identity(2),
            Endomorphism::standard_product(1),
            Covector::new(vec![a, b]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn torsion_hand_value_and_zero_theta() {
        let (a, b) = (0.7, -1.3);
        let t = torsion(&fixture(a, b), ConnectionParams::new(0.0, 0.0));
        assert!((t[[0, 1, 1]] - a / 2.0).abs() < 1e-15);
        let q = q_tensor(&fixture(a, b), ConnectionParams::new(0.0, 0.0));
        assert!((q[[1, 1, 0]] - a / 2.0).abs() < 1e-15);
        for cp in [
            ConnectionParams::new(0.4, -2.0),
            ConnectionParams::new(-1.0, 3.0),
        ] {
            assert_eq!(torsion(&fixture(0.0, 0.0), cp).max_abs(), 0.0);
            assert_eq!(q_tensor(&fixture(0.0, 0.0), cp).max_abs(), 0.0);
        }
    }

    #[test]
    fn torsion_antisymmetric_and_hayden_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3 {
            let pt = random_point(n, &mut rng);
            let cp = random_params(&mut rng);
            let t = torsion(&pt, cp);
            assert!((&t + &t.permute([1, 0, 2])).max_abs() < 1e-14);
            let q = q_tensor(&pt, cp);
            // 2Q(x,y,z) = T(x,y,z) - T(y,z,x) + T(z,x,y)
            let hayden = &(&t - &t.permute([1, 2, 0])) + &t.permute([2, 0, 1]);
            assert!(hayden.max_abs_diff(&q.scale(2.0)) < 1e-13);
            // T(x,y,z) = Q(x,y,z) - Q(y,x,z)
            assert!(t.max_abs_diff(&(&q - &q.permute([1, 0, 2]))) < 1e-13);
        }
    }

    #[test]
    fn naturality_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 1..=3 {
            let pt = random_point(n, &mut rng);
            let cp = random_params(&mut rng);
            let q = q_tensor(&pt, cp);
            let d = pt.dim();
            let p = &pt.p;
            let lhs = build_f(&pt);
            let rhs = Tensor3::from_fn(d, |x, y, z| {
                (0..d)
                    .map(|a| q[[x, y, a]] * p[[a, z]] - q[[x, a, z]] * p[[a, y]])
                    .sum()
            });
            assert!(lhs.max_abs_diff(&rhs) < 1e-12, "n = {n}");
            assert!((&q + &q.permute([0, 2, 1])).max_abs() < 1e-13);
            assert!(q.max_abs_diff(&q_tensor_closed_form(&pt, cp)) < 1e-12);
        }
    }

    #[test]
    fn increment_lowers_to_q() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let pt = random_point(2, &mut rng);
        let cp = random_params(&mut rng);
        let inc = connection_increment(&pt, cp).unwrap();
        let q = q_tensor(&pt, cp);
        let d = pt.dim();
        for x in 0..d {
            for y in 0..d {
                let v = inc.apply(&Vector::basis(d, x), &Vector::basis(d, y));
                let lowered = v.lower(&pt.g);
                for z in 0..d {
                    assert!((lowered[[z]] - q[[x, y, z]]).abs() < 1e-12);
                }
            }
        }
        let zero = pt.with_theta(Covector::zeros(d));
        assert_eq!(
            connection_increment(&zero, cp)
                .unwrap()
                .components()
                .max_abs(),
            0.0
        );
    }

    #[test]
    fn increment_fixture_d_connection() {
        // λ = μ = 0, n = 1: Q(x,y) = g(x,y) PΩ/2 - θ(Py)/2 x, so Q(e2,e2) = (a/2, -b/2) + (0, b/2)
        let (a, b) = (0.8, 0.3);
        let inc = connection_increment(&fixture(a, b), ConnectionParams::new(0.0, 0.0)).unwrap();
        let v = inc.apply(&Vector::basis(2, 1), &Vector::basis(2, 1));
        assert!((v[[0]] - a / 2.0).abs() < 1e-15);
        assert!(v[[1]].abs() < 1e-15);
    }

    #[test]
    fn p_q_examples() {
        let pt = fixture(0.6, 0.9);
        let (p, q) = p_q_vectors(&pt, ConnectionParams::new(0.0, 0.0)).unwrap();
        assert!(p.max_abs_diff(&Vector::new(vec![0.3, -0.45]).unwrap()) < 1e-15);
        assert_eq!(q.max_abs(), 0.0);
        let (p, q) = p_q_vectors(&pt, NamedConnection::DTilde.params(1)).unwrap();
        assert!(p.max_abs() < 1e-15);
        assert!(q.max_abs_diff(&Vector::new(vec![-0.3, -0.45]).unwrap()) < 1e-15);
        let (p, q) = p_q_vectors(&fixture(0.0, 0.0), ConnectionParams::new(0.5, 0.5)).unwrap();
        assert_eq!(p.max_abs() + q.max_abs(), 0.0);
    }

    #[test]
    fn discriminant_of_named_connections() {
        assert_eq!(discriminant(NamedConnection::D.params(1), 1), 0.0);
        assert_eq!(discriminant(NamedConnection::DTilde.params(1), 1), 0.0);
        assert_eq!(
            discriminant(NamedConnection::Canonical.params(1), 1),
            1.0 / 16.0
        );
        for n in 1..=4 {
            assert!(discriminant(NamedConnection::DTilde.params(n), n).abs() < PARAM_TOL);
            assert!(discriminant(NamedConnection::Canonical.params(n), n) > 0.0);
        }
    }

    #[test]
    fn w_examples() {
        assert_eq!(w_bilinear(&fixture(1.0, 0.0)).max_abs(), 0.0);
        let w = w_bilinear(&fixture(1.0, 1.0));
        assert_eq!(w[[0, 1]], 2.0);
        assert_eq!(w[[1, 0]], -2.0);
        assert_eq!(w_bilinear(&fixture(0.0, 0.0)).max_abs(), 0.0);
    }

    #[test]
    fn averaging() {
        for n in 1..=3 {
            let avg = average_connection(
                NamedConnection::D.params(n),
                NamedConnection::DTilde.params(n),
            );
            assert_eq!(avg, NamedConnection::Canonical.params(n));
        }
        let a = ConnectionParams::new(0.3, -0.2);
        assert_eq!(average_connection(a, a), a);
    }

    #[test]
    fn named_parse() {
        assert_eq!(
            "Dtilde".parse::<NamedConnection>(),
            Ok(NamedConnection::DTilde)
        );
        assert!("nabla".parse::<NamedConnection>().is_err());
    }
}
