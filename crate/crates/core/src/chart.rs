//! Manifolds given on a single coordinate chart by evaluable metric and
//! structure fields, with a central-difference derivative engine.
//!
//! First derivatives of the fields use the inner step `fd_step`. Quantities
//! that differentiate something already built from first derivatives
//! (curvature, `∇θ`, `∇Q`, `∇T`) use the outer step, ten times larger.

use std::fmt;
use std::sync::Arc;

use crate::connection::{connection_increment, torsion, ConnectionParams};
use crate::error::{Error, Result};
use crate::structure::{build_f, validate, StructuredPoint, CHART_TOL};
use crate::tensor::{
    metric_inverse, trace_contract, Bilinear, Covector, Dense, Endomorphism, Tensor3, Tensor4,
};

pub type Field<T> = Arc<dyn Fn(&[f64]) -> Result<T> + Send + Sync>;

pub const DEFAULT_FD_STEP: f64 = 1e-5;
/// Accepted range for `fd_step`.
pub const FD_STEP_RANGE: (f64, f64) = (1e-7, 1e-1);

/// Which connection to differentiate with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Connection {
    LeviCivita,
    Natural(ConnectionParams),
}

/// Connection coefficients at a point: `gamma[[i, j, k]]` is the `k`-th
/// component of `∇_{e_i} e_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionCoefficients {
    pub gamma: Tensor3,
}

/// Lowered curvature `R(x, y, z, w) = g(R(x, y)z, w)` with its Ricci tensor and scalar curvature.
#[derive(Clone, Debug)]
pub struct CurvaturePack {
    pub r: Tensor4,
    pub ricci: Bilinear,
    pub tau: f64,
}

/// Everything computable at one point from first derivatives of the fields.
#[derive(Clone, Debug)]
pub struct Local {
    pub g: Bilinear,
    pub g_inv: Bilinear,
    pub p: Endomorphism,
    pub christoffel: ConnectionCoefficients,
    pub f: Tensor3,
    pub theta: Covector,
}

#[derive(Clone)]
pub struct ChartManifold {
    n: usize,
    metric: Field<Bilinear>,
    structure: Field<Endomorphism>,
    fd_step: f64,
    w1_tol: f64,
}

impl fmt::Debug for ChartManifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartManifold")
            .field("n", &self.n)
            .field("fd_step", &self.fd_step)
            .field("w1_tol", &self.w1_tol)
            .finish_non_exhaustive()
    }
}

impl ChartManifold {
    pub fn new(n: usize, metric: Field<Bilinear>, structure: Field<Endomorphism>) -> Result<Self> {
        crate::tensor::check_dim(2 * n)?;
        Ok(Self {
            n,
            metric,
            structure,
            fd_step: DEFAULT_FD_STEP,
            w1_tol: CHART_TOL,
        })
    }

    /// `g = e^{2w} I` with `P = diag(I_n, -I_n)`.
    pub fn conformal_product(
        n: usize,
        w: impl Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        let d = 2 * n;
        let metric: Field<Bilinear> = Arc::new(move |u: &[f64]| {
            let s = (2.0 * w(u)?).exp();
            Ok(Bilinear::identity(d).scale(s))
        });
        let p = Endomorphism::standard_product(n);
        Self::new(n, metric, Arc::new(move |_: &[f64]| Ok(p.clone())))
    }

    pub fn with_fd_step(mut self, h: f64) -> Result<Self> {
        if !(FD_STEP_RANGE.0..=FD_STEP_RANGE.1).contains(&h) {
            return Err(Error::BadStep(h));
        }
        self.fd_step = h;
        Ok(self)
    }

    /// Tolerance on `|F - F(theta)|` accepted by [`ChartManifold::point_of`].
    pub fn with_w1_tolerance(mut self, tol: f64) -> Self {
        self.w1_tol = tol;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn outer_step(&self) -> f64 {
        10.0 * self.fd_step
    }

    /// Step for `∇θ` on the right-hand side of identity checks. It differs from
    /// [`outer_step`](Self::outer_step) so the two sides are discretized independently.
    pub fn rhs_step(&self) -> f64 {
        5.0 * self.fd_step
    }

    fn check_coords(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.len(),
            });
        }
        Ok(())
    }

    pub fn metric_at(&self, u: &[f64]) -> Result<Bilinear> {
        self.check_coords(u)?;
        let g = (self.metric)(u)?;
        if g.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: g.dim(),
            });
        }
        Ok(g)
    }

    pub fn structure_at(&self, u: &[f64]) -> Result<Endomorphism> {
        self.check_coords(u)?;
        let p = (self.structure)(u)?;
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.dim(),
            });
        }
        Ok(p)
    }

    /// Central differences `∂_i f(u)` for every coordinate direction.
    pub fn partials<T: Dense>(
        &self,
        u: &[f64],
        h: f64,
        f: impl Fn(&[f64]) -> Result<T>,
    ) -> Result<Vec<T>> {
        self.check_coords(u)?;
        let mut v = u.to_vec();
        (0..u.len())
            .map(|i| {
                v[i] = u[i] + h;
                let plus = f(&v)?;
                v[i] = u[i] - h;
                let minus = f(&v)?;
                v[i] = u[i];
                Ok(plus.combine(0.5 / h, &minus, -0.5 / h))
            })
            .collect()
    }

    /// Levi-Civita coefficients `½ g^{kl}(∂_i g_jl + ∂_j g_il - ∂_l g_ij)`.
    pub fn christoffels(&self, u: &[f64]) -> Result<ConnectionCoefficients> {
        let g_inv = metric_inverse(&self.metric_at(u)?)?;
        self.christoffels_with(u, &g_inv)
    }

    fn christoffels_with(&self, u: &[f64], g_inv: &Bilinear) -> Result<ConnectionCoefficients> {
        let d = self.dim();
        let dg = self.partials(u, self.fd_step, |v| self.metric_at(v))?;
        let lowered = Tensor3::from_fn(d, |i, j, l| {
            0.5 * (dg[i][[j, l]] + dg[j][[i, l]] - dg[l][[i, j]])
        });
        let gamma = Tensor3::from_fn(d, |i, j, k| {
            (0..d).map(|l| g_inv[[k, l]] * lowered[[i, j, l]]).sum()
        });
        Ok(ConnectionCoefficients { gamma })
    }

    /// `(∇_i P)` for each direction `i`, with respect to the given coefficients.
    pub fn nabla_p(&self, u: &[f64], c: &ConnectionCoefficients) -> Result<Vec<Endomorphism>> {
        let d = self.dim();
        let p = self.structure_at(u)?;
        let dp = self.partials(u, self.fd_step, |v| self.structure_at(v))?;
        let gm = &c.gamma;
        Ok((0..d)
            .map(|i| {
                Endomorphism::from_fn(d, |a, j| {
                    let mut s = dp[i][[a, j]];
                    for b in 0..d {
                        s += gm[[i, b, a]] * p[[b, j]] - p[[a, b]] * gm[[i, j, b]];
                    }
                    s
                })
            })
            .collect())
    }

    /// `(∇_i g)_{jk}` for each direction `i`.
    pub fn nabla_g(&self, u: &[f64], c: &ConnectionCoefficients) -> Result<Vec<Bilinear>> {
        let d = self.dim();
        let g = self.metric_at(u)?;
        let dg = self.partials(u, self.fd_step, |v| self.metric_at(v))?;
        let gm = &c.gamma;
        Ok((0..d)
            .map(|i| {
                Bilinear::from_fn(d, |j, k| {
                    let mut s = dg[i][[j, k]];
                    for m in 0..d {
                        s -= gm[[i, j, m]] * g[[m, k]] + gm[[i, k, m]] * g[[j, m]];
                    }
                    s
                })
            })
            .collect())
    }

    /// Metric, structure, Levi-Civita coefficients, `F` and `theta` at `u`.
    pub fn local(&self, u: &[f64]) -> Result<Local> {
        let d = self.dim();
        let g = self.metric_at(u)?;
        let g_inv = metric_inverse(&g)?;
        let p = self.structure_at(u)?;
        let christoffel = self.christoffels_with(u, &g_inv)?;
        let np = self.nabla_p(u, &christoffel)?;
        let f = Tensor3::from_fn(d, |i, j, k| (0..d).map(|a| g[[a, k]] * np[i][[a, j]]).sum());
        let theta = trace_contract(&f, &g_inv)?;
        Ok(Local {
            g,
            g_inv,
            p,
            christoffel,
            f,
            theta,
        })
    }

    /// `F(x, y, z) = g((∇_x P) y, z)`.
    pub fn f_tensor(&self, u: &[f64]) -> Result<Tensor3> {
        Ok(self.local(u)?.f)
    }

    pub fn theta_at(&self, u: &[f64]) -> Result<Covector> {
        Ok(self.local(u)?.theta)
    }

    fn structured(&self, local: &Local) -> Result<StructuredPoint> {
        let pt = StructuredPoint::new(
            self.n,
            local.g.clone(),
            local.p.clone(),
            local.theta.clone(),
        )?;
        let violations = validate(&pt);
        if !violations.is_empty() {
            return Err(Error::InvalidStructure(violations));
        }
        Ok(pt)
    }

    /// `|F - F(theta)|`: how far the point is from the W1 shape.
    pub fn w1_residual(&self, u: &[f64]) -> Result<f64> {
        let local = self.local(u)?;
        let pt = self.structured(&local)?;
        Ok(local.f.max_abs_diff(&build_f(&pt)))
    }

    /// The structured point at `u`, after checking the structure axioms and W1 membership.
    pub fn point_of(&self, u: &[f64]) -> Result<StructuredPoint> {
        let local = self.local(u)?;
        let pt = self.structured(&local)?;
        let residual = local.f.max_abs_diff(&build_f(&pt));
        if residual > self.w1_tol {
            return Err(Error::NotW1 {
                point: u.to_vec(),
                residual,
                tolerance: self.w1_tol,
            });
        }
        Ok(pt)
    }

    /// `Γ' = Γ + Q` for the natural connection `cp`.
    pub fn prime_coefficients(
        &self,
        u: &[f64],
        cp: ConnectionParams,
    ) -> Result<ConnectionCoefficients> {
        let local = self.local(u)?;
        self.prime_from_local(&local, cp)
    }

    fn prime_from_local(
        &self,
        local: &Local,
        cp: ConnectionParams,
    ) -> Result<ConnectionCoefficients> {
        let pt = StructuredPoint::new(
            self.n,
            local.g.clone(),
            local.p.clone(),
            local.theta.clone(),
        )?;
        let inc = connection_increment(&pt, cp)?.components();
        Ok(ConnectionCoefficients {
            gamma: &local.christoffel.gamma + &inc,
        })
    }

    pub fn coefficients(&self, u: &[f64], conn: Connection) -> Result<ConnectionCoefficients> {
        match conn {
            Connection::LeviCivita => self.christoffels(u),
            Connection::Natural(cp) => self.prime_coefficients(u, cp),
        }
    }

    /// Curvature of the chosen connection, lowered with `g`, plus `ρ(y,z) = g^{ij} R(e_i,y,z,e_j)` and `τ`.
    pub fn curvature(&self, u: &[f64], conn: Connection) -> Result<CurvaturePack> {
        let d = self.dim();
        let g = self.metric_at(u)?;
        let g_inv = metric_inverse(&g)?;
        let gm = self.coefficients(u, conn)?.gamma;
        let dgm = self.partials(u, self.outer_step(), |v| {
            Ok(self.coefficients(v, conn)?.gamma)
        })?;
        // upper[[i, j, k, l]] = R^l_{ijk}
        let upper = Tensor4::from_fn(d, |i, j, k, l| {
            let mut s = dgm[i][[j, k, l]] - dgm[j][[i, k, l]];
            for m in 0..d {
                s += gm[[i, m, l]] * gm[[j, k, m]] - gm[[j, m, l]] * gm[[i, k, m]];
            }
            s
        });
        let r = Tensor4::from_fn(d, |i, j, k, w| {
            (0..d).map(|l| g[[w, l]] * upper[[i, j, k, l]]).sum()
        });
        let ricci = r.ricci_contraction(&g_inv);
        let tau = ricci.trace_with(&g_inv);
        Ok(CurvaturePack { r, ricci, tau })
    }

    /// `(∇_x θ) y` with respect to the chosen connection.
    pub fn nabla_theta(&self, u: &[f64], conn: Connection) -> Result<Bilinear> {
        let theta = self.theta_at(u)?;
        let gm = self.coefficients(u, conn)?.gamma;
        let dth = self.partials(u, self.outer_step(), |v| self.theta_at(v))?;
        Ok(covariant_covector(&theta, &dth, &gm))
    }

    /// `(∇_i T)(e_j, e_k, e_l)` for a (0,3) tensor field, one tensor per direction `i`.
    pub fn nabla_tensor3(
        &self,
        u: &[f64],
        conn: Connection,
        field: impl Fn(&[f64]) -> Result<Tensor3>,
    ) -> Result<Vec<Tensor3>> {
        let d = self.dim();
        let t = field(u)?;
        let gm = self.coefficients(u, conn)?.gamma;
        let dt = self.partials(u, self.outer_step(), &field)?;
        Ok((0..d)
            .map(|i| {
                Tensor3::from_fn(d, |j, k, l| {
                    let mut s = dt[i][[j, k, l]];
                    for m in 0..d {
                        s -= gm[[i, j, m]] * t[[m, k, l]]
                            + gm[[i, k, m]] * t[[j, m, l]]
                            + gm[[i, l, m]] * t[[j, k, m]];
                    }
                    s
                })
            })
            .collect())
    }

    /// `(max |∇g|, max |∇P|)` for the chosen connection.
    pub fn naturality_residuals(&self, u: &[f64], conn: Connection) -> Result<(f64, f64)> {
        let c = self.coefficients(u, conn)?;
        let ng = self
            .nabla_g(u, &c)?
            .iter()
            .map(Bilinear::max_abs)
            .fold(0.0, f64::max);
        let np = self
            .nabla_p(u, &c)?
            .iter()
            .map(Endomorphism::max_abs)
            .fold(0.0, f64::max);
        Ok((ng, np))
    }

    /// Antisymmetry residuals of `∇θ` and `(∇θ)(·, P·)`: zero iff `θ`, resp. `θ∘P`, is closed at `u`.
    pub fn closedness_residuals(&self, u: &[f64]) -> Result<(f64, f64)> {
        let a = self.nabla_theta(u, Connection::LeviCivita)?;
        let p = self.structure_at(u)?;
        Ok((a.asymmetry(), a.compose_right(&p).asymmetry()))
    }

    /// The torsion field of `cp`, built from `theta` at every point.
    pub fn torsion_at(&self, u: &[f64], cp: ConnectionParams) -> Result<Tensor3> {
        let local = self.local(u)?;
        let pt = StructuredPoint::new(self.n, local.g, local.p, local.theta)?;
        Ok(torsion(&pt, cp))
    }
}

/// `∂_i θ_j - Γ^m_ij θ_m`.
pub fn covariant_covector(theta: &Covector, dtheta: &[Covector], gamma: &Tensor3) -> Bilinear {
    let d = theta.dim();
    Bilinear::from_fn(d, |i, j| {
        dtheta[i][[j]] - (0..d).map(|m| gamma[[i, j, m]] * theta[[m]]).sum::<f64>()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::NamedConnection;

    fn flat(n: usize) -> ChartManifold {
        ChartManifold::conformal_product(n, |_| Ok(0.0)).unwrap()
    }

    fn mixed() -> ChartManifold {
        ChartManifold::conformal_product(2, |u| Ok(u[0] * u[2])).unwrap()
    }

    const U: [f64; 4] = [0.21, -0.13, 0.34, 0.05];

    #[test]
    fn flat_chart_is_trivial() {
        let m = flat(2);
        assert_eq!(m.christoffels(&U).unwrap().gamma.max_abs(), 0.0);
        let pt = m.point_of(&U).unwrap();
        assert_eq!(pt.theta.max_abs(), 0.0);
        let k = m.curvature(&U, Connection::LeviCivita).unwrap();
        assert_eq!(k.r.max_abs(), 0.0);
        assert_eq!(k.tau, 0.0);
        let prime = m
            .prime_coefficients(&U, ConnectionParams::new(0.3, 0.2))
            .unwrap();
        assert_eq!(prime.gamma.max_abs(), 0.0);
    }

    #[test]
    fn conformal_christoffels_match_closed_form() {
        // w = x1 in dimension 2
        let m = ChartManifold::conformal_product(1, |u| Ok(u[0])).unwrap();
        let gm = m.christoffels(&[0.3, -0.2]).unwrap().gamma;
        assert!((gm[[0, 0, 0]] - 1.0).abs() < 1e-7);
        assert!((gm[[1, 1, 0]] + 1.0).abs() < 1e-7);
        assert!((gm[[0, 1, 1]] - 1.0).abs() < 1e-7);
        assert!((gm[[1, 0, 1]] - 1.0).abs() < 1e-7);
        let (ng, _) = m
            .naturality_residuals(&[0.3, -0.2], Connection::LeviCivita)
            .unwrap();
        assert!(ng < 1e-6);
    }

    #[test]
    fn gaussian_curvature_sign() {
        // K = -e^{-2w} Δw with w = x1² + x1 x2 / 2, Δw = 2
        let m =
            ChartManifold::conformal_product(1, |u| Ok(u[0] * u[0] + 0.5 * u[0] * u[1])).unwrap();
        let u = [0.2, -0.1];
        let w = u[0] * u[0] + 0.5 * u[0] * u[1];
        let k = m.curvature(&u, Connection::LeviCivita).unwrap();
        let g = m.metric_at(&u).unwrap();
        let det = g[[0, 0]] * g[[1, 1]] - g[[0, 1]] * g[[1, 0]];
        let expected = -(-2.0 * w).exp() * 2.0;
        assert!((k.r[[0, 1, 1, 0]] / det - expected).abs() < 1e-4);
        // τ = 2K in dimension 2
        assert!((k.tau - 2.0 * expected).abs() < 1e-4);
    }

    #[test]
    fn theta_of_conformal_product() {
        let m = mixed();
        let pt = m.point_of(&U).unwrap();
        // θ = 2n · dw∘P with dw = (x3, 0, x1, 0)
        let expected = [4.0 * U[2], 0.0, -4.0 * U[0], 0.0];
        for k in 0..4 {
            assert!((pt.theta[[k]] - expected[k]).abs() < 1e-6);
        }
        assert!(m.w1_residual(&U).unwrap() < 1e-6);
    }

    #[test]
    fn broken_structure_is_rejected() {
        let metric: Field<Bilinear> = Arc::new(|_: &[f64]| Ok(Bilinear::identity(2)));
        let structure: Field<Endomorphism> =
            Arc::new(|_: &[f64]| Ok(Endomorphism::diagonal(&[2.0, -0.5])));
        let m = ChartManifold::new(1, metric, structure).unwrap();
        assert!(matches!(
            m.point_of(&[0.0, 0.0]),
            Err(Error::InvalidStructure(_))
        ));
    }

    #[test]
    fn natural_connections_preserve_g_and_p() {
        let m = mixed();
        for named in [
            NamedConnection::D,
            NamedConnection::Canonical,
            NamedConnection::DTilde,
        ] {
            let cp = named.params(2);
            let (ng, np) = m.naturality_residuals(&U, Connection::Natural(cp)).unwrap();
            assert!(ng < 1e-6 && np < 1e-6, "{named:?}: {ng:e} {np:e}");
        }
    }

    #[test]
    fn closedness_on_catalog() {
        let (rt, rtp) = mixed().closedness_residuals(&U).unwrap();
        assert!(rt > 1.0 && rtp < 1e-6, "{rt:e} {rtp:e}");
        let sep = ChartManifold::conformal_product(2, |u| Ok(u[0] + u[2] * u[2])).unwrap();
        let (rt, rtp) = sep.closedness_residuals(&U).unwrap();
        assert!(rt < 1e-6 && rtp < 1e-6, "{rt:e} {rtp:e}");
    }

    #[test]
    fn first_derivatives_converge_quadratically() {
        let m =
            ChartManifold::conformal_product(1, |u| Ok((u[0]).sin() + u[1] * u[1] * u[0])).unwrap();
        let u = [0.3, 0.4];
        let exact = |u: &[f64]| -> f64 { u[0].cos() + u[1] * u[1] };
        // Γ^1_11 = ∂1 w
        let err = |h: f64| {
            let mm = m.clone().with_fd_step(h).unwrap();
            (mm.christoffels(&u).unwrap().gamma[[0, 0, 0]] - exact(&u)).abs()
        };
        let ratio = err(2e-3) / err(1e-3);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn step_range() {
        assert!(flat(1).with_fd_step(1e-2).is_ok());
        assert!(matches!(flat(1).with_fd_step(0.5), Err(Error::BadStep(_))));
        assert!(matches!(flat(1).with_fd_step(1e-9), Err(Error::BadStep(_))));
    }
}
