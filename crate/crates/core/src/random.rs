//! Seeded generators for random valid structures, used by tests, examples and the CLI.

use nalgebra::DMatrix;
use rand::Rng;

use crate::connection::ConnectionParams;
use crate::structure::StructuredPoint;
use crate::tensor::{Bilinear, Covector, Endomorphism};

/// A random valid point of dimension `2n`.
///
/// With `M` a random well-conditioned matrix, `g = MᵀM` and `P = M⁻¹ E M` where
/// `E = diag(I_n, -I_n)`; then `P² = I`, `PᵀgP = g` and `tr P = 0`.
pub fn random_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> StructuredPoint {
    let d = 2 * n;
    let m = loop {
        let m = DMatrix::from_fn(d, d, |i, j| {
            rng.gen_range(-1.0f64..1.0) + if i == j { 2.5 } else { 0.0 }
        });
        if m.determinant().abs() > 0.5 {
            break m;
        }
    };
    let minv = m
        .clone()
        .try_inverse()
        .expect("determinant bounded away from zero");
    let e = DMatrix::from_fn(d, d, |i, j| match (i == j, i < n) {
        (false, _) => 0.0,
        (true, true) => 1.0,
        (true, false) => -1.0,
    });
    let gm = m.transpose() * &m;
    let pm = &minv * e * &m;
    let g = Bilinear::from_fn(d, |i, j| 0.5 * (gm[(i, j)] + gm[(j, i)]));
    let p = Endomorphism::from_fn(d, |i, j| pm[(i, j)]);
    let theta = Covector::from_fn(d, |_| rng.gen_range(-1.0..1.0));
    StructuredPoint::new(n, g, p, theta).expect("shapes agree by construction")
}

/// A random symmetric bilinear form.
pub fn random_symmetric<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Bilinear {
    let a = Bilinear::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
    Bilinear::from_fn(dim, |i, j| a[[i, j]] + a[[j, i]])
}

pub fn random_bilinear<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Bilinear {
    Bilinear::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_params<R: Rng + ?Sized>(rng: &mut R) -> ConnectionParams {
    ConnectionParams::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Uniform coordinates in `[-half_width, half_width]^dim`.
pub fn random_coords<R: Rng + ?Sized>(dim: usize, half_width: f64, rng: &mut R) -> Vec<f64> {
    (0..dim)
        .map(|_| rng.gen_range(-half_width..=half_width))
        .collect()
}
