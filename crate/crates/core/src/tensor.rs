//! Dense multilinear algebra over a single tangent space.
//!
//! All tensors are stored densely in row-major order with every index
//! running over `0..dim`. Covariant slots are evaluated on the coordinate
//! basis, so `t[[i, j, k]]` is `T(e_i, e_j, e_k)`. An [`Endomorphism`] is a
//! (1,1) tensor whose entry `[a, b]` is the `a`-th component of `P e_b`.
//!
//! No symmetry is enforced by the storage; symmetry and curvature identities
//! are runtime predicates elsewhere in the crate.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Absolute tolerance used for post-conditions of the linear solves.
pub const SOLVER_TOL: f64 = 1e-10;

/// Checks that `dim` is a valid ambient dimension (even and at least 2).
pub fn check_dim(dim: usize) -> Result<()> {
    if dim >= 2 && dim.is_multiple_of(2) {
        Ok(())
    } else {
        Err(Error::BadDimension(dim))
    }
}

fn check_same(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Dense tensors that can be linearly combined, as finite differences require.
pub trait Dense: Clone {
    /// `a * self + b * other`.
    fn combine(&self, a: f64, other: &Self, b: f64) -> Self;
}

macro_rules! dense_common {
    ($ty:ident) => {
        impl $ty {
            pub fn dim(&self) -> usize {
                self.dim
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.data
            }

            pub fn zeros(dim: usize) -> Self {
                Self {
                    dim,
                    data: vec![0.0; Self::len_for(dim)],
                }
            }

            /// Largest absolute component.
            pub fn max_abs(&self) -> f64 {
                max_abs(&self.data)
            }

            /// Largest absolute componentwise difference; infinite on shape mismatch.
            pub fn max_abs_diff(&self, other: &Self) -> f64 {
                if self.dim != other.dim {
                    return f64::INFINITY;
                }
                max_abs_diff(&self.data, &other.data)
            }

            pub fn scale(&self, s: f64) -> Self {
                Self {
                    dim: self.dim,
                    data: self.data.iter().map(|x| x * s).collect(),
                }
            }

            fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
                assert_eq!(self.dim, other.dim, "dimension mismatch");
                Self {
                    dim: self.dim,
                    data: self
                        .data
                        .iter()
                        .zip(&other.data)
                        .map(|(a, b)| f(*a, *b))
                        .collect(),
                }
            }
        }

        impl Dense for $ty {
            fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
                self.zip_with(other, |x, y| a * x + b * y)
            }
        }

        impl Add for &$ty {
            type Output = $ty;
            fn add(self, rhs: &$ty) -> $ty {
                self.zip_with(rhs, |a, b| a + b)
            }
        }

        impl Sub for &$ty {
            type Output = $ty;
            fn sub(self, rhs: &$ty) -> $ty {
                self.zip_with(rhs, |a, b| a - b)
            }
        }

        impl Add for $ty {
            type Output = $ty;
            fn add(self, rhs: $ty) -> $ty {
                &self + &rhs
            }
        }

        impl Sub for $ty {
            type Output = $ty;
            fn sub(self, rhs: $ty) -> $ty {
                &self - &rhs
            }
        }

        impl Mul<f64> for &$ty {
            type Output = $ty;
            fn mul(self, s: f64) -> $ty {
                self.scale(s)
            }
        }

        impl Mul<f64> for $ty {
            type Output = $ty;
            fn mul(self, s: f64) -> $ty {
                self.scale(s)
            }
        }

        impl Neg for $ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                self.scale(-1.0)
            }
        }
    };
}

/// A tangent vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector {
    dim: usize,
    data: Vec<f64>,
}

/// A 1-form.
#[derive(Clone, Debug, PartialEq)]
pub struct Covector {
    dim: usize,
    data: Vec<f64>,
}

/// A (0,2) tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Bilinear {
    dim: usize,
    data: Vec<f64>,
}

/// A (1,1) tensor acting on tangent vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Endomorphism {
    dim: usize,
    data: Vec<f64>,
}

/// A (0,3) tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    dim: usize,
    data: Vec<f64>,
}

/// A (0,4) tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    dim: usize,
    data: Vec<f64>,
}

dense_common!(Vector);
dense_common!(Covector);
dense_common!(Bilinear);
dense_common!(Endomorphism);
dense_common!(Tensor3);
dense_common!(Tensor4);

impl Vector {
    fn len_for(dim: usize) -> usize {
        dim
    }

    /// Builds a vector, rejecting odd or too-small lengths.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        check_dim(components.len())?;
        Ok(Self {
            dim: components.len(),
            data: components,
        })
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize) -> f64) -> Self {
        Self {
            dim,
            data: (0..dim).map(f).collect(),
        }
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        Self::from_fn(dim, |k| if k == i { 1.0 } else { 0.0 })
    }

    /// The 1-form `g(self, .)`.
    pub fn lower(&self, g: &Bilinear) -> Covector {
        Covector::from_fn(self.dim, |j| {
            (0..self.dim).map(|i| self.data[i] * g[[i, j]]).sum()
        })
    }
}

impl Covector {
    fn len_for(dim: usize) -> usize {
        dim
    }

    pub fn new(components: Vec<f64>) -> Result<Self> {
        check_dim(components.len())?;
        Ok(Self {
            dim: components.len(),
            data: components,
        })
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize) -> f64) -> Self {
        Self {
            dim,
            data: (0..dim).map(f).collect(),
        }
    }

    pub fn apply(&self, v: &Vector) -> f64 {
        self.data.iter().zip(&v.data).map(|(a, b)| a * b).sum()
    }

    /// The pulled-back form `x -> self(P x)`.
    pub fn compose(&self, p: &Endomorphism) -> Covector {
        Covector::from_fn(self.dim, |k| {
            (0..self.dim).map(|a| self.data[a] * p[[a, k]]).sum()
        })
    }

    /// The bilinear form `(x, y) -> self(x) other(y)`.
    pub fn outer(&self, other: &Covector) -> Bilinear {
        Bilinear::from_fn(self.dim, |i, j| self.data[i] * other.data[j])
    }
}

impl Bilinear {
    fn len_for(dim: usize) -> usize {
        dim * dim
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds from rows; all rows must have the same length as the row count.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        for r in rows {
            check_same(dim, r.len())?;
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[[i, j]]).collect())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[[j, i]])
    }

    /// Antisymmetric part scaled as `B(x,y) - B(y,x)`.
    pub fn skew(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[[i, j]] - self[[j, i]])
    }

    pub fn asymmetry(&self) -> f64 {
        self.skew().max_abs()
    }

    pub fn eval(&self, x: &Vector, y: &Vector) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += x.data[i] * self[[i, j]] * y.data[j];
            }
        }
        s
    }

    /// `(x, y) -> B(x, P y)`.
    pub fn compose_right(&self, p: &Endomorphism) -> Self {
        let d = self.dim;
        Self::from_fn(d, |i, j| (0..d).map(|b| self[[i, b]] * p[[b, j]]).sum())
    }

    /// `(x, y) -> B(P x, y)`.
    pub fn compose_left(&self, p: &Endomorphism) -> Self {
        let d = self.dim;
        Self::from_fn(d, |i, j| (0..d).map(|a| p[[a, i]] * self[[a, j]]).sum())
    }

    /// `(x, y) -> B(P x, P y)`.
    pub fn pullback(&self, p: &Endomorphism) -> Self {
        self.compose_right(p).compose_left(p)
    }

    /// Full contraction `inv^{ij} B_ij` against an inverse metric.
    pub fn trace_with(&self, inv: &Bilinear) -> f64 {
        self.data.iter().zip(&inv.data).map(|(a, b)| a * b).sum()
    }

    fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    fn from_matrix(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }
}

impl Endomorphism {
    fn len_for(dim: usize) -> usize {
        dim * dim
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                data.push(f(a, b));
            }
        }
        Self { dim, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        for r in rows {
            check_same(dim, r.len())?;
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    /// The standard product structure `diag(I_n, -I_n)` in dimension `2n`.
    pub fn standard_product(n: usize) -> Self {
        Self::from_fn(2 * n, |i, j| match (i == j, i < n) {
            (false, _) => 0.0,
            (true, true) => 1.0,
            (true, false) => -1.0,
        })
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[[i, j]]).collect())
            .collect()
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        let d = self.dim;
        Vector::from_fn(d, |a| (0..d).map(|b| self[[a, b]] * v.data[b]).sum())
    }

    /// Matrix product `self ∘ other`.
    pub fn compose(&self, other: &Endomorphism) -> Endomorphism {
        let d = self.dim;
        Endomorphism::from_fn(d, |a, b| (0..d).map(|c| self[[a, c]] * other[[c, b]]).sum())
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self[[i, i]]).sum()
    }
}

impl Tensor3 {
    fn len_for(dim: usize) -> usize {
        dim * dim * dim
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    data.push(f(i, j, k));
                }
            }
        }
        Self { dim, data }
    }

    /// Slot permutation: `out[[i0, i1, i2]] = self[[i[perm[0]], i[perm[1]], i[perm[2]]]]`.
    pub fn permute(&self, perm: [usize; 3]) -> Self {
        Self::from_fn(self.dim, |i, j, k| {
            let idx = [i, j, k];
            self[[idx[perm[0]], idx[perm[1]], idx[perm[2]]]]
        })
    }

    pub fn eval(&self, x: &Vector, y: &Vector, z: &Vector) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    s += self[[i, j, k]] * x.data[i] * y.data[j] * z.data[k];
                }
            }
        }
        s
    }
}

impl Tensor4 {
    fn len_for(dim: usize) -> usize {
        dim * dim * dim * dim
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim.pow(4));
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        data.push(f(i, j, k, l));
                    }
                }
            }
        }
        Self { dim, data }
    }

    /// `(x, y, z, w) -> L(x, y, P z, P w)`.
    pub fn pull_last_two(&self, p: &Endomorphism) -> Self {
        let d = self.dim;
        Self::from_fn(d, |x, y, z, w| {
            let mut s = 0.0;
            for a in 0..d {
                let pa = p[[a, z]];
                if pa == 0.0 {
                    continue;
                }
                for b in 0..d {
                    s += pa * p[[b, w]] * self[[x, y, a, b]];
                }
            }
            s
        })
    }

    /// Ricci-type contraction `rho(y, z) = inv^{ij} L(e_i, y, z, e_j)`.
    pub fn ricci_contraction(&self, inv: &Bilinear) -> Bilinear {
        let d = self.dim;
        Bilinear::from_fn(d, |y, z| {
            let mut s = 0.0;
            for i in 0..d {
                for j in 0..d {
                    s += inv[[i, j]] * self[[i, y, z, j]];
                }
            }
            s
        })
    }
}

macro_rules! index_impl {
    ($ty:ident, $n:literal, |$dim:ident, $idx:ident| $offset:expr) => {
        impl Index<[usize; $n]> for $ty {
            type Output = f64;
            #[inline]
            fn index(&self, $idx: [usize; $n]) -> &f64 {
                let $dim = self.dim;
                &self.data[$offset]
            }
        }

        impl IndexMut<[usize; $n]> for $ty {
            #[inline]
            fn index_mut(&mut self, $idx: [usize; $n]) -> &mut f64 {
                let $dim = self.dim;
                &mut self.data[$offset]
            }
        }
    };
}

index_impl!(Vector, 1, |_d, i| i[0]);
index_impl!(Covector, 1, |_d, i| i[0]);
index_impl!(Bilinear, 2, |d, i| i[0] * d + i[1]);
index_impl!(Endomorphism, 2, |d, i| i[0] * d + i[1]);
index_impl!(Tensor3, 3, |d, i| (i[0] * d + i[1]) * d + i[2]);
index_impl!(Tensor4, 4, |d, i| ((i[0] * d + i[1]) * d + i[2]) * d + i[3]);

fn cholesky(g: &Bilinear) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let asym = g.asymmetry();
    let scale = g.max_abs().max(1.0);
    if asym > SOLVER_TOL * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    g.to_matrix().cholesky().ok_or(Error::NotPositiveDefinite)
}

/// Inverse of a symmetric positive definite metric.
pub fn metric_inverse(g: &Bilinear) -> Result<Bilinear> {
    let chol = cholesky(g)?;
    let inv = Bilinear::from_matrix(&chol.inverse());
    // symmetrize away round-off so downstream symmetry predicates stay exact
    let inv = Bilinear::from_fn(inv.dim, |i, j| 0.5 * (inv[[i, j]] + inv[[j, i]]));
    let d = g.dim;
    let residual = Bilinear::from_fn(d, |i, j| {
        let s: f64 = (0..d).map(|k| g[[i, k]] * inv[[k, j]]).sum();
        s - if i == j { 1.0 } else { 0.0 }
    })
    .max_abs();
    let scale = g.max_abs().max(1.0) * inv.max_abs().max(1.0);
    if residual > SOLVER_TOL * scale {
        return Err(Error::InverseInaccurate { residual });
    }
    Ok(inv)
}

/// Metric dual of a 1-form: the vector `Omega` with `g(Omega, x) = theta(x)`.
pub fn sharp(g: &Bilinear, theta: &Covector) -> Result<Vector> {
    check_same(g.dim, theta.dim)?;
    let chol = cholesky(g)?;
    let rhs = DVector::from_column_slice(&theta.data);
    let sol = chol.solve(&rhs);
    Ok(Vector::from_fn(g.dim, |i| sol[i]))
}

/// Raises a vector index with a precomputed inverse metric.
pub fn sharp_with(inv: &Bilinear, theta: &Covector) -> Vector {
    let d = inv.dim;
    Vector::from_fn(d, |i| (0..d).map(|j| inv[[i, j]] * theta.data[j]).sum())
}

/// The 1-form `z -> inv^{ij} F(e_i, e_j, z)`.
pub fn trace_contract(f: &Tensor3, inv: &Bilinear) -> Result<Covector> {
    check_same(inv.dim, f.dim)?;
    let d = f.dim;
    Ok(Covector::from_fn(d, |k| {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += inv[[i, j]] * f[[i, j, k]];
            }
        }
        s
    }))
}

/// Lifts a (0,3) tensor to vector values in its last slot: `out^l(x, y) = inv^{lk} T(x, y, e_k)`.
pub fn raise_last(t: &Tensor3, inv: &Bilinear) -> Tensor3 {
    let d = t.dim;
    Tensor3::from_fn(d, |i, j, l| {
        (0..d).map(|k| inv[[l, k]] * t[[i, j, k]]).sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_identity_and_diagonal() {
        let id = Bilinear::identity(2);
        assert_eq!(metric_inverse(&id).unwrap(), id);
        let g = Bilinear::diagonal(&[2.0, 2.0]);
        let inv = metric_inverse(&g).unwrap();
        assert!(inv.max_abs_diff(&Bilinear::diagonal(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn inverse_rejects_bad_input() {
        let asym = Bilinear::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            metric_inverse(&asym),
            Err(Error::NotSymmetric { .. })
        ));
        let indef = Bilinear::diagonal(&[1.0, -1.0]);
        assert!(matches!(
            metric_inverse(&indef),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn sharp_examples() {
        let th = Covector::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(
            sharp(&Bilinear::identity(2), &th).unwrap().as_slice(),
            &[1.0, 2.0]
        );
        let th = Covector::new(vec![2.0, 0.0]).unwrap();
        let om = sharp(&Bilinear::diagonal(&[2.0, 2.0]), &th).unwrap();
        assert!((om[[0]] - 1.0).abs() < 1e-15 && om[[1]].abs() < 1e-15);
        let zero = Covector::zeros(4);
        assert_eq!(sharp(&Bilinear::identity(4), &zero).unwrap().max_abs(), 0.0);
        assert!(sharp(&Bilinear::diagonal(&[1.0, 0.0]), &th).is_err());
    }

    #[test]
    fn trace_contract_shape_mismatch() {
        let f = Tensor3::zeros(4);
        assert!(matches!(
            trace_contract(&f, &Bilinear::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(
            trace_contract(&f, &Bilinear::identity(4))
                .unwrap()
                .max_abs(),
            0.0
        );
    }

    #[test]
    fn vectors_need_even_dimension() {
        assert!(Vector::new(vec![1.0, 2.0, 3.0]).is_err());
        assert!(Covector::new(vec![]).is_err());
        assert!(Vector::new(vec![0.0; 6]).is_ok());
    }

    #[test]
    fn index_layout_matches_eval() {
        let t = Tensor3::from_fn(2, |i, j, k| (i * 4 + j * 2 + k) as f64);
        let e = |i| Vector::basis(2, i);
        assert_eq!(t.eval(&e(1), &e(0), &e(1)), 5.0);
        assert_eq!(t.permute([2, 1, 0])[[1, 0, 0]], t[[0, 0, 1]]);
    }
}
