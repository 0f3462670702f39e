//! Small dense kernel for n×n real matrices, n ≤ 4.
//!
//! Everything here is stack allocated. Singular values come from one-sided
//! (Hestenes) Jacobi iteration, which keeps high relative accuracy for the
//! smallest singular value; that is the quantity the inner dilatation divides by.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAX_DIM: usize = 4;

const MAX_SWEEPS: usize = 64;

/// A point (or vector) of ℝⁿ with n ≤ [`MAX_DIM`].
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Point<T> {
    dim: usize,
    c: [T; MAX_DIM],
}

impl<T: Scalar> Point<T> {
    pub fn new(coords: &[T]) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::invalid(format!("point dimension {} outside 1..={MAX_DIM}", coords.len())));
        }
        let mut c = [T::zero(); MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Self { dim: coords.len(), c })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self { dim, c: [T::zero(); MAX_DIM] }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize) -> T) -> Self {
        let mut p = Self::zeros(dim);
        for i in 0..dim {
            p.c[i] = f(i);
        }
        p
    }

    /// The i-th standard basis vector.
    pub fn unit(dim: usize, i: usize) -> Self {
        Self::from_fn(dim, |k| if k == i { T::one() } else { T::zero() })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.c[..self.dim]
    }

    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim, other.dim);
        (0..self.dim).map(|i| self.c[i] * other.c[i]).sum()
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.as_slice().iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_fn(self.dim, |i| self.c[i] * s)
    }

    pub fn cast<U: Scalar>(&self) -> Point<U> {
        Point::from_fn(self.dim, |i| U::lit(self.c[i].to_f64_lossy()))
    }
}

impl<T> Index<usize> for Point<T> {
    type Output = T;
    #[inline]
    fn index(&self, i: usize) -> &T {
        assert!(i < self.dim);
        &self.c[i]
    }
}

impl<T> IndexMut<usize> for Point<T> {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut T {
        assert!(i < self.dim);
        &mut self.c[i]
    }
}

impl<T: Scalar> Add for Point<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        Self::from_fn(self.dim, |i| self.c[i] + rhs.c[i])
    }
}

impl<T: Scalar> Sub for Point<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        Self::from_fn(self.dim, |i| self.c[i] - rhs.c[i])
    }
}

impl<T: Scalar> Neg for Point<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Scalar> Mul<T> for Point<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// n×n real matrix, n ∈ {1, …, 4}, stored row-major.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Matrix<T> {
    dim: usize,
    a: [[T; MAX_DIM]; MAX_DIM],
}

/// Singular values σ₁ ≥ … ≥ σₙ ≥ 0 together with |det|.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct SingularSpectrum<T> {
    dim: usize,
    values: [T; MAX_DIM],
    pub abs_det: T,
}

impl<T: Scalar> SingularSpectrum<T> {
    pub fn values(&self) -> &[T] {
        &self.values[..self.dim]
    }

    /// ‖A‖, the maximal stretching.
    pub fn max(&self) -> T {
        self.values[0]
    }

    /// l(A), the minimal stretching.
    pub fn min(&self) -> T {
        self.values[self.dim - 1]
    }
}

impl<T: Scalar> Matrix<T> {
    /// Builds a matrix from `dim²` row-major entries.
    pub fn new(dim: usize, entries: &[T]) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::invalid(format!("matrix dimension {dim} outside 1..={MAX_DIM}")));
        }
        if entries.len() != dim * dim {
            return Err(Error::invalid(format!("{} entries given for a {dim}x{dim} matrix", entries.len())));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(Self::from_fn(dim, |i, j| entries[i * dim + j]))
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> T) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        let mut a = [[T::zero(); MAX_DIM]; MAX_DIM];
        for (i, row) in a.iter_mut().enumerate().take(dim) {
            for (j, v) in row.iter_mut().enumerate().take(dim) {
                *v = f(i, j);
            }
        }
        Self { dim, a }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn diag(d: &[T]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { d[i] } else { T::zero() })
    }

    /// Planar rotation by `theta` radians.
    pub fn rotation2(theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self::from_fn(2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => c,
            (0, 1) => -s,
            _ => s,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        assert!(i < self.dim && j < self.dim);
        self.a[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(i < self.dim && j < self.dim);
        self.a[i][j] = v;
    }

    pub fn row_major(&self) -> Vec<T> {
        (0..self.dim * self.dim).map(|k| self.a[k / self.dim][k % self.dim]).collect()
    }

    pub fn is_finite(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| self.a[i][j].is_finite()))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.a[j][i])
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_fn(self.dim, |i, j| self.a[i][j] * s)
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        Self::from_fn(self.dim, |i, j| (0..self.dim).map(|k| self.a[i][k] * rhs.a[k][j]).sum())
    }

    pub fn apply(&self, v: &Point<T>) -> Point<T> {
        assert_eq!(self.dim, v.dim());
        Point::from_fn(self.dim, |i| (0..self.dim).map(|k| self.a[i][k] * v[k]).sum())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                m = m.max(self.a[i][j].abs());
            }
        }
        m
    }

    fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid("matrix has non-finite entries"))
        }
    }

    fn triangular(&self) -> bool {
        let n = self.dim;
        let upper = (0..n).all(|i| (0..i).all(|j| self.a[i][j] == T::zero()));
        let lower = (0..n).all(|i| (i + 1..n).all(|j| self.a[i][j] == T::zero()));
        upper || lower
    }

    /// Signed determinant. Triangular (and diagonal) input returns the exact
    /// product of the diagonal; everything else goes through partial-pivot LU.
    pub fn determinant(&self) -> Result<T> {
        self.check_finite()?;
        let n = self.dim;
        if self.triangular() {
            return Ok((0..n).fold(T::one(), |acc, i| acc * self.a[i][i]));
        }
        let mut a = self.a;
        let mut det = T::one();
        for k in 0..n {
            let piv = (k..n).max_by(|&x, &y| a[x][k].abs().partial_cmp(&a[y][k].abs()).unwrap()).unwrap();
            if a[piv][k] == T::zero() {
                return Ok(T::zero());
            }
            if piv != k {
                a.swap(piv, k);
                det = -det;
            }
            det = det * a[k][k];
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k + 1..n {
                    a[i][j] = a[i][j] - f * a[k][j];
                }
            }
        }
        Ok(det)
    }

    /// All singular values, sorted descending, with |det|.
    pub fn singular_values(&self) -> Result<SingularSpectrum<T>> {
        self.check_finite()?;
        let n = self.dim;
        let eps = T::epsilon();
        // Hestenes: orthogonalise the columns of a working copy.
        let mut w = self.a;
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for i in 0..n.saturating_sub(1) {
                for j in i + 1..n {
                    let mut alpha = T::zero();
                    let mut beta = T::zero();
                    let mut gamma = T::zero();
                    for row in w.iter().take(n) {
                        alpha = alpha + row[i] * row[i];
                        beta = beta + row[j] * row[j];
                        gamma = gamma + row[i] * row[j];
                    }
                    if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (gamma + gamma);
                    let t = if zeta == T::zero() {
                        T::one()
                    } else {
                        zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt())
                    };
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = c * t;
                    for row in w.iter_mut().take(n) {
                        let (wi, wj) = (row[i], row[j]);
                        row[i] = c * wi - s * wj;
                        row[j] = s * wi + c * wj;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut values = [T::zero(); MAX_DIM];
        for (j, v) in values.iter_mut().enumerate().take(n) {
            *v = (0..n).map(|i| w[i][j] * w[i][j]).sum::<T>().sqrt();
        }
        values[..n].sort_by(|x, y| y.partial_cmp(x).unwrap());
        Ok(SingularSpectrum { dim: n, values, abs_det: self.determinant()?.abs() })
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        self.check_finite()?;
        let n = self.dim;
        let mut a = self.a;
        let mut inv = Self::identity(n).a;
        let scale = self.max_abs();
        for k in 0..n {
            let piv = (k..n).max_by(|&x, &y| a[x][k].abs().partial_cmp(&a[y][k].abs()).unwrap()).unwrap();
            if a[piv][k].abs() <= T::epsilon() * scale * T::lit(1e-3) {
                return Err(Error::DegenerateMatrix("matrix is singular".into()));
            }
            a.swap(piv, k);
            inv.swap(piv, k);
            let d = a[k][k];
            for j in 0..n {
                a[k][j] = a[k][j] / d;
                inv[k][j] = inv[k][j] / d;
            }
            for i in 0..n {
                if i != k {
                    let f = a[i][k];
                    for j in 0..n {
                        a[i][j] = a[i][j] - f * a[k][j];
                        inv[i][j] = inv[i][j] - f * inv[k][j];
                    }
                }
            }
        }
        Ok(Self { dim: n, a: inv })
    }

    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        Matrix::from_fn(self.dim, |i, j| U::lit(self.a[i][j].to_f64_lossy()))
    }
}

pub fn singular_values<T: Scalar>(m: &Matrix<T>) -> Result<SingularSpectrum<T>> {
    m.singular_values()
}

pub fn determinant<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    m.determinant()
}
