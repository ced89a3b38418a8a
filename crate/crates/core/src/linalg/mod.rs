//! Dense complex linear algebra for small square matrices.
//!
//! Everything here works on row-major `dim × dim` storage. The sizes we care
//! about are 2–8, occasionally up to a few dozen, so the kernels are written
//! for clarity rather than cache blocking.

mod eigen;
mod expm;
mod family;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use eigen::{eigenpairs, hermitian_eigen, hermitian_sqrt, operator_norm, EigenPair, DEFAULT_EIGEN_TOL};
pub use expm::matrix_exp;
pub use family::{default_step, family_derivative, OperatorFamily, TimeMatrixFn};

pub type C64 = Complex64;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        ComplexMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| c64(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    /// Builds a matrix from rows, checking squareness and finiteness.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidMatrix("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        let m = ComplexMatrix { dim, data };
        m.check_finite()?;
        Ok(m)
    }

    /// Shorthand for literal matrices in code and tests; panics on bad shape.
    pub fn from_array<const N: usize>(rows: [[C64; N]; N]) -> Self {
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        ComplexMatrix { dim: N, data }
    }

    pub fn from_real<const N: usize>(rows: [[f64; N]; N]) -> Self {
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| c64(x, 0.0)))
            .collect();
        ComplexMatrix { dim: N, data }
    }

    /// Columns become the matrix columns.
    pub fn from_columns(cols: &[ComplexVector]) -> Self {
        let dim = cols.len();
        Self::from_fn(dim, |i, j| cols[j][i])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        ComplexVector::from_fn(self.dim, |i| self[(i, j)])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidMatrix("non-finite entry".into()))
        }
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                found: self.dim,
            })
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max absolute row sum; an upper bound for the spectral norm that is
    /// cheap enough to use inside the exponential's scaling step.
    pub fn norm_inf(&self) -> f64 {
        self.data
            .chunks(self.dim)
            .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim, v.dim(), "matrix-vector dimension mismatch");
        ComplexVector::from_fn(self.dim, |i| {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            row.iter().zip(v.as_slice()).map(|(a, b)| a * b).sum()
        })
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Largest entrywise deviation from being Hermitian, measured as ‖M − M†‖_F.
    pub fn hermitian_defect(&self) -> f64 {
        (self - &self.adjoint()).norm_fro()
    }

    pub fn add_diag(&self, s: C64) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            m[(i, i)] += s;
        }
        m
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.dim;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm()))
                .unwrap();
            if a[(pivot, col)].norm() <= 1e3 * f64::EPSILON * scale * n as f64 {
                return Err(Error::InvalidMatrix("singular matrix".into()));
            }
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let p = a[(col, col)].inv();
            for j in 0..n {
                a[(col, j)] *= p;
                inv[(col, j)] *= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == ZERO {
                    continue;
                }
                for j in 0..n {
                    let ac = a[(col, j)];
                    let ic = inv[(col, j)];
                    a[(r, j)] -= f * ac;
                    inv[(r, j)] -= f * ic;
                }
            }
        }
        Ok(inv)
    }

    /// Determinant by LU with partial pivoting.
    pub fn determinant(&self) -> C64 {
        let n = self.dim;
        let mut a = self.clone();
        let mut det = ONE;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm()))
                .unwrap();
            if a[(pivot, col)] == ZERO {
                return ZERO;
            }
            if pivot != col {
                a.swap_rows(pivot, col);
                det = -det;
            }
            let p = a[(col, col)];
            det *= p;
            for r in col + 1..n {
                let f = a[(r, col)] / p;
                for j in col..n {
                    let v = a[(col, j)];
                    a[(r, j)] -= f * v;
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        let n = self.dim;
        for j in 0..n {
            self.data.swap(a * n + j, b * n + j);
        }
    }

    /// Block-diagonal direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let n = self.dim + other.dim;
        Self::from_fn(n, |i, j| {
            if i < self.dim && j < self.dim {
                self[(i, j)]
            } else if i >= self.dim && j >= self.dim {
                other[(i - self.dim, j - self.dim)]
            } else {
                ZERO
            }
        })
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for row in self.data.chunks(self.dim) {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:>+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self * &rhs
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix sum dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self + &rhs
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix difference dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self - &rhs
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Dense complex column vector.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexVector {
    data: Vec<C64>,
}

impl ComplexVector {
    pub fn zeros(dim: usize) -> Self {
        ComplexVector {
            data: vec![ZERO; dim],
        }
    }

    pub fn new(data: Vec<C64>) -> Self {
        ComplexVector { data }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize) -> C64) -> Self {
        ComplexVector {
            data: (0..dim).map(f).collect(),
        }
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[k] = ONE;
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn iter(&self) -> impl Iterator<Item = &C64> {
        self.data.iter()
    }

    /// Standard inner product, conjugate-linear in `self`.
    pub fn dot(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexVector {
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        ComplexVector {
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        ComplexVector {
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// `self + s * other`
    pub fn axpy(&self, s: C64, other: &Self) -> Self {
        ComplexVector {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            })
        }
    }

    /// Rotates the global phase so the first component of (numerically)
    /// largest modulus is real and positive.
    pub fn fix_phase(&self) -> Self {
        let max = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return self.clone();
        }
        let pivot = self
            .data
            .iter()
            .find(|z| z.norm() >= max * (1.0 - 1e-9))
            .copied()
            .unwrap();
        self.scale(pivot.conj() / pivot.norm())
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        self.scale_real(1.0 / n)
    }
}

impl Index<usize> for ComplexVector {
    type Output = C64;
    #[inline]
    fn index(&self, i: usize) -> &C64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.data[i]
    }
}

impl fmt::Debug for ComplexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexVector[")?;
        for z in &self.data {
            write!(f, " {:+.6e}{:+.6e}i", z.re, z.im)?;
        }
        write!(f, " ]")
    }
}

impl<'a> Add<&'a ComplexVector> for &'a ComplexVector {
    type Output = ComplexVector;
    fn add(self, rhs: &'a ComplexVector) -> ComplexVector {
        self.axpy(ONE, rhs)
    }
}

impl<'a> Sub<&'a ComplexVector> for &'a ComplexVector {
    type Output = ComplexVector;
    fn sub(self, rhs: &'a ComplexVector) -> ComplexVector {
        self.axpy(-ONE, rhs)
    }
}

impl<'a> Mul<&'a ComplexVector> for &'a ComplexMatrix {
    type Output = ComplexVector;
    fn mul(self, rhs: &'a ComplexVector) -> ComplexVector {
        self.mul_vec(rhs)
    }
}

/// Antilinear map `x ↦ K·conj(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntilinearOperator {
    conj_matrix: ComplexMatrix,
}

impl AntilinearOperator {
    pub fn new(conj_matrix: ComplexMatrix) -> Self {
        AntilinearOperator { conj_matrix }
    }

    /// Plain componentwise conjugation (K = I).
    pub fn conjugation(dim: usize) -> Self {
        Self::new(ComplexMatrix::identity(dim))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.conj_matrix
    }

    pub fn dim(&self) -> usize {
        self.conj_matrix.dim()
    }

    pub fn apply(&self, x: &ComplexVector) -> ComplexVector {
        self.conj_matrix.mul_vec(&x.conj())
    }

    /// Matrix of the linear map T∘T, i.e. K·conj(K).
    pub fn squared(&self) -> ComplexMatrix {
        &self.conj_matrix * &self.conj_matrix.conj()
    }

    /// Antilinear operator `A ∘ T` for a linear `A`: x ↦ A·K·conj(x).
    pub fn after_linear(&self, a: &ComplexMatrix) -> AntilinearOperator {
        AntilinearOperator::new(a * &self.conj_matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_determinant() {
        let m = ComplexMatrix::from_array([
            [c64(2.0, 1.0), c64(0.0, -1.0), c64(1.0, 0.0)],
            [c64(0.5, 0.0), c64(3.0, 0.0), c64(0.0, 2.0)],
            [c64(-1.0, 0.0), c64(1.0, 1.0), c64(4.0, 0.0)],
        ]);
        let inv = m.inverse().unwrap();
        let prod = &m * &inv;
        assert!((&prod - &ComplexMatrix::identity(3)).norm_fro() < 1e-13);
        let det_inv = inv.determinant();
        assert!((m.determinant() * det_inv - ONE).norm() < 1e-13);
    }

    #[test]
    fn singular_inverse_rejected() {
        let m = ComplexMatrix::from_real([[1.0, 2.0], [2.0, 4.0]]);
        assert!(m.inverse().is_err());
        assert_eq!(m.determinant(), ZERO);
    }

    #[test]
    fn from_rows_checks_shape_and_finiteness() {
        assert!(ComplexMatrix::from_rows(vec![vec![ONE, ZERO]]).is_err());
        assert!(ComplexMatrix::from_rows(vec![vec![c64(f64::NAN, 0.0)]]).is_err());
        assert!(ComplexMatrix::from_rows(vec![]).is_err());
    }

    #[test]
    fn antilinear_is_conjugate_linear() {
        let t = AntilinearOperator::new(ComplexMatrix::from_real([[0.0, 1.0], [1.0, 0.0]]));
        let x = ComplexVector::new(vec![c64(1.0, 2.0), c64(-0.5, 0.25)]);
        let a = c64(0.3, -1.1);
        let lhs = t.apply(&x.scale(a));
        let rhs = t.apply(&x).scale(a.conj());
        assert!((&lhs - &rhs).norm() < 1e-15);
    }

    #[test]
    fn fix_phase_prefers_first_of_equal_moduli() {
        let v = ComplexVector::new(vec![c64(0.0, 1.0), c64(-1.0, 0.0)]).fix_phase();
        assert!((v[0] - ONE).norm() < 1e-15);
        assert!((v[1] - I).norm() < 1e-15);
    }
}
